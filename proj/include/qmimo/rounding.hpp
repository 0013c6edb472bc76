// SPDX-License-Identifier: Apache-2.0
//
// qmimo - stochastic hybrid combining for quantized massive MIMO uplinks
// Copyright (C) 2026 The qmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef QMIMO_ROUNDING_HPP
#define QMIMO_ROUNDING_HPP

#include "qmimo/frontend.hpp"

namespace qmimo {

// Rounds a relaxed N x S selection to a binary one. Each column is thresholded
// by bisection until exactly one entry exceeds the threshold; when two columns
// claim the same row the larger relaxed value keeps it and the other column is
// re-thresholded without that row. Throws std::invalid_argument if N < S or an
// entry lies outside [0,1].
SelectionMatrix round_selection(const RMatrix &relaxed);

// Bisection threshold for one column restricted to `allowed` rows; returns the
// single row above the threshold (ties broken towards the lower row index).
int threshold_column(const RVector &column, const std::vector<char> &allowed);

} // namespace qmimo

#endif
