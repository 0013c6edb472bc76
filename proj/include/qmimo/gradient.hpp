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

#ifndef QMIMO_GRADIENT_HPP
#define QMIMO_GRADIENT_HPP

#include "qmimo/frontend.hpp"

namespace qmimo {

// Gradient of r_k = log2(1 + SINR_k) with respect to the stacked variable
// x = [p; c; v; w]. Complex blocks follow the conjugate (Wirtinger) convention
//   r_k(x + dx) ~ r_k(x) + Re[eta^H dx],
// i.e. eta = 2 dr/d(conj x); p and c entries are ordinary real partials. The
// dependence of R_q on p and c is included.
//
// Throws std::invalid_argument if p < 0, c is outside [0,1] or sigma^2 == 0.
CVector rate_gradient(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model, int user);

// All K gradients as the columns of an n x K matrix; shares the per-sample work.
CMatrix rate_gradients(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model);

} // namespace qmimo

#endif
