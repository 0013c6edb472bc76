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

#ifndef QMIMO_SCHEDULES_HPP
#define QMIMO_SCHEDULES_HPP

#include <functional>
#include <string>

namespace qmimo {

// Step sizes alpha^l (iterate smoothing) and beta^l (gradient tracking), l >= 0.
struct StepSchedules
{
    std::function<double(long)> alpha;
    std::function<double(long)> beta;
    std::string name;
};

// alpha^l = 5/(5+l), beta^l = 1/(1+l)^(2/3).
StepSchedules default_schedules();

// Checks the diminishing-step conditions numerically up to `horizon`: both
// sequences in (0,1] and nonincreasing, alpha^l -> 0, beta^l -> 0, and the ratio
// alpha/beta nonincreasing after its peak with alpha/beta at the horizon below a
// tenth of alpha^0/beta^0. Throws std::invalid_argument on violation.
void validate_schedules(const StepSchedules &s, long horizon = 1'000'000);

} // namespace qmimo

#endif
