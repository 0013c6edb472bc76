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

#include "qmimo/schedules.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qmimo {

StepSchedules default_schedules()
{
    StepSchedules s;
    s.alpha = [](long l) { return 5.0 / (5.0 + static_cast<double>(l)); };
    s.beta = [](long l) { return 1.0 / std::pow(1.0 + static_cast<double>(l), 2.0 / 3.0); };
    s.name = "alpha=5/(5+l),beta=(1+l)^(-2/3)";
    return s;
}

void validate_schedules(const StepSchedules &s, long horizon)
{
    if (!s.alpha || !s.beta)
        throw std::invalid_argument("validate_schedules: schedule not set");
    if (horizon < 10)
        throw std::invalid_argument("validate_schedules: horizon too short");

    // Dense near the start, geometric afterwards.
    std::vector<long> grid;
    for (long l = 0; l < std::min(horizon, 1000L); ++l)
        grid.push_back(l);
    for (double l = 1000.0; l < static_cast<double>(horizon); l *= 1.05)
        grid.push_back(static_cast<long>(l));
    grid.push_back(horizon);

    double prev_a = 2.0, prev_b = 2.0;
    double prev_ratio = 0.0;
    bool past_peak = false;
    for (long l : grid)
    {
        const double a = s.alpha(l);
        const double b = s.beta(l);
        if (!(a > 0.0 && a <= 1.0) || !(b > 0.0 && b <= 1.0))
            throw std::invalid_argument("validate_schedules: step outside (0,1] at l=" + std::to_string(l));
        if (a > prev_a || b > prev_b)
            throw std::invalid_argument("validate_schedules: step increases at l=" + std::to_string(l));
        const double r = a / b;
        if (past_peak && r > prev_ratio * (1.0 + 1e-12))
            throw std::invalid_argument("validate_schedules: alpha/beta grows again at l=" + std::to_string(l));
        if (r < prev_ratio && l > 0)
            past_peak = true;
        prev_ratio = r;
        prev_a = a;
        prev_b = b;
    }
    const double r0 = s.alpha(0) / s.beta(0);
    if (!(prev_ratio < 0.1 * r0))
        throw std::invalid_argument("validate_schedules: alpha/beta does not decay over the horizon");
    if (!(prev_a < 0.1 * s.alpha(0)) || !(prev_b < 0.1 * s.beta(0)))
        throw std::invalid_argument("validate_schedules: steps do not diminish over the horizon");
}

} // namespace qmimo
