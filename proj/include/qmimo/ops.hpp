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

#ifndef QMIMO_OPS_HPP
#define QMIMO_OPS_HPP

#include <cstdint>

namespace qmimo {

// Kernel invocation counters with a rough floating-point operation estimate.
// Passed explicitly to the solver; never shared between concurrent runs.
struct OpCounter
{
    std::uint64_t rate_evaluations = 0;
    std::uint64_t gradient_evaluations = 0;
    std::uint64_t primal_evaluations = 0;
    std::uint64_t hessian_builds = 0;
    std::uint64_t kkt_solves = 0;
    std::uint64_t dual_iterations = 0;
    double flops = 0.0;

    OpCounter &operator+=(const OpCounter &o)
    {
        rate_evaluations += o.rate_evaluations;
        gradient_evaluations += o.gradient_evaluations;
        primal_evaluations += o.primal_evaluations;
        hessian_builds += o.hessian_builds;
        kkt_solves += o.kkt_solves;
        dual_iterations += o.dual_iterations;
        flops += o.flops;
        return *this;
    }
};

} // namespace qmimo

#endif
