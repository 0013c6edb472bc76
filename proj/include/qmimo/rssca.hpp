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

#ifndef QMIMO_RSSCA_HPP
#define QMIMO_RSSCA_HPP

#include "qmimo/config.hpp"
#include "qmimo/dual.hpp"
#include "qmimo/ops.hpp"

#include <functional>
#include <vector>

namespace qmimo {

struct TraceRecord
{
    long iteration = 0;
    double objective_mw = 0.0;     // sum_k p_k after the update
    double objective_dbm = 0.0;
    double max_constraint = 0.0;   // max_k (gamma_k - rhat_k) at the iterate the surrogates were built on
    double xi = 0.0;               // optimal value of the feasibility problem
    bool feasibility_mode = false; // true when the power problem was skipped
    int dual_iterations = 0;
};

struct SolveTrace
{
    std::vector<TraceRecord> records;
};

struct FrozenBlocks
{
    bool selection = false;
    bool combiner = false;
    bool beamformers = false;
};

struct RsscaResult
{
    DesignPoint relaxed;  // x^{L_f} before rounding
    DesignPoint solution; // binary selection
    SolveTrace trace;
};

// Default starting point for a layout: p = P^max/2, c = 1/N, V = I, W = [I_K; 0].
DesignPoint initial_point(const Layout &layout, const RVector &p_max);

// (1 - alpha) x + alpha xbar.
CVector smooth_update(const CVector &x, const CVector &xbar, double alpha);

// Called with (iteration, iterate) after every smoothing step.
using IterateObserver = std::function<void(long, const DesignPoint &)>;

// Runs L_f = cfg.frames iterations drawing one training frame per iteration
// from `stream`. Frozen blocks keep their value from `start` bit for bit.
// Errors from the subproblem solvers are rethrown as std::runtime_error naming
// the iteration.
RsscaResult run_rssca(const ExperimentConfig &cfg, const SystemModel &model, ChannelStream &stream,
                      const DesignPoint &start, const FrozenBlocks &frozen = {}, OpCounter *ops = nullptr,
                      const IterateObserver &observer = {});

} // namespace qmimo

#endif
