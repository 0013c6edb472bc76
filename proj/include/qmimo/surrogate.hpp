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

#ifndef QMIMO_SURROGATE_HPP
#define QMIMO_SURROGATE_HPP

#include "qmimo/frontend.hpp"

#include <vector>

namespace qmimo {

// K strongly convex quadratics around a common center x^l:
//   f_k(x) = offset_k + Re[slope_k^H (x - center)] + curvature_k * sum_t metric_t |x_t - center_t|^2.
// An empty metric means all ones. This is everything the convex subproblems need to know.
struct SurrogateSet
{
    CVector center;   // x^l
    CMatrix slopes;   // n x K, column k is kappa_k
    RVector curvature; // tau_k > 0
    RVector offset;   // gamma_k - rhat_k
    RVector metric;   // per-coordinate weights of the proximal term, > 0

    double weight(Eigen::Index t) const { return metric.size() ? metric(t) : 1.0; }

    int users() const { return static_cast<int>(offset.size()); }
    Eigen::Index dimension() const { return center.size(); }
    double value(int k, const CVector &x) const;
    RVector values(const CVector &x) const;
};

enum class RateAverageMode
{
    all_samples, // rhat = mean of r_k(x^l; H^i) over every stored sample
    recursive    // rhat = (1-beta) rhat + beta r_k(x^l; H^l), constant memory
};

// Recursive surrogate bookkeeping for one RSSCA run.
struct SurrogateState
{
    Layout layout;
    RVector targets;          // gamma_k
    RVector convexity;        // tau_k
    CMatrix tracked_gradients; // kappa_k as columns, same layout as the design point
    RVector sample_avg_rates; // rhat_k
    long iteration = 0;       // number of updates applied so far
    std::vector<BeamspaceSample> sample_store;
    std::size_t capacity = 300;
    RateAverageMode mode = RateAverageMode::all_samples;
    RVector free_mask;        // 1 for optimised coordinates, 0 for frozen ones
    CVector center;           // iterate the surrogates are built around
    RVector metric;           // proximal weights, empty for the plain Euclidean norm

    SurrogateSet surrogates() const;
};

SurrogateState make_surrogate_state(const Layout &layout, const RVector &targets, const RVector &convexity,
                                    std::size_t capacity = 300,
                                    RateAverageMode mode = RateAverageMode::all_samples);

// One Step-1 update at frame l = state.iteration: appends the sample, refreshes
// rhat_k at the current iterate and tracks kappa_k <- (1-beta) kappa_k + beta g_k,
// where g_k = -grad r_k is the gradient of gamma_k - r_k. Frozen coordinates
// (free_mask == 0) get zero gradient. Throws std::invalid_argument when the
// sample store is full in all_samples mode.
void update_surrogate(SurrogateState &state, const DesignPoint &x, BeamspaceSample sample,
                      const SystemModel &model, double beta);

double surrogate_value(const SurrogateState &state, int user, const CVector &x);

} // namespace qmimo

#endif
