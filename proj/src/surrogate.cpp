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

#include "qmimo/surrogate.hpp"
#include "qmimo/gradient.hpp"

#include <stdexcept>

namespace qmimo {

double SurrogateSet::value(int k, const CVector &x) const
{
    const CVector d = x - center;
    const double dn = metric.size() ? metric.dot(d.cwiseAbs2()) : d.squaredNorm();
    return offset(k) + slopes.col(k).dot(d).real() + curvature(k) * dn;
}

RVector SurrogateSet::values(const CVector &x) const
{
    const CVector d = x - center;
    const double dn = metric.size() ? metric.dot(d.cwiseAbs2()) : d.squaredNorm();
    const RVector lin = (slopes.adjoint() * d).real();
    return offset + lin + curvature * dn;
}

SurrogateSet SurrogateState::surrogates() const
{
    SurrogateSet s;
    s.center = center;
    s.slopes = tracked_gradients;
    s.curvature = convexity;
    s.offset = targets - sample_avg_rates;
    s.metric = metric;
    return s;
}

SurrogateState make_surrogate_state(const Layout &layout, const RVector &targets, const RVector &convexity,
                                    std::size_t capacity, RateAverageMode mode)
{
    const int K = layout.users;
    if (targets.size() != K || convexity.size() != K)
        throw std::invalid_argument("make_surrogate_state: per-user vectors must have K entries");
    if ((convexity.array() <= 0.0).any())
        throw std::invalid_argument("make_surrogate_state: convexity constants must be positive");
    if (capacity == 0)
        throw std::invalid_argument("make_surrogate_state: zero sample capacity");

    SurrogateState s;
    s.layout = layout;
    s.targets = targets;
    s.convexity = convexity;
    s.tracked_gradients = CMatrix::Zero(layout.size(), K);
    s.sample_avg_rates = RVector::Zero(K);
    s.capacity = capacity;
    s.mode = mode;
    s.free_mask = RVector::Ones(layout.size());
    s.center = CVector::Zero(layout.size());
    if (mode == RateAverageMode::all_samples)
        s.sample_store.reserve(capacity);
    return s;
}

void update_surrogate(SurrogateState &state, const DesignPoint &x, BeamspaceSample sample, const SystemModel &model,
                      double beta)
{
    if (x.layout() != state.layout)
        throw std::invalid_argument("update_surrogate: design point layout mismatch");
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("update_surrogate: beta must lie in (0,1]");

    const RVector current = instantaneous_rates(x, sample, model);
    if (state.mode == RateAverageMode::all_samples)
    {
        if (state.sample_store.size() >= state.capacity)
            throw std::invalid_argument("update_surrogate: sample store capacity exceeded");
        state.sample_store.push_back(sample);
        RVector acc = RVector::Zero(state.layout.users);
        for (const auto &b : state.sample_store)
            acc += instantaneous_rates(x, b, model);
        state.sample_avg_rates = acc / static_cast<double>(state.sample_store.size());
    }
    else
    {
        state.sample_avg_rates = (1.0 - beta) * state.sample_avg_rates + beta * current;
        if (state.iteration == 0)
            state.sample_avg_rates = current;
    }

    CMatrix g = -rate_gradients(x, sample, model);
    g.array().colwise() *= state.free_mask.cast<cplx>().array();
    state.tracked_gradients = (1.0 - beta) * state.tracked_gradients + beta * g;
    state.center = x.stack();
    ++state.iteration;
}

double surrogate_value(const SurrogateState &state, int user, const CVector &x)
{
    return state.surrogates().value(user, x);
}

} // namespace qmimo
