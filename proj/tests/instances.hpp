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

// Random problem instances shared by the unit tests and the acceptance run.

#ifndef QMIMO_TESTS_INSTANCES_HPP
#define QMIMO_TESTS_INSTANCES_HPP

#include "qmimo/dual.hpp"
#include "qmimo/frontend.hpp"
#include "qmimo/surrogate.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace instances {

using namespace qmimo;

inline double uniform(Rng &rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

// A relaxed selection inside chi: a random assignment blended with the uniform 1/N matrix.
inline RMatrix relaxed_selection(Rng &rng, int N, int S)
{
    std::vector<int> rows(N);
    std::iota(rows.begin(), rows.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    RMatrix c = RMatrix::Zero(N, S);
    for (int s = 0; s < S; ++s)
        c(rows[s], s) = 1.0;
    const double t = uniform(rng, 0.0, 1.0);
    return (1.0 - t) * c + t * RMatrix::Constant(N, S, 1.0 / N);
}

inline CMatrix complex_gaussian(Rng &rng, int rows, int cols, double scale = 1.0)
{
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            m(i, j) = scale * complex_normal(rng);
    return m;
}

inline DesignPoint random_design(Rng &rng, const Layout &L, double p_max)
{
    DesignPoint x;
    x.powers = RVector(L.users);
    for (int k = 0; k < L.users; ++k)
        x.powers(k) = uniform(rng, 0.1, 1.0) * p_max;
    x.selection = relaxed_selection(rng, L.codewords, L.rf_chains);
    x.combiner = complex_gaussian(rng, L.rf_chains, L.rf_chains);
    x.beamformers = complex_gaussian(rng, L.rf_chains, L.users);
    return x;
}

struct SubproblemInstance
{
    SurrogateSet surrogates;
    FeasibleSet set;
};

// Strongly convex surrogate constraints that are strictly feasible at a point
// needing substantial power, so the optimal total power is bounded away from 0.
inline SubproblemInstance random_subproblem(Rng &rng, const Layout &L, bool weighted, bool freeze_selection = false)
{
    const double p_max = 1.0;
    SubproblemInstance out;
    out.set = FeasibleSet(L, RVector::Constant(L.users, p_max));
    out.set.freeze_selection = freeze_selection;

    DesignPoint center = random_design(rng, L, p_max);
    for (int k = 0; k < L.users; ++k)
        center.powers(k) = uniform(rng, 0.5, 0.8) * p_max;
    DesignPoint target = center;
    for (int k = 0; k < L.users; ++k)
        target.powers(k) += uniform(rng, 0.0, 0.15) * p_max;
    target.combiner += complex_gaussian(rng, L.rf_chains, L.rf_chains, 0.1);
    target.beamformers += complex_gaussian(rng, L.rf_chains, L.users, 0.1);

    SurrogateSet &s = out.surrogates;
    s.center = center.stack();
    const int n = L.size();
    s.slopes = complex_gaussian(rng, n, L.users, 0.05);
    for (int k = 0; k < L.users; ++k)
        for (int i = 0; i < L.users; ++i)
            s.slopes(i, k) = i == k ? -uniform(rng, 1.0, 2.0) : uniform(rng, 0.0, 0.3);
    // Real blocks carry real slopes.
    for (int t = 0; t < L.real_size(); ++t)
        for (int k = 0; k < L.users; ++k)
            s.slopes(t, k) = s.slopes(t, k).real();
    s.curvature = RVector(L.users);
    for (int k = 0; k < L.users; ++k)
        s.curvature(k) = uniform(rng, 0.5, 2.0);
    if (weighted)
    {
        s.metric = RVector(n);
        for (int t = 0; t < n; ++t)
            s.metric(t) = uniform(rng, 0.2, 2.0);
    }
    if (freeze_selection)
        s.slopes.middleRows(L.c_offset(), L.codewords * L.rf_chains).setZero();
    s.offset = RVector::Zero(L.users);
    const RVector at_target = s.values(target.stack());
    for (int k = 0; k < L.users; ++k)
        s.offset(k) = -at_target(k) - uniform(rng, 0.01, 0.1);
    return out;
}

} // namespace instances

#endif
