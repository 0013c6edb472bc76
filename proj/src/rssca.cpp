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

#include "qmimo/rssca.hpp"

#include "qmimo/rounding.hpp"

#include <stdexcept>
#include <string>

namespace qmimo {

DesignPoint initial_point(const Layout &layout, const RVector &p_max)
{
    const int K = layout.users, N = layout.codewords, S = layout.rf_chains;
    if (p_max.size() != K)
        throw std::invalid_argument("initial_point: power limits must have K entries");
    DesignPoint x;
    x.powers = p_max / 2.0;
    x.selection = RMatrix::Constant(N, S, 1.0 / N);
    x.combiner = CMatrix::Identity(S, S);
    x.beamformers = CMatrix::Identity(S, K);
    return x;
}

CVector smooth_update(const CVector &x, const CVector &xbar, double alpha)
{
    if (x.size() != xbar.size())
        throw std::invalid_argument("smooth_update: size mismatch");
    if (alpha == 1.0)
        return xbar;
    return (1.0 - alpha) * x + alpha * xbar;
}

namespace {

// Removes rounding-level excursions outside the box so that the iterate is
// exactly in the relaxed set; frozen entries are restored from the start point.
void clean_iterate(CVector &x, const Layout &L, const RVector &p_max, const CVector &start, const RVector &free)
{
    for (int i = 0; i < L.real_size(); ++i)
    {
        const double hi = i < L.users ? p_max(i) : 1.0;
        x(i) = std::clamp(x(i).real(), 0.0, hi);
    }
    for (int i = 0; i < L.size(); ++i)
        if (free(i) == 0.0)
            x(i) = start(i);
}

} // namespace

RsscaResult run_rssca(const ExperimentConfig &cfg, const SystemModel &model, ChannelStream &stream,
                      const DesignPoint &start, const FrozenBlocks &frozen, OpCounter *ops,
                      const IterateObserver &observer)
{
    cfg.validate();
    const Layout L(cfg.dims);
    if (start.layout() != L)
        throw std::invalid_argument("run_rssca: start point does not match the configured dimensions");
    const StepSchedules sched = cfg.step_schedules();

    FeasibleSet set(L, cfg.power_limits());
    set.freeze_selection = frozen.selection;
    set.freeze_combiner = frozen.combiner;
    set.freeze_beamformers = frozen.beamformers;
    const CVector x0 = start.stack();
    if (!set.contains(x0, 1e-9))
        throw std::invalid_argument("run_rssca: start point is outside the relaxed feasible set");

    SurrogateState state = make_surrogate_state(L, cfg.targets(), RVector::Constant(L.users, cfg.tau),
                                                static_cast<std::size_t>(cfg.sample_capacity), cfg.rate_mode);
    state.free_mask = set.free_mask();
    if (cfg.power_metric != 1.0)
    {
        state.metric = RVector::Ones(L.size());
        state.metric.head(L.users).setConstant(cfg.power_metric);
    }

    DualOptions opts;
    opts.method = cfg.dual_method;
    opts.tolerance = cfg.dual_tolerance;

    RsscaResult out;
    out.trace.records.reserve(cfg.frames);
    CVector x = x0;
    DesignPoint xd = start;
    DualState warm_feas, warm_power;
    bool have_feas = false, have_power = false;

    for (long l = 0; l < cfg.frames; ++l)
    {
        const BeamspaceSample b = to_beamspace(model, stream.next());
        if (ops)
        {
            ops->rate_evaluations += cfg.rate_mode == RateAverageMode::all_samples ? l + 1 : 1;
            ++ops->gradient_evaluations;
            const double N = L.codewords, S = L.rf_chains, K = L.users;
            const double rate_flops = 8.0 * (N * S * K + S * S * K + S * K * K + N * N * S);
            ops->flops += rate_flops * (cfg.rate_mode == RateAverageMode::all_samples ? l + 1 : 1);
            ops->flops += 8.0 * K * (N * S * K + N * N * S + S * S * K + N * S * S);
        }
        update_surrogate(state, xd, b, model, sched.beta(l));
        const SurrogateSet sur = state.surrogates();

        TraceRecord rec;
        rec.iteration = l;
        rec.max_constraint = (state.targets - state.sample_avg_rates).maxCoeff();

        CVector xbar;
        try
        {
            const SubproblemSolution feas = solve_feasibility(sur, set, opts, have_feas ? &warm_feas : nullptr, ops);
            warm_feas = feas.dual;
            have_feas = true;
            rec.xi = feas.objective;
            rec.dual_iterations = feas.iterations;
            if (feas.objective <= -cfg.feasibility_margin)
            {
                const SubproblemSolution pw =
                    solve_subproblem(sur, set, opts, have_power ? &warm_power : nullptr, ops);
                warm_power = pw.dual;
                have_power = true;
                rec.dual_iterations += pw.iterations;
                xbar = pw.x;
            }
            else
            {
                rec.feasibility_mode = true;
                xbar = feas.x;
            }
        }
        catch (const std::exception &e)
        {
            throw std::runtime_error("RSSCA iteration " + std::to_string(l) + ": " + e.what());
        }

        x = smooth_update(x, xbar, sched.alpha(l));
        clean_iterate(x, L, set.p_max, x0, state.free_mask);
        if (!set.contains(x, 1e-6))
            throw std::logic_error("RSSCA iteration " + std::to_string(l) + ": iterate left the relaxed set");
        xd = DesignPoint::unstack(x, L);
        if (observer)
            observer(l, xd);

        rec.objective_mw = xd.powers.sum();
        rec.objective_dbm = mw_to_dbm(rec.objective_mw);
        out.trace.records.push_back(rec);
    }

    out.relaxed = xd;
    out.solution = xd;
    out.solution.selection = round_selection(xd.selection).matrix;
    return out;
}

} // namespace qmimo
