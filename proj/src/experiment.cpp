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

#include "qmimo/experiment.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace qmimo {

Scenario make_scenario(const ExperimentConfig &cfg, std::uint64_t seed)
{
    Scenario sc;
    Rng geo = make_rng(seed, stream::geometry);
    sc.geometry = drop_users(geo, cfg.dims.users, cfg.min_radius_m, cfg.cell_radius_m);
    Rng scat = make_rng(seed, stream::scattering);
    sc.path_angles = draw_path_angles(scat, cfg.dims.users, cfg.channel);
    return sc;
}

ChannelStream open_stream(const ExperimentConfig &cfg, const Scenario &sc, std::uint64_t seed, std::uint64_t id)
{
    return ChannelStream(sc.geometry, cfg.dims.antennas, cfg.channel, sc.path_angles, seed, id);
}

int ExperimentResult::completed() const
{
    int n = 0;
    for (const auto &r : runs)
        n += r.completed;
    return n;
}

int ExperimentResult::feasible_count() const
{
    int n = 0;
    for (const auto &r : runs)
        n += r.completed && r.feasible;
    return n;
}

double ExperimentResult::mean_power_mw() const
{
    double acc = 0.0;
    int n = 0;
    for (const auto &r : runs)
        if (r.completed)
        {
            acc += r.power_mw;
            ++n;
        }
    return n ? acc / n : std::numeric_limits<double>::quiet_NaN();
}

double ExperimentResult::mean_power_dbm() const
{
    double acc = 0.0;
    int n = 0;
    for (const auto &r : runs)
        if (r.completed)
        {
            acc += r.power_dbm;
            ++n;
        }
    return n ? acc / n : std::numeric_limits<double>::quiet_NaN();
}

double ExperimentResult::mean_feasible_power_dbm() const
{
    double acc = 0.0;
    int n = 0;
    for (const auto &r : runs)
        if (r.completed && r.feasible)
        {
            acc += r.power_dbm;
            ++n;
        }
    return n ? acc / n : std::numeric_limits<double>::quiet_NaN();
}

SchemeSetup prepare_scheme(const ExperimentConfig &cfg, const SystemModel &model, const Scenario &sc,
                           std::uint64_t seed, Scheme scheme)
{
    const Layout L(cfg.dims);
    SchemeSetup out;
    out.start = initial_point(L, cfg.power_limits());
    out.frozen = SchemeSpec::of(scheme).frozen;

    const bool needs_burn_in = cfg.init != InitPolicy::uniform || scheme == Scheme::mm || scheme == Scheme::zf ||
                               scheme == Scheme::mrc;
    if (!needs_burn_in && scheme != Scheme::random)
        return out;
    std::vector<ChannelSample> burn;
    if (needs_burn_in)
    {
        ChannelStream bs = open_stream(cfg, sc, seed, stream::burn_in);
        burn = bs.take(static_cast<std::size_t>(cfg.burn_in));
    }
    const CMatrix &D = model.codebook.matrix;
    const int S = cfg.dims.rf_chains;

    // Selection the free blocks are started from.
    switch (cfg.init)
    {
    case InitPolicy::uniform: break;
    case InitPolicy::magnitude: out.start.selection = mm_select(D, burn, S).matrix; break;
    case InitPolicy::statistical: out.start.selection = user_centric_select(D, burn, S).matrix; break;
    }
    // Frozen selections of the beam-selection baselines.
    if (scheme == Scheme::mm)
        out.start.selection = mm_select(D, burn, S).matrix;
    if (scheme == Scheme::random)
    {
        Rng rng = make_rng(seed, stream::selection);
        out.start.selection = random_select(rng, cfg.dims.codewords, S).matrix;
    }
    // The fixed digital stage must match a concrete analog stage.
    if ((scheme == Scheme::zf || scheme == Scheme::mrc) && cfg.init == InitPolicy::uniform)
        out.start.selection = mm_select(D, burn, S).matrix;

    if (scheme == Scheme::zf || scheme == Scheme::mrc)
    {
        const CMatrix heff = statistical_effective_channel(model, out.start.selection, burn);
        const auto vw = scheme == Scheme::zf ? zf_combiner(heff) : mrc_combiner(heff);
        out.start.combiner = vw.first;
        out.start.beamformers = vw.second;
    }
    if (cfg.init != InitPolicy::statistical)
        return out;

    const std::vector<BeamspaceSample> beams = to_beamspace(model, burn);
    const double target = std::exp2(cfg.gamma) - 1.0;
    if (!out.frozen.combiner && !out.frozen.beamformers)
    {
        try
        {
            const StatisticalDesign sd =
                statistical_max_sinr(model, out.start.selection, beams, cfg.power_limits(), target);
            out.start.powers = sd.powers;
            out.start.combiner = sd.combiner;
            out.start.beamformers = sd.beamformers;
            return out;
        }
        catch (const std::runtime_error &)
        {
            // A user without energy on the selection: fall back to the matched filter.
            const auto vw = mrc_combiner(statistical_effective_channel(model, out.start.selection, beams));
            out.start.combiner = vw.first;
            out.start.beamformers = vw.second;
        }
    }
    // Fixed digital stage: equalise the mean received power, weakest user at P^max.
    RVector gain = RVector::Zero(cfg.dims.users);
    for (const auto &h : burn)
        gain += h.matrix.colwise().squaredNorm().transpose();
    const double weakest = gain.minCoeff();
    if (weakest > 0.0)
        for (int k = 0; k < cfg.dims.users; ++k)
            out.start.powers(k) = cfg.p_max_mw() * weakest / gain(k);
    return out;
}

SeedRecord run_single(const ExperimentConfig &cfg, std::uint64_t seed, Scheme scheme, OpCounter *ops,
                      const DesignPoint *warm_start)
{
    SeedRecord rec;
    rec.seed = seed;
    rec.scheme = scheme;
    try
    {
        cfg.validate();
        const SystemModel model(cfg.dims, cfg.bits, cfg.sigma2_mw());
        const Scenario sc = make_scenario(cfg, seed);
        SchemeSetup setup = prepare_scheme(cfg, model, sc, seed, scheme);
        if (warm_start)
        {
            if (!(warm_start->layout() == setup.start.layout()))
                throw std::invalid_argument("warm start does not match the configured dimensions");
            setup.start.powers = warm_start->powers;
            if (!setup.frozen.selection)
                setup.start.selection = warm_start->selection;
            if (!setup.frozen.combiner)
                setup.start.combiner = warm_start->combiner;
            if (!setup.frozen.beamformers)
                setup.start.beamformers = warm_start->beamformers;
        }
        ChannelStream train = open_stream(cfg, sc, seed, stream::training);
        OpCounter local;
        RsscaResult res = run_rssca(cfg, model, train, setup.start, setup.frozen, &local);
        if (ops)
            *ops += local;
        rec.ops = local;

        ChannelStream eval = open_stream(cfg, sc, seed, stream::evaluation);
        if (eval.stream_id() == train.stream_id())
            throw std::logic_error("evaluation and training streams coincide");
        const std::vector<ChannelSample> held_out = eval.take(static_cast<std::size_t>(cfg.eval_samples));
        const std::vector<BeamspaceSample> hb = to_beamspace(model, held_out);
        rec.rates = average_rates(res.solution, hb, model);
        rec.power_mw = res.solution.powers.sum();
        rec.power_dbm = mw_to_dbm(rec.power_mw);
        rec.feasible = (rec.rates.array() >= cfg.gamma - cfg.feasibility_tolerance).all();
        rec.trace = std::move(res.trace);
        rec.solution = std::move(res.solution);
        rec.completed = true;
    }
    catch (const std::exception &e)
    {
        rec.completed = false;
        rec.error = "seed " + std::to_string(seed) + ": " + e.what();
    }
    return rec;
}

void run_jobs(int count, int threads, const std::function<void(int)> &job)
{
    if (count <= 0)
        return;
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1)
    {
        for (int i = 0; i < count; ++i)
            job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++)
                job(i);
        });
    for (auto &th : pool)
        th.join();
}

ExperimentResult run_convergence(const ExperimentConfig &cfg)
{
    cfg.validate();
    ExperimentResult out;
    out.config = cfg;
    out.config_hash = config_hash(cfg);
    out.runs.resize(cfg.replications);
    run_jobs(cfg.replications, cfg.threads,
             [&](int r) { out.runs[r] = run_single(cfg, cfg.seed + static_cast<std::uint64_t>(r), cfg.scheme); });
    return out;
}

SweepAxis parse_axis(const std::string &name)
{
    if (name == "users")
        return SweepAxis::users;
    if (name == "antennas")
        return SweepAxis::antennas;
    if (name == "bits")
        return SweepAxis::bits;
    throw std::invalid_argument("unknown sweep axis '" + name + "' (expected users, antennas or bits)");
}

std::string to_string(SweepAxis a)
{
    switch (a)
    {
    case SweepAxis::users: return "users";
    case SweepAxis::antennas: return "antennas";
    case SweepAxis::bits: return "bits";
    }
    return "?";
}

void set_axis(ExperimentConfig &cfg, SweepAxis axis, int value)
{
    switch (axis)
    {
    case SweepAxis::users: cfg.dims.users = value; break;
    case SweepAxis::antennas: cfg.dims.antennas = value; break;
    case SweepAxis::bits: cfg.bits = value; break;
    }
}

std::vector<SweepPoint> sweep(const ExperimentConfig &cfg, SweepAxis axis, const std::vector<int> &values,
                              const std::vector<Scheme> &schemes)
{
    if (values.empty() || schemes.empty())
        throw std::invalid_argument("sweep: need at least one axis value and one scheme");
    std::vector<SweepPoint> points;
    for (int v : values)
        for (Scheme s : schemes)
        {
            SweepPoint p;
            p.axis = axis;
            p.value = v;
            p.scheme = s;
            p.result.config = cfg;
            set_axis(p.result.config, axis, v);
            p.result.config.scheme = s;
            p.result.config.validate();
            p.result.config_hash = config_hash(p.result.config);
            p.result.runs.resize(cfg.replications);
            points.push_back(std::move(p));
        }
    const int R = cfg.replications;
    run_jobs(static_cast<int>(points.size()) * R, cfg.threads, [&](int j) {
        SweepPoint &p = points[j / R];
        const int r = j % R;
        p.result.runs[r] = run_single(p.result.config, cfg.seed + static_cast<std::uint64_t>(r), p.scheme);
    });
    return points;
}

DesignPoint icsi_design(const SystemModel &model, const ChannelSample &csi, const RVector &targets,
                        const RVector &p_max)
{
    const int K = csi.users();
    const int S = model.dims.rf_chains;
    const std::span<const ChannelSample> one(&csi, 1);
    const RMatrix sel = mm_select(model.codebook.matrix, one, S).matrix;
    const BeamspaceSample b = to_beamspace(model, csi);
    const CMatrix heff = model.gain() * (sel.transpose().cast<cplx>() * b.beams);

    DesignPoint x;
    x.selection = sel;
    x.combiner = CMatrix::Identity(S, S);
    // Pseudo-inverse so that an ill-conditioned snapshot still yields a combiner.
    const CMatrix pinv = heff.completeOrthogonalDecomposition().pseudoInverse();
    x.beamformers = pinv.adjoint();
    for (int k = 0; k < K; ++k)
        if (x.beamformers.col(k).norm() == 0.0)
            x.beamformers(k % S, k) = 1.0;

    // Channel inversion on the snapshot: p_k = theta_k (interference + noise) / gain_k,
    // iterated because the quantization noise depends on every user's power.
    const RVector theta = (targets.array() * std::log(2.0)).exp() - 1.0;
    x.powers = p_max / 2.0;
    for (int it = 0; it < 200; ++it)
    {
        const RateTerms t = rate_terms(x, b, model);
        RVector next(K);
        for (int k = 0; k < K; ++k)
        {
            const double unit_gain = x.powers(k) > 0.0 ? t.signal(k) / x.powers(k) : 0.0;
            const double rest = t.interference(k) + t.noise(k) + t.quantization(k);
            next(k) = unit_gain > 0.0 ? std::clamp(theta(k) * rest / unit_gain, 0.0, p_max(k)) : p_max(k);
        }
        const double change = (next - x.powers).lpNorm<Eigen::Infinity>();
        x.powers = next;
        if (change <= 1e-12 * std::max(1.0, p_max.maxCoeff()))
            break;
        if ((x.powers.array() <= 0.0).any())
            x.powers = x.powers.cwiseMax(1e-12);
    }
    return x;
}

FeasibilityResult feasibility_experiment(const ExperimentConfig &cfg, bool delayed, int min_realizations)
{
    cfg.validate();
    if (cfg.realizations < min_realizations)
        throw std::invalid_argument("feasibility_experiment: need at least " + std::to_string(min_realizations) +
                                    " realizations, got " + std::to_string(cfg.realizations));
    const int drops = std::min(cfg.replications, cfg.realizations);
    const SystemModel model(cfg.dims, cfg.bits, cfg.sigma2_mw());
    const RVector targets = cfg.targets();
    const RVector pmax = cfg.power_limits();
    const double threshold = cfg.gamma - cfg.feasibility_tolerance;

    std::vector<int> shc_ok(drops, 0), icsi_ok(drops, 0);
    run_jobs(drops, cfg.threads, [&](int d) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(d);
        const int count = cfg.realizations / drops + (d < cfg.realizations % drops ? 1 : 0);
        const Scenario sc = make_scenario(cfg, seed);

        bool trained = false;
        DesignPoint shc;
        try
        {
            const SchemeSetup setup = prepare_scheme(cfg, model, sc, seed, Scheme::shc);
            ChannelStream train = open_stream(cfg, sc, seed, stream::training);
            shc = run_rssca(cfg, model, train, setup.start, setup.frozen).solution;
            trained = true;
        }
        catch (const std::exception &)
        {
            trained = false;
        }

        ChannelStream traj = open_stream(cfg, sc, seed, stream::delayed);
        for (int r = 0; r < count; ++r)
        {
            ChannelSample prev = traj.next();
            RVector shc_acc = RVector::Zero(cfg.dims.users);
            RVector icsi_acc = RVector::Zero(cfg.dims.users);
            for (int t = 0; t < cfg.slots; ++t)
            {
                ChannelSample cur = traj.evolve(prev);
                const BeamspaceSample b = to_beamspace(model, cur);
                if (trained)
                    shc_acc += instantaneous_rates(shc, b, model);
                const DesignPoint ic = icsi_design(model, delayed ? prev : cur, targets, pmax);
                icsi_acc += instantaneous_rates(ic, b, model);
                prev = std::move(cur);
            }
            shc_acc /= cfg.slots;
            icsi_acc /= cfg.slots;
            if (trained && (shc_acc.array() >= threshold).all())
                ++shc_ok[d];
            if ((icsi_acc.array() >= threshold).all())
                ++icsi_ok[d];
        }
    });

    FeasibilityResult out;
    out.realizations = cfg.realizations;
    out.drops = drops;
    out.delayed = delayed;
    for (int d = 0; d < drops; ++d)
    {
        out.shc_feasible += shc_ok[d];
        out.contender_feasible += icsi_ok[d];
    }
    return out;
}

PilotOverhead pilot_overhead_report(long Lc, long Lf, long Ls, long M, long K)
{
    if (Lc <= 0 || Lf <= 0 || Ls <= 0 || M <= 0 || K <= 0)
        throw std::invalid_argument("pilot_overhead_report: all arguments must be positive");
    PilotOverhead p;
    p.shc = static_cast<double>(K) * M * Lc;
    p.icsi = static_cast<double>(K) * M * Lf * Ls;
    p.ratio = static_cast<double>(Lc) / (static_cast<double>(Lf) * Ls);
    return p;
}

long convergence_frame(const SolveTrace &trace, double rel)
{
    const auto &r = trace.records;
    if (r.empty())
        return 0;
    const double final_value = r.back().objective_mw;
    long first = static_cast<long>(r.size()) - 1;
    for (long i = static_cast<long>(r.size()) - 1; i >= 0; --i)
    {
        if (std::abs(r[i].objective_mw - final_value) > rel * std::abs(final_value))
            break;
        first = i;
    }
    return first + 1;
}

std::string symbolic_complexity(Scheme s)
{
    switch (s)
    {
    case Scheme::shc: return "O((N^3 S^3 + N^2 S^4 + N S^4 + S^2 K^2) log(1/eps) + S^2 K + S(N K + K^2))";
    case Scheme::mm: return "O((4 S^2 K^2 + 4 S K^3) log(1/eps) + S^2 K + S K^2)";
    case Scheme::random: return "O((4 S^2 K^2 + 4 S K^3) log(1/eps) + S^2 K + S K^2) (as MM)";
    case Scheme::zf: return "O((N^3 S^3 + N^2 S^3 K + N S^3 + S^2 K^2) log(1/eps) + S(K^2 + N K) + K^3)";
    case Scheme::mrc: return "O((N^3 S^3 + N^2 S^3 K + N S^3 + S^2 K^2) log(1/eps) + S(K^2 + M K + N K))";
    }
    return "";
}

std::vector<OpCountRow> op_count_report(const ExperimentConfig &cfg, const std::vector<Scheme> &schemes)
{
    std::vector<OpCountRow> rows;
    for (Scheme s : schemes)
    {
        OpCountRow row;
        row.scheme = s;
        const SeedRecord rec = run_single(cfg, cfg.seed, s, &row.total);
        if (!rec.completed)
            throw std::runtime_error("op_count_report: " + rec.error);
        row.iterations = static_cast<long>(rec.trace.records.size());
        row.flops_per_iteration = row.iterations ? row.total.flops / row.iterations : 0.0;
        row.symbolic_order = symbolic_complexity(s);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace qmimo
