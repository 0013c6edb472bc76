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

#ifndef QMIMO_EXPERIMENT_HPP
#define QMIMO_EXPERIMENT_HPP

#include "qmimo/baselines.hpp"
#include "qmimo/config.hpp"
#include "qmimo/rssca.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qmimo {

// One user drop: distances and per-user path angles, a pure function of the seed.
struct Scenario
{
    UserGeometry geometry;
    RMatrix path_angles;
};

Scenario make_scenario(const ExperimentConfig &cfg, std::uint64_t seed);

// Channel streams of a scenario. Training, evaluation, burn-in and the
// robustness trajectories use distinct stream ids.
ChannelStream open_stream(const ExperimentConfig &cfg, const Scenario &sc, std::uint64_t seed, std::uint64_t id);

struct SeedRecord
{
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::shc;
    bool completed = false;
    std::string error;
    double power_mw = 0.0;
    double power_dbm = 0.0;
    RVector rates;          // held-out average rate per user
    bool feasible = false;  // every held-out rate >= gamma - tolerance
    SolveTrace trace;
    DesignPoint solution;
    OpCounter ops;
};

struct ExperimentResult
{
    ExperimentConfig config;
    std::string config_hash;
    std::vector<SeedRecord> runs;

    int completed() const;
    int feasible_count() const;
    double mean_power_mw() const;          // completed runs
    double mean_power_dbm() const;         // mean of per-run dBm, completed runs
    double mean_feasible_power_dbm() const; // NaN when no run is feasible
};

// Trains one scheme on one drop and evaluates it on cfg.eval_samples held-out frames.
// Solver failures are caught and recorded in the returned record. A non-null
// `warm_start` replaces the free blocks of the scheme's starting point.
SeedRecord run_single(const ExperimentConfig &cfg, std::uint64_t seed, Scheme scheme, OpCounter *ops = nullptr,
                      const DesignPoint *warm_start = nullptr);

// Starting point and frozen blocks for a scheme on a scenario (burn-in included).
struct SchemeSetup
{
    DesignPoint start;
    FrozenBlocks frozen;
};
SchemeSetup prepare_scheme(const ExperimentConfig &cfg, const SystemModel &model, const Scenario &sc,
                           std::uint64_t seed, Scheme scheme);

// Runs `count` independent jobs on `threads` workers; job i writes only slot i.
void run_jobs(int count, int threads, const std::function<void(int)> &job);

// cfg.replications seeds starting at cfg.seed, scheme cfg.scheme.
ExperimentResult run_convergence(const ExperimentConfig &cfg);

enum class SweepAxis
{
    users,
    antennas,
    bits
};
SweepAxis parse_axis(const std::string &name);
std::string to_string(SweepAxis a);
void set_axis(ExperimentConfig &cfg, SweepAxis axis, int value);

struct SweepPoint
{
    SweepAxis axis = SweepAxis::users;
    int value = 0;
    Scheme scheme = Scheme::shc;
    ExperimentResult result;
};

// Every scheme at every axis value with common seeds. Invalid axis values throw
// before any run starts; individual run failures are recorded and skipped.
std::vector<SweepPoint> sweep(const ExperimentConfig &cfg, SweepAxis axis, const std::vector<int> &values,
                              const std::vector<Scheme> &schemes);

struct FeasibilityResult
{
    int realizations = 0;
    int drops = 0;
    int shc_feasible = 0;
    int contender_feasible = 0;
    bool delayed = true;
    double shc_probability() const { return realizations ? double(shc_feasible) / realizations : 0.0; }
    double contender_probability() const { return realizations ? double(contender_feasible) / realizations : 0.0; }
};

// Per-slot contender: magnitude selection, zero forcing and channel-inversion power
// control computed from `csi`.
DesignPoint icsi_design(const SystemModel &model, const ChannelSample &csi, const RVector &targets,
                        const RVector &p_max);

// Each realization is an AR(1) trajectory of cfg.slots slots. The SHC design is
// trained once per drop and held fixed; the contender is redesigned every slot
// from the previous slot's channel (delayed) or the current one (not delayed).
// A realization counts as feasible for a scheme when every user's slot-averaged
// rate is at least gamma - tolerance. Throws if cfg.realizations < 500 unless
// `min_realizations` is lowered.
FeasibilityResult feasibility_experiment(const ExperimentConfig &cfg, bool delayed, int min_realizations = 500);

struct PilotOverhead
{
    double shc = 0.0;  // K M L_c
    double icsi = 0.0; // K M L_f L_s
    double ratio = 0.0;
};
PilotOverhead pilot_overhead_report(long Lc, long Lf, long Ls, long M, long K);

// First iteration after which the objective stays within `rel` of its final value.
long convergence_frame(const SolveTrace &trace, double rel = 0.02);

struct OpCountRow
{
    Scheme scheme = Scheme::shc;
    long iterations = 0;
    OpCounter total;
    double flops_per_iteration = 0.0;
    std::string symbolic_order;
};

// One instrumented run per scheme on seed cfg.seed.
std::vector<OpCountRow> op_count_report(const ExperimentConfig &cfg, const std::vector<Scheme> &schemes);
std::string symbolic_complexity(Scheme s);

} // namespace qmimo

#endif
