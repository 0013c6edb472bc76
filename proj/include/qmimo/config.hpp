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

#ifndef QMIMO_CONFIG_HPP
#define QMIMO_CONFIG_HPP

#include "qmimo/channel.hpp"
#include "qmimo/dual.hpp"
#include "qmimo/schedules.hpp"
#include "qmimo/surrogate.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace qmimo {

enum class Scheme
{
    shc,
    mm,
    random,
    zf,
    mrc
};

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string &name);

// Starting point of the iterations.
//   uniform:   p = P^max/2, c = 1/N in every column, V = I, W = identity columns.
//   magnitude: as uniform, but C starts from the magnitude-maximising selection.
//   statistical: user-centric selection, then beamformers and powers from
//                statistical_max_sinr on the burn-in samples. Schemes with a
//                fixed digital stage keep it and equalise the mean received power.
enum class InitPolicy
{
    uniform,
    magnitude,
    statistical
};

struct ExperimentConfig
{
    Dimensions dims;
    int bits = 3;
    double sigma2_dbm = -114.0;
    double p_max_dbm = 10.0;
    double gamma = 1.0;          // common per-user rate target, bps/Hz
    int frames = 150;            // L_f
    int eval_samples = 500;
    std::uint64_t seed = 1;
    int replications = 20;
    Scheme scheme = Scheme::shc;
    std::string schedule = "default";
    ChannelProcessConfig channel;
    double min_radius_m = 35.0;
    double cell_radius_m = 200.0;
    double tau = 30.0;
    double power_metric = 1e-3; // weight of the power block in the proximal term
    RateAverageMode rate_mode = RateAverageMode::all_samples;
    int sample_capacity = 300;
    int burn_in = 100;
    InitPolicy init = InitPolicy::statistical;
    DualMethod dual_method = DualMethod::newton;
    double dual_tolerance = 1e-10;
    double feasibility_margin = 1e-7; // solve the power problem only when xi <= -margin
    double feasibility_tolerance = 0.05;
    int slots = 10;          // L_s, slots per frame in the robustness experiment
    int realizations = 500;  // robustness experiment
    int threads = 1;

    double sigma2_mw() const { return dbm_to_mw(sigma2_dbm); }
    double p_max_mw() const { return dbm_to_mw(p_max_dbm); }
    RVector targets() const { return RVector::Constant(dims.users, gamma); }
    RVector power_limits() const { return RVector::Constant(dims.users, p_max_mw()); }
    StepSchedules step_schedules() const;

    // Throws std::invalid_argument naming the offending key.
    void validate() const;
};

// Canonical key/value view. Every key accepted by set_config_value appears here.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig &cfg);

// Assigns one key. Also accepts `sigma2` (linear, mW) as an alias of sigma2_dbm.
void set_config_value(ExperimentConfig &cfg, const std::string &key, const std::string &value);

// "key=value" form used by CLI overrides.
void apply_override(ExperimentConfig &cfg, const std::string &assignment);

// Lines of `key = value`; '#' starts a comment; blank lines ignored.
ExperimentConfig parse_config(std::istream &in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string &path, ExperimentConfig base = {});
void write_config(std::ostream &os, const ExperimentConfig &cfg);

// FNV-1a over the canonical entries, excluding seed, replications and threads.
std::string config_hash(const ExperimentConfig &cfg);

} // namespace qmimo

#endif
