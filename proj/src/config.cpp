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

#include "qmimo/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qmimo {

std::string to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::shc: return "shc";
    case Scheme::mm: return "mm";
    case Scheme::random: return "random";
    case Scheme::zf: return "zf";
    case Scheme::mrc: return "mrc";
    }
    return "?";
}

Scheme parse_scheme(const std::string &name)
{
    static const std::map<std::string, Scheme> names = {
        {"shc", Scheme::shc}, {"mm", Scheme::mm}, {"random", Scheme::random}, {"zf", Scheme::zf}, {"mrc", Scheme::mrc}};
    auto it = names.find(name);
    if (it == names.end())
        throw std::invalid_argument("unknown scheme '" + name + "' (expected shc, mm, random, zf or mrc)");
    return it->second;
}

StepSchedules ExperimentConfig::step_schedules() const
{
    if (schedule == "default")
        return default_schedules();
    throw std::invalid_argument("unknown schedule '" + schedule + "'");
}

void ExperimentConfig::validate() const
{
    auto fail = [](const std::string &m) { throw std::invalid_argument("config: " + m); };
    dims.validate();
    channel.validate();
    if (bits < 1)
        fail("q must be at least 1");
    if (frames < 1)
        fail("L_f must be at least 1");
    if (eval_samples < 100)
        fail("eval_samples must be at least 100");
    if (replications < 1)
        fail("replications must be at least 1");
    if (!(tau > 0.0))
        fail("tau must be positive");
    if (!(power_metric > 0.0) || !std::isfinite(power_metric))
        fail("power_metric must be positive");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        fail("gamma must be finite and nonnegative");
    if (!std::isfinite(sigma2_dbm) || !std::isfinite(p_max_dbm))
        fail("sigma2_dbm and p_max_dbm must be finite");
    if (rate_mode == RateAverageMode::all_samples && sample_capacity < frames)
        fail("sample_capacity must hold L_f samples in the all-samples mode");
    if (burn_in < 1)
        fail("burn_in must be at least 1");
    if (!(min_radius_m > 0.0 && cell_radius_m > min_radius_m))
        fail("need 0 < min_radius_m < cell_radius_m");
    if (!(dual_tolerance > 0.0))
        fail("dual_tolerance must be positive");
    if (!(feasibility_margin >= 0.0))
        fail("feasibility_margin must be nonnegative");
    if (!(feasibility_tolerance >= 0.0))
        fail("feasibility_tolerance must be nonnegative");
    if (slots < 1 || realizations < 1)
        fail("slots and realizations must be positive");
    if (threads < 1)
        fail("threads must be positive");
    step_schedules();
}

namespace {

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &v)
{
    std::size_t pos = 0;
    double out = 0.0;
    try
    {
        out = std::stod(v, &pos);
    }
    catch (const std::exception &)
    {
        pos = 0;
    }
    if (pos == 0 || pos != v.size())
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string &key, const std::string &v)
{
    std::size_t pos = 0;
    long long out = 0;
    try
    {
        out = std::stoll(v, &pos);
    }
    catch (const std::exception &)
    {
        pos = 0;
    }
    if (pos == 0 || pos != v.size())
        throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

struct Field
{
    std::function<std::string(const ExperimentConfig &)> get;
    std::function<void(ExperimentConfig &, const std::string &, const std::string &)> set;
};

#define QMIMO_INT_FIELD(name, member)                                                                                \
    {                                                                                                                \
        name, Field                                                                                                  \
        {                                                                                                            \
            [](const ExperimentConfig &c) { return std::to_string(c.member); },                                      \
                [](ExperimentConfig &c, const std::string &k, const std::string &v) {                                \
                    c.member = static_cast<decltype(c.member)>(to_int(k, v));                                        \
                }                                                                                                    \
        }                                                                                                            \
    }
#define QMIMO_REAL_FIELD(name, member)                                                                               \
    {                                                                                                                \
        name, Field                                                                                                  \
        {                                                                                                            \
            [](const ExperimentConfig &c) { return fmt(c.member); },                                                 \
                [](ExperimentConfig &c, const std::string &k, const std::string &v) { c.member = to_double(k, v); }  \
        }                                                                                                            \
    }

const std::vector<std::pair<std::string, Field>> &fields()
{
    static const std::vector<std::pair<std::string, Field>> table = {
        QMIMO_INT_FIELD("M", dims.antennas),
        QMIMO_INT_FIELD("S", dims.rf_chains),
        QMIMO_INT_FIELD("N", dims.codewords),
        QMIMO_INT_FIELD("K", dims.users),
        QMIMO_INT_FIELD("q", bits),
        QMIMO_REAL_FIELD("sigma2_dbm", sigma2_dbm),
        QMIMO_REAL_FIELD("p_max_dbm", p_max_dbm),
        QMIMO_REAL_FIELD("gamma", gamma),
        QMIMO_INT_FIELD("L_f", frames),
        QMIMO_INT_FIELD("eval_samples", eval_samples),
        QMIMO_INT_FIELD("seed", seed),
        QMIMO_INT_FIELD("replications", replications),
        {"scheme", Field{[](const ExperimentConfig &c) { return to_string(c.scheme); },
                         [](ExperimentConfig &c, const std::string &, const std::string &v) {
                             c.scheme = parse_scheme(v);
                         }}},
        {"schedule", Field{[](const ExperimentConfig &c) { return c.schedule; },
                           [](ExperimentConfig &c, const std::string &, const std::string &v) { c.schedule = v; }}},
        QMIMO_INT_FIELD("path_count", channel.path_count),
        QMIMO_REAL_FIELD("ar_coefficient", channel.ar_coefficient),
        QMIMO_REAL_FIELD("pathloss_offset_db", channel.pathloss_offset_db),
        QMIMO_REAL_FIELD("pathloss_slope", channel.pathloss_slope),
        {"angle_model", Field{[](const ExperimentConfig &c) {
                                  return std::string(c.channel.angle_model == AngleModel::per_draw ? "per_draw"
                                                                                                   : "per_drop");
                              },
                              [](ExperimentConfig &c, const std::string &k, const std::string &v) {
                                  if (v == "per_draw")
                                      c.channel.angle_model = AngleModel::per_draw;
                                  else if (v == "per_drop")
                                      c.channel.angle_model = AngleModel::per_drop;
                                  else
                                      throw std::invalid_argument("config: '" + k + "' expects per_draw or per_drop");
                              }}},
        QMIMO_REAL_FIELD("min_radius_m", min_radius_m),
        QMIMO_REAL_FIELD("cell_radius_m", cell_radius_m),
        QMIMO_REAL_FIELD("tau", tau),
        QMIMO_REAL_FIELD("power_metric", power_metric),
        {"rate_average", Field{[](const ExperimentConfig &c) {
                                   return std::string(c.rate_mode == RateAverageMode::all_samples ? "all_samples"
                                                                                                  : "recursive");
                               },
                               [](ExperimentConfig &c, const std::string &k, const std::string &v) {
                                   if (v == "all_samples")
                                       c.rate_mode = RateAverageMode::all_samples;
                                   else if (v == "recursive")
                                       c.rate_mode = RateAverageMode::recursive;
                                   else
                                       throw std::invalid_argument("config: '" + k +
                                                                   "' expects all_samples or recursive");
                               }}},
        QMIMO_INT_FIELD("sample_capacity", sample_capacity),
        QMIMO_INT_FIELD("burn_in", burn_in),
        {"init", Field{[](const ExperimentConfig &c) {
                           switch (c.init)
                           {
                           case InitPolicy::uniform: return std::string("uniform");
                           case InitPolicy::magnitude: return std::string("magnitude");
                           case InitPolicy::statistical: break;
                           }
                           return std::string("statistical");
                       },
                       [](ExperimentConfig &c, const std::string &k, const std::string &v) {
                           if (v == "uniform")
                               c.init = InitPolicy::uniform;
                           else if (v == "magnitude")
                               c.init = InitPolicy::magnitude;
                           else if (v == "statistical")
                               c.init = InitPolicy::statistical;
                           else
                               throw std::invalid_argument("config: '" + k +
                                                           "' expects uniform, magnitude or statistical");
                       }}},
        {"dual_method", Field{[](const ExperimentConfig &c) {
                                  return std::string(c.dual_method == DualMethod::newton ? "newton" : "subgradient");
                              },
                              [](ExperimentConfig &c, const std::string &k, const std::string &v) {
                                  if (v == "newton")
                                      c.dual_method = DualMethod::newton;
                                  else if (v == "subgradient")
                                      c.dual_method = DualMethod::projected_subgradient;
                                  else
                                      throw std::invalid_argument("config: '" + k + "' expects newton or subgradient");
                              }}},
        QMIMO_REAL_FIELD("dual_tolerance", dual_tolerance),
        QMIMO_REAL_FIELD("feasibility_margin", feasibility_margin),
        QMIMO_REAL_FIELD("feasibility_tolerance", feasibility_tolerance),
        QMIMO_INT_FIELD("L_s", slots),
        QMIMO_INT_FIELD("realizations", realizations),
        QMIMO_INT_FIELD("threads", threads),
    };
    return table;
}

#undef QMIMO_INT_FIELD
#undef QMIMO_REAL_FIELD

} // namespace

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig &cfg)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto &[name, f] : fields())
        out.emplace_back(name, f.get(cfg));
    return out;
}

void set_config_value(ExperimentConfig &cfg, const std::string &key, const std::string &value)
{
    const std::string v = trim(value);
    if (key == "sigma2")
    {
        const double lin = to_double(key, v);
        if (!(lin > 0.0))
            throw std::invalid_argument("config: 'sigma2' must be positive");
        cfg.sigma2_dbm = mw_to_dbm(lin);
        return;
    }
    for (const auto &[name, f] : fields())
        if (name == key)
        {
            f.set(cfg, key, v);
            return;
        }
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

void apply_override(ExperimentConfig &cfg, const std::string &assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("config: override '" + assignment + "' is not of the form key=value");
    set_config_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(std::istream &in, ExperimentConfig base)
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::string &path, ExperimentConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_config(in, std::move(base));
}

void write_config(std::ostream &os, const ExperimentConfig &cfg)
{
    for (const auto &[k, v] : config_entries(cfg))
        os << k << " = " << v << '\n';
}

std::string config_hash(const ExperimentConfig &cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const std::string &s) {
        for (unsigned char ch : s)
        {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto &[k, v] : config_entries(cfg))
    {
        if (k == "seed" || k == "replications" || k == "threads")
            continue;
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace qmimo
