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

// Command-line front end: converge, sweep, feasibility and opcount runs with
// CSV, JSON and gnuplot output.

#include "qmimo/config.hpp"
#include "qmimo/experiment.hpp"
#include "qmimo/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace qmimo;

namespace {

struct Common
{
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string scheme;
    std::string out = ".";
};

ExperimentConfig build_config(const Common &c)
{
    ExperimentConfig cfg;
    if (!c.config_path.empty())
        cfg = load_config(c.config_path, cfg);
    for (const auto &kv : c.overrides)
        apply_override(cfg, kv);
    if (c.seed_set)
        cfg.seed = c.seed;
    if (!c.scheme.empty())
        cfg.scheme = parse_scheme(c.scheme);
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const fs::path &p)
{
    std::ofstream os(p);
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
    return os;
}

void write_json(const fs::path &p, const nlohmann::json &j)
{
    auto os = open_out(p);
    os << j.dump(2) << '\n';
}

void report_failures(const ExperimentResult &r)
{
    for (const auto &run : r.runs)
        if (!run.completed)
            std::cerr << "warning: " << run.error << '\n';
}

int cmd_converge(const Common &c, const std::string &warm_path, int dump_frames)
{
    const ExperimentConfig cfg = build_config(c);
    const fs::path out(c.out);
    fs::create_directories(out);

    if (dump_frames > 0)
    {
        const Scenario sc = make_scenario(cfg, cfg.seed);
        ChannelStream s = open_stream(cfg, sc, cfg.seed, stream::training);
        auto os = open_out(out / "channel.csv");
        write_channel_csv(os, s.take(static_cast<std::size_t>(dump_frames)));
    }

    ExperimentResult result;
    if (warm_path.empty())
        result = run_convergence(cfg);
    else
    {
        const DesignPoint warm = load_design_point(warm_path);
        result.config = cfg;
        result.config_hash = config_hash(cfg);
        result.runs.resize(static_cast<std::size_t>(cfg.replications));
        run_jobs(cfg.replications, cfg.threads, [&](int i) {
            result.runs[i] = run_single(cfg, cfg.seed + static_cast<std::uint64_t>(i), cfg.scheme, nullptr, &warm);
        });
    }
    report_failures(result);

    {
        auto os = open_out(out / "trace.csv");
        bool header = true;
        for (const auto &run : result.runs)
            if (run.completed)
            {
                write_trace_csv(os, run.trace, run.seed, result.config_hash, header);
                header = false;
            }
    }
    {
        auto os = open_out(out / "trace.gp");
        write_trace_plot(os, "trace.csv");
    }
    nlohmann::json j = to_json(result);
    for (const auto &run : result.runs)
        if (run.completed)
        {
            const long lc = std::max(1L, convergence_frame(run.trace));
            j["pilot_overhead"] = to_json(pilot_overhead_report(lc, cfg.frames, cfg.slots, cfg.dims.antennas,
                                                                cfg.dims.users));
            write_json(out / "design.json", to_json(run.solution));
            break;
        }
    write_json(out / "result.json", j);

    std::cout << "scheme " << to_string(cfg.scheme) << "  completed " << result.completed() << '/'
              << result.runs.size() << "  feasible " << result.feasible_count() << "  mean power "
              << result.mean_power_dbm() << " dBm\n";
    return result.completed() > 0 ? 0 : 1;
}

std::vector<int> parse_values(const std::vector<std::string> &items)
{
    std::vector<int> out;
    for (const auto &item : items)
    {
        std::stringstream ss(item);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                out.push_back(std::stoi(tok));
    }
    if (out.empty())
        throw std::invalid_argument("sweep: no axis values");
    return out;
}

int cmd_sweep(const Common &c, const std::string &axis_name, const std::vector<std::string> &value_items,
              const std::vector<std::string> &scheme_names)
{
    const ExperimentConfig cfg = build_config(c);
    const SweepAxis axis = parse_axis(axis_name);
    const std::vector<int> values = parse_values(value_items);
    std::vector<Scheme> schemes;
    if (scheme_names.empty() && c.scheme.empty())
        schemes = {Scheme::shc, Scheme::mm, Scheme::random, Scheme::zf, Scheme::mrc};
    else if (scheme_names.empty())
        schemes = {cfg.scheme};
    for (const auto &n : scheme_names)
        schemes.push_back(parse_scheme(n));

    const std::vector<SweepPoint> points = sweep(cfg, axis, values, schemes);
    const fs::path out(c.out);
    fs::create_directories(out);
    {
        auto os = open_out(out / "sweep.csv");
        write_sweep_csv(os, points);
    }
    {
        auto os = open_out(out / "sweep.gp");
        write_sweep_plot(os, "sweep.csv", to_string(axis));
    }
    nlohmann::json j = {{"axis", to_string(axis)}, {"points", nlohmann::json::array()}};
    for (const auto &p : points)
    {
        report_failures(p.result);
        nlohmann::json e = to_json(p.result);
        e["axis_value"] = p.value;
        e["scheme"] = to_string(p.scheme);
        j["points"].push_back(std::move(e));
        std::cout << to_string(axis) << '=' << p.value << "  " << to_string(p.scheme) << "  feasible "
                  << p.result.feasible_count() << '/' << p.result.runs.size() << "  mean feasible power "
                  << p.result.mean_feasible_power_dbm() << " dBm\n";
    }
    write_json(out / "result.json", j);
    return 0;
}

int cmd_feasibility(const Common &c, bool delayed)
{
    const ExperimentConfig cfg = build_config(c);
    const FeasibilityResult r = feasibility_experiment(cfg, delayed);
    const fs::path out(c.out);
    fs::create_directories(out);
    nlohmann::json j = to_json(r);
    j["config"] = to_json(cfg);
    j["config_hash"] = config_hash(cfg);
    write_json(out / "result.json", j);
    std::cout << "realizations " << r.realizations << "  shc " << r.shc_probability() << "  contender "
              << r.contender_probability() << (delayed ? " (delayed csi)\n" : " (current csi)\n");
    return 0;
}

int cmd_opcount(const Common &c)
{
    const ExperimentConfig cfg = build_config(c);
    std::vector<Scheme> schemes = {Scheme::shc, Scheme::mm, Scheme::random, Scheme::zf, Scheme::mrc};
    if (!c.scheme.empty())
        schemes = {cfg.scheme};
    const std::vector<OpCountRow> rows = op_count_report(cfg, schemes);
    const fs::path out(c.out);
    fs::create_directories(out);
    write_json(out / "result.json", {{"config", to_json(cfg)}, {"config_hash", config_hash(cfg)}, {"rows", to_json(rows)}});
    for (const auto &r : rows)
        std::cout << to_string(r.scheme) << "  iterations " << r.iterations << "  flops/iter "
                  << r.flops_per_iteration << "  dual iters " << r.total.dual_iterations << "  order "
                  << r.symbolic_order << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"qmimo: stochastic hybrid combining experiments"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--set", common.overrides, "override a config key (key=value), repeatable");
    app.add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t &s) { common.seed = s, common.seed_set = true; }, "base seed");
    app.add_option("--scheme", common.scheme, "shc | mm | random | zf | mrc");
    app.add_option("--out", common.out, "output directory");

    auto *converge = app.add_subcommand("converge", "run the solver over the configured seeds and write traces");
    std::string warm_path;
    int dump_frames = 0;
    converge->add_option("--warm-start", warm_path, "design point JSON to start from")->check(CLI::ExistingFile);
    converge->add_option("--dump-channel", dump_frames, "write the first n training channel samples to channel.csv");

    auto *sw = app.add_subcommand("sweep", "power versus users, antennas or bits for several schemes");
    std::string axis;
    std::vector<std::string> values, sweep_schemes;
    sw->add_option("--axis", axis, "users | antennas | bits")->required();
    sw->add_option("--values", values, "axis values, space or comma separated")->required();
    sw->add_option("--schemes", sweep_schemes, "schemes to run (default: all, or --scheme)");

    auto *feas = app.add_subcommand("feasibility", "feasible probability against the per-slot contender");
    bool delayed = false;
    feas->add_flag("--delayed", delayed, "contender uses the previous slot's channel");

    auto *opc = app.add_subcommand("opcount", "per-scheme operation counts");

    CLI11_PARSE(app, argc, argv);
    try
    {
        if (*converge)
            return cmd_converge(common, warm_path, dump_frames);
        if (*sw)
            return cmd_sweep(common, axis, values, sweep_schemes);
        if (*feas)
            return cmd_feasibility(common, delayed);
        if (*opc)
            return cmd_opcount(common);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
