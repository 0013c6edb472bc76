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

#include "qmimo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace qmimo {

namespace {

std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json real_matrix(const RMatrix &m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
    {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

RMatrix real_matrix(const nlohmann::json &j, const char *what)
{
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::invalid_argument(std::string("design point: '") + what + "' must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    RMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
    {
        if (j[i].size() != static_cast<std::size_t>(cols))
            throw std::invalid_argument(std::string("design point: ragged rows in '") + what + "'");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(i, c) = j[i][c].get<double>();
    }
    return m;
}

nlohmann::json complex_matrix(const CMatrix &m)
{
    return {{"re", real_matrix(m.real())}, {"im", real_matrix(m.imag())}};
}

CMatrix complex_matrix(const nlohmann::json &j, const char *what)
{
    const RMatrix re = real_matrix(j.at("re"), what);
    const RMatrix im = real_matrix(j.at("im"), what);
    if (re.rows() != im.rows() || re.cols() != im.cols())
        throw std::invalid_argument(std::string("design point: re/im shapes differ in '") + what + "'");
    CMatrix m(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
    return m;
}

nlohmann::json rvec(const RVector &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

} // namespace

void write_trace_csv(std::ostream &os, const SolveTrace &trace, std::uint64_t seed, const std::string &hash,
                     bool header)
{
    if (header)
        os << "seed,config_hash,iteration,objective_dBm_sum,objective_mw,max_constraint,xi,feasibility_mode,"
              "dual_iters\n";
    for (const auto &r : trace.records)
        os << seed << ',' << hash << ',' << r.iteration << ',' << num(r.objective_dbm) << ','
           << num(r.objective_mw) << ',' << num(r.max_constraint) << ',' << num(r.xi) << ','
           << (r.feasibility_mode ? 1 : 0) << ',' << r.dual_iterations << '\n';
}

void write_sweep_csv(std::ostream &os, const std::vector<SweepPoint> &points)
{
    os << "axis,axis_value,scheme,seed,config_hash,status,power_dbm,power_mw,feasible,min_rate\n";
    for (const auto &p : points)
        for (const auto &r : p.result.runs)
        {
            os << to_string(p.axis) << ',' << p.value << ',' << to_string(p.scheme) << ',' << r.seed << ','
               << p.result.config_hash << ',' << (r.completed ? "ok" : "failed") << ',';
            if (r.completed)
                os << num(r.power_dbm) << ',' << num(r.power_mw) << ',' << (r.feasible ? 1 : 0) << ','
                   << num(r.rates.minCoeff()) << '\n';
            else
                os << "nan,nan,0,nan\n";
        }
}

nlohmann::json to_json(const DesignPoint &x)
{
    const Layout L = x.layout();
    return {{"layout", {{"users", L.users}, {"codewords", L.codewords}, {"rf_chains", L.rf_chains}}},
            {"powers", rvec(x.powers)},
            {"selection", real_matrix(x.selection)},
            {"combiner", complex_matrix(x.combiner)},
            {"beamformers", complex_matrix(x.beamformers)}};
}

DesignPoint design_point_from_json(const nlohmann::json &j)
{
    DesignPoint x;
    const auto p = j.at("powers").get<std::vector<double>>();
    x.powers = Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size()));
    x.selection = real_matrix(j.at("selection"), "selection");
    x.combiner = complex_matrix(j.at("combiner"), "combiner");
    x.beamformers = complex_matrix(j.at("beamformers"), "beamformers");
    const Layout L = x.layout();
    if (j.contains("layout"))
    {
        const auto &l = j.at("layout");
        if (l.at("users").get<int>() != L.users || l.at("codewords").get<int>() != L.codewords ||
            l.at("rf_chains").get<int>() != L.rf_chains)
            throw std::invalid_argument("design point: declared layout does not match the arrays");
    }
    if (x.selection.cols() != L.rf_chains || x.combiner.rows() != L.rf_chains ||
        x.combiner.cols() != L.rf_chains || x.beamformers.rows() != L.rf_chains)
        throw std::invalid_argument("design point: inconsistent block shapes");
    return x;
}

DesignPoint load_design_point(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open design point file '" + path + "'");
    return design_point_from_json(nlohmann::json::parse(in));
}

nlohmann::json to_json(const ExperimentConfig &cfg)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto &[k, v] : config_entries(cfg))
        j[k] = v;
    return j;
}

nlohmann::json to_json(const ExperimentResult &r)
{
    nlohmann::json runs = nlohmann::json::array();
    for (const auto &s : r.runs)
    {
        nlohmann::json o = {{"seed", s.seed}, {"scheme", to_string(s.scheme)}, {"completed", s.completed}};
        if (s.completed)
        {
            o["power_mw"] = s.power_mw;
            o["power_dbm"] = s.power_dbm;
            o["rates"] = rvec(s.rates);
            o["feasible"] = s.feasible;
            o["iterations"] = s.trace.records.size();
            o["convergence_frame"] = convergence_frame(s.trace);
        }
        else
            o["error"] = s.error;
        runs.push_back(std::move(o));
    }
    auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"config", to_json(r.config)},
            {"config_hash", r.config_hash},
            {"replications", r.runs.size()},
            {"completed", r.completed()},
            {"feasible", r.feasible_count()},
            {"mean_power_mw", finite_or_null(r.mean_power_mw())},
            {"mean_power_dbm", finite_or_null(r.mean_power_dbm())},
            {"mean_feasible_power_dbm", finite_or_null(r.mean_feasible_power_dbm())},
            {"runs", runs}};
}

nlohmann::json to_json(const FeasibilityResult &r)
{
    return {{"realizations", r.realizations},
            {"drops", r.drops},
            {"delayed", r.delayed},
            {"shc_feasible", r.shc_feasible},
            {"contender_feasible", r.contender_feasible},
            {"shc_probability", r.shc_probability()},
            {"contender_probability", r.contender_probability()}};
}

nlohmann::json to_json(const PilotOverhead &p)
{
    return {{"shc", p.shc}, {"icsi", p.icsi}, {"ratio", p.ratio}};
}

nlohmann::json to_json(const std::vector<OpCountRow> &rows)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto &r : rows)
        out.push_back({{"scheme", to_string(r.scheme)},
                       {"iterations", r.iterations},
                       {"rate_evaluations", r.total.rate_evaluations},
                       {"gradient_evaluations", r.total.gradient_evaluations},
                       {"primal_evaluations", r.total.primal_evaluations},
                       {"hessian_builds", r.total.hessian_builds},
                       {"kkt_solves", r.total.kkt_solves},
                       {"dual_iterations", r.total.dual_iterations},
                       {"flops", r.total.flops},
                       {"flops_per_iteration", r.flops_per_iteration},
                       {"symbolic_order", r.symbolic_order}});
    return out;
}

void write_trace_plot(std::ostream &os, const std::string &csv)
{
    os << "set datafile separator ','\n"
          "set key autotitle columnhead\n"
          "set multiplot layout 2,1\n"
          "set xlabel 'iteration'\n"
          "set ylabel 'total power (dBm)'\n"
          "plot '"
       << csv
       << "' using 3:4 with lines\n"
          "set ylabel 'max_k (gamma_k - rhat_k)'\n"
          "plot '"
       << csv
       << "' using 3:6 with lines\n"
          "unset multiplot\n";
}

void write_sweep_plot(std::ostream &os, const std::string &csv, const std::string &axis)
{
    os << "set datafile separator ','\n"
          "set xlabel '"
       << axis
       << "'\n"
          "set ylabel 'total power (dBm)'\n"
          "schemes = 'shc mm random zf mrc'\n"
          "plot for [s in schemes] '"
       << csv
       << "' using 2:(strcol(3) eq s && strcol(6) eq 'ok' ? $7 : 1/0) with points title s\n";
}

} // namespace qmimo
