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

#ifndef QMIMO_IO_HPP
#define QMIMO_IO_HPP

#include "qmimo/experiment.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace qmimo {

// trace.csv: seed,config_hash,iteration,objective_dBm_sum,objective_mw,max_constraint,xi,feasibility_mode,dual_iters
void write_trace_csv(std::ostream &os, const SolveTrace &trace, std::uint64_t seed, const std::string &hash,
                     bool header = true);

// sweep.csv: axis,axis_value,scheme,seed,config_hash,status,power_dbm,power_mw,feasible,min_rate
void write_sweep_csv(std::ostream &os, const std::vector<SweepPoint> &points);

nlohmann::json to_json(const DesignPoint &x);
DesignPoint design_point_from_json(const nlohmann::json &j);
DesignPoint load_design_point(const std::string &path);

nlohmann::json to_json(const ExperimentConfig &cfg);
nlohmann::json to_json(const ExperimentResult &r);
nlohmann::json to_json(const FeasibilityResult &r);
nlohmann::json to_json(const PilotOverhead &p);
nlohmann::json to_json(const std::vector<OpCountRow> &rows);

// gnuplot scripts reading the CSV files written next to them.
void write_trace_plot(std::ostream &os, const std::string &csv);
void write_sweep_plot(std::ostream &os, const std::string &csv, const std::string &axis);

} // namespace qmimo

#endif
