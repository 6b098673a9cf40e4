/*
   Copyright 2026 The pdmpstop Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdmp/config.hpp"
#include "pdmp/dp.hpp"
#include "pdmp/quantize.hpp"
#include "pdmp/stats.hpp"

namespace pdmp {

/// One grid-size row of a run report.
struct ReportRow {
    std::size_t grid_size = 0;
    double delta = 0.0;
    double vbar0 = 0.0;
    double vbar0_se = 0.0;
    double vhat0 = 0.0;
    double sup = 0.0;
    double sup_se = 0.0;
    double b_em = 0.0;
    double b_th = 0.0;
    double b_policy = 0.0;
    double err_pi = 0.0;     // max_n ||Pi_n - Pi_hat_n||_p
    double err_s = 0.0;      // max_n ||S_n - S_hat_n||_p
    double err_joint = 0.0;  // max_n ||Theta_n - Theta_hat_n||_p
    std::uint64_t seed = 0;
    std::size_t train_paths = 0;
    std::size_t eval_paths = 0;
    double wall_time = 0.0;
};

struct RunReport {
    std::vector<ReportRow> rows;
};

/// Trained grids and their solution for one grid size.
struct GridArtifacts {
    std::size_t grid_size = 0;
    std::vector<QuantizedStage> stages;
    std::vector<QuantError> errors;
    std::optional<ValuePolicyTable> policy;
};

PdmpModel model_from_config(const RunConfig& config);

GridArtifacts train_grids(const PdmpModel& model, const RunConfig& config, std::size_t grid_size);

/// Delta from the config override or the measured inter-jump errors.
TimeGrid time_grid_for(const PdmpModel& model, const RunConfig& config, const std::vector<QuantError>& errors);

void solve_grids(const PdmpModel& model, const RunConfig& config, GridArtifacts& art);

/// Bounds, evaluation and the report row for solved grids.
ReportRow evaluate_grids(const PdmpModel& model, const RunConfig& config, const GridArtifacts& art,
                         const MeanEstimate& sup);

/// Full run over config.grid_sizes. `on_row` sees each finished row and its
/// artifacts before the next size starts (used to flush partial results).
RunReport run_pipeline(const RunConfig& config,
                       const std::function<void(const ReportRow&, const GridArtifacts&)>& on_row = {});

nlohmann::json artifacts_to_json(const RunConfig& config, const GridArtifacts& art);
GridArtifacts artifacts_from_json(const RunConfig& config, const nlohmann::json& j);

/// Summary of a batch of simulated chain paths.
struct SimulationSummary {
    std::size_t n_paths = 0;
    MeanEstimate s1;            // first inter-jump time
    MeanEstimate final_reward;  // g(Z_N)
    std::size_t boundary_jumps = 0;
};

/// Simulates `n_paths` chains on the Simulation stream and writes one CSV row
/// per (path, n) to `paths` and the matching filter state to `filter`.
SimulationSummary simulate_batch(const PdmpModel& model, std::size_t n_paths, std::uint64_t seed,
                                 std::ostream& paths, std::ostream& filter);

void write_report_csv(std::ostream& out, const RunReport& report, bool wall_time = true);
RunReport read_report_csv(std::istream& in);
void write_report_table(std::ostream& out, const RunReport& report);
void write_errors_csv(std::ostream& out, const std::vector<QuantError>& errors);

}  // namespace pdmp
