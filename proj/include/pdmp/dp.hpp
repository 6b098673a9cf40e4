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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdmp/model.hpp"
#include "pdmp/quantize.hpp"

namespace pdmp {

/// Candidate stopping delays: for each stratum m in M (consecutive distinct
/// exit times t*_m < t*_{m+1}, with t*_0 = 0), the points
/// t*_m + i delta (i = 1..i_m) and t*_{m+1} - delta.
struct TimeGrid {
    double delta = 0.0;
    /// Stratum bounds (t*_m, t*_{m+1}) for m in M.
    std::vector<std::pair<double, double>> strata;
    std::vector<std::vector<double>> per_stratum;
    /// Union of all strata grids, ascending.
    std::vector<double> times;
};

/// Half the smallest gap between distinct values of {0, t*_1, ..., t*_q}.
double delta_upper_bound(const PdmpModel& model);

/// (2 C_lambda)^{-1/2} sqrt(max_err).
double delta_lower_bound(const PdmpModel& model, double max_s_error);

/// Delta = (1 + safety) * lower bound over s_errors; DeltaInfeasible when it
/// does not stay below the upper bound.
double choose_delta(const PdmpModel& model, std::span<const double> s_errors, double safety);

/// Grid for a given delta; DeltaInfeasible unless 0 < delta < upper bound.
TimeGrid build_time_grid(const PdmpModel& model, double delta);

TimeGrid build_time_grid(const PdmpModel& model, std::span<const double> s_errors, double safety);

/// How the reward-until-u term of J weighs survival to u.
enum class Survival {
    /// sum_i pi^i 1{u < t*_i} g(Phi(x_i, u)) exp(-Lambda(x_i, u)).
    PerPoint,
    /// sum_i pi^i 1{u < t*_i} g(Phi(x_i, u)) * P(S_hat > u | class).
    Pooled,
    /// P(S_hat > u | class) times the PerPoint sum divided by
    /// sum_i pi^i 1{u < t*_i} exp(-Lambda(x_i, u)).
    Conditional,
};

/// sum_i pi^i 1{u < t*_i} g(Phi(x_i, u)), with each term weighted by
/// exp(-Lambda(x_i, u)) unless `survival` is Pooled.
double flow_reward(const PdmpModel& model, std::span<const double> pi, double u, Survival survival);

/// Quantized J operator at pi-class `cls` of `from` (= Gamma_{n-1}), for a
/// value function `v_next` given per pi-class of `to` (= Gamma_n).
double j_hat(const PdmpModel& model, const QuantizedStage& from, const QuantizedStage& to,
             std::span<const double> v_next, std::size_t cls, double u,
             Survival survival = Survival::Conditional);

/// K operator: j_hat at u = t*_q.
double k_hat(const PdmpModel& model, const QuantizedStage& from, const QuantizedStage& to,
             std::span<const double> v_next, std::size_t cls);

/// v_n on the pi-classes of Gamma_n, plus (n < N) the optimiser data of the
/// step from Gamma_n to Gamma_{n+1} that v_n was computed from.
struct StepPolicy {
    std::vector<double> value;
    std::vector<double> best_time;
    std::vector<double> j_max;
    std::vector<double> k_value;
    std::vector<std::uint8_t> wait;
};

struct ValuePolicyTable {
    double t_max = 0.0;
    Survival survival = Survival::Conditional;
    TimeGrid grid;
    std::vector<StepPolicy> steps;  // n = 0..N

    /// v_0 at the single point of Gamma_0.
    double v0() const { return steps.front().value.front(); }
};

/// Terminal values sum_i g(x_i) pi^i on the classes of a stage.
std::vector<double> terminal_values(const PdmpModel& model, const QuantizedStage& stage);

ValuePolicyTable backward_recursion(const PdmpModel& model, const std::vector<QuantizedStage>& stages,
                                    const TimeGrid& grid, Survival survival = Survival::Conditional);

Survival parse_survival(const std::string& name);
std::string to_string(Survival survival);

nlohmann::json policy_to_json(const ValuePolicyTable& table);
ValuePolicyTable policy_from_json(const nlohmann::json& j);

}  // namespace pdmp
