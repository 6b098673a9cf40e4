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
#include <span>
#include <vector>

#include "pdmp/dp.hpp"
#include "pdmp/filter.hpp"
#include "pdmp/model.hpp"
#include "pdmp/quantize.hpp"
#include "pdmp/stats.hpp"

namespace pdmp {

/// Delay R_k chosen at the k-th jump, and the Gamma_k class it came from.
struct StoppingDecision {
    double delay = 0.0;
    std::size_t cls = 0;
    bool halted = false;  // set when the run stopped during step k
};

/// R_k for the filter/inter-jump pair (pi, s) observed at the k-th jump,
/// 0 <= k < N: t*_q if the class of proj(pi, s) waits, else its best time.
StoppingDecision policy_decide(const ValuePolicyTable& table, const std::vector<QuantizedStage>& stages,
                               std::size_t k, std::span<const double> pi, double s);

/// Variant with slack: the earliest grid time whose J value is within `eps`
/// of the grid maximum (eps = 0 gives policy_decide).
StoppingDecision policy_decide_slack(const PdmpModel& model, const ValuePolicyTable& table,
                                     const std::vector<QuantizedStage>& stages, std::size_t k,
                                     std::span<const double> pi, double s, double eps);

using Decider = std::function<StoppingDecision(std::size_t k, std::span<const double> pi, double s)>;

struct PolicyRun {
    double stop_time = 0.0;
    double reward = 0.0;
    double horizon_time = 0.0;  // T_N
    std::size_t stop_step = 0;  // k whose delay fired, N if never
    std::vector<StoppingDecision> decisions;
    ChainPath path;
};

/// Follows the rule online along one simulated trajectory. Once stopped,
/// every later delay is 0.
PolicyRun run_policy(const PdmpModel& model, const Decider& decide, PathStreams& streams);

PolicyRun run_policy(const PdmpModel& model, const ValuePolicyTable& table,
                     const std::vector<QuantizedStage>& stages, PathStreams& streams);

/// Mean reward over n_paths runs on the Evaluation streams of `seed`.
MeanEstimate evaluate_policy(const PdmpModel& model, const ValuePolicyTable& table,
                             const std::vector<QuantizedStage>& stages, std::size_t n_paths,
                             std::uint64_t seed);

MeanEstimate evaluate_decider(const PdmpModel& model, const Decider& decide, std::size_t n_paths,
                              std::uint64_t seed);

/// Monte Carlo estimate of E[sup_{t <= T_N} g(X_t)] on the Supremum streams.
MeanEstimate estimate_sup(const PdmpModel& model, std::size_t n_paths, std::uint64_t seed);

}  // namespace pdmp
