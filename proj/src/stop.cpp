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

#include "pdmp/stop.hpp"

#include <algorithm>

#include "pdmp/errors.hpp"

namespace pdmp {

StoppingDecision policy_decide(const ValuePolicyTable& table, const std::vector<QuantizedStage>& stages,
                               std::size_t k, std::span<const double> pi, double s)
{
    if (k + 1 >= table.steps.size()) throw DomainError("no stopping decision at the last step");
    const QuantizedStage& stage = stages[k];
    const std::size_t cls = stage.point_class[stage.project(pi, s)];
    const StepPolicy& step = table.steps[k];
    return {step.wait[cls] ? table.t_max : step.best_time[cls], cls, false};
}

StoppingDecision policy_decide_slack(const PdmpModel& model, const ValuePolicyTable& table,
                                     const std::vector<QuantizedStage>& stages, std::size_t k,
                                     std::span<const double> pi, double s, double eps)
{
    StoppingDecision d = policy_decide(table, stages, k, pi, s);
    const StepPolicy& step = table.steps[k];
    if (step.wait[d.cls]) return d;
    for (double u : table.grid.times) {
        if (j_hat(model, stages[k], stages[k + 1], table.steps[k + 1].value, d.cls, u, table.survival) >= step.j_max[d.cls] - eps) {
            d.delay = u;
            break;
        }
    }
    return d;
}

PolicyRun run_policy(const PdmpModel& model, const Decider& decide, PathStreams& streams)
{
    PolicyRun run;
    run.path = simulate_chain(model, streams);
    const ChainPath& path = run.path;
    const std::size_t n_steps = path.steps();
    run.stop_step = n_steps;
    run.decisions.reserve(n_steps);

    FilterState pi = filter_init(model);
    bool stopped = false;
    double t_k = 0.0;
    double u_total = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        StoppingDecision d;
        if (!stopped) {
            if (k > 0) pi = filter_step(model, pi, path.y[k], path.s[k], path.boundary[k]);
            d = decide(k, pi.probs, path.s[k]);
        }
        const double s_next = path.s[k + 1];
        u_total += std::min(d.delay, s_next);
        if (!stopped && s_next > d.delay) {
            stopped = true;
            d.halted = true;
            run.stop_step = k;
            run.stop_time = t_k + d.delay;
            run.reward = model.reward(model.flow(model.point(path.z[k]), d.delay));
        }
        run.decisions.push_back(d);
        t_k += s_next;
    }
    run.horizon_time = t_k;
    if (!stopped) {
        run.stop_time = u_total;
        run.reward = model.reward(model.point(path.z[n_steps]));
    }
    return run;
}

PolicyRun run_policy(const PdmpModel& model, const ValuePolicyTable& table,
                     const std::vector<QuantizedStage>& stages, PathStreams& streams)
{
    const Decider decide = [&](std::size_t k, std::span<const double> pi, double s) {
        return policy_decide(table, stages, k, pi, s);
    };
    return run_policy(model, decide, streams);
}

MeanEstimate evaluate_decider(const PdmpModel& model, const Decider& decide, std::size_t n_paths,
                              std::uint64_t seed)
{
    if (n_paths == 0) throw DomainError("policy evaluation needs at least one path");
    std::vector<double> reward(n_paths);
    const auto n = static_cast<std::int64_t>(n_paths);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        PathStreams streams(seed, Stream::Evaluation, static_cast<std::uint64_t>(i));
        reward[i] = run_policy(model, decide, streams).reward;
    }
    return mean_estimate(reward);
}

MeanEstimate evaluate_policy(const PdmpModel& model, const ValuePolicyTable& table,
                             const std::vector<QuantizedStage>& stages, std::size_t n_paths,
                             std::uint64_t seed)
{
    const Decider decide = [&](std::size_t k, std::span<const double> pi, double s) {
        return policy_decide(table, stages, k, pi, s);
    };
    return evaluate_decider(model, decide, n_paths, seed);
}

MeanEstimate estimate_sup(const PdmpModel& model, std::size_t n_paths, std::uint64_t seed)
{
    if (n_paths == 0) throw DomainError("supremum estimate needs at least one path");
    std::vector<double> sup(n_paths);
    const auto n = static_cast<std::int64_t>(n_paths);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        PathStreams streams(seed, Stream::Supremum, static_cast<std::uint64_t>(i));
        sup[i] = trajectory_value_sup(model, simulate_chain(model, streams));
    }
    return mean_estimate(sup);
}

}  // namespace pdmp
