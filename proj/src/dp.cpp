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

#include "pdmp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pdmp/errors.hpp"

namespace pdmp {

namespace {

constexpr double kMergeTol = 1e-9;

std::vector<double> distinct_exit_times(const PdmpModel& model)
{
    std::vector<double> t{0.0};
    for (double x : model.exit_times())
        if (x != t.back()) t.push_back(x);
    return t;
}

}  // namespace

double delta_upper_bound(const PdmpModel& model)
{
    const auto t = distinct_exit_times(model);
    double gap = t[1] - t[0];
    for (std::size_t i = 2; i < t.size(); ++i) gap = std::min(gap, t[i] - t[i - 1]);
    return 0.5 * gap;
}

double delta_lower_bound(const PdmpModel& model, double max_s_error)
{
    return std::sqrt(max_s_error) / std::sqrt(2.0 * model.rate_bound());
}

double choose_delta(const PdmpModel& model, std::span<const double> s_errors, double safety)
{
    if (s_errors.empty()) throw DomainError("no inter-jump time errors given");
    const double worst = *std::max_element(s_errors.begin(), s_errors.end());
    const double lower = delta_lower_bound(model, worst);
    const double upper = delta_upper_bound(model);
    const double delta = (1.0 + safety) * lower;
    if (!(delta < upper)) {
        std::ostringstream os;
        os << "no feasible time step: need delta > " << lower << " (with margin " << delta
           << ") but delta < " << upper << "; use larger quantization grids";
        throw DeltaInfeasible(os.str());
    }
    return delta;
}

TimeGrid build_time_grid(const PdmpModel& model, double delta)
{
    const double upper = delta_upper_bound(model);
    if (!(delta > 0.0) || !(delta < upper)) {
        std::ostringstream os;
        os << "time step " << delta << " outside (0, " << upper << ")";
        throw DeltaInfeasible(os.str());
    }
    const auto t = distinct_exit_times(model);
    TimeGrid grid;
    grid.delta = delta;
    for (std::size_t m = 0; m + 1 < t.size(); ++m) {
        const double lo = t[m];
        const double hi = t[m + 1];
        std::vector<double> pts;
        for (int i = 1; lo + i * delta <= hi - delta + kMergeTol; ++i) pts.push_back(lo + i * delta);
        const double last = hi - delta;
        if (pts.empty() || std::abs(pts.back() - last) > kMergeTol) pts.push_back(last);
        else pts.back() = last;
        grid.strata.emplace_back(lo, hi);
        grid.times.insert(grid.times.end(), pts.begin(), pts.end());
        grid.per_stratum.push_back(std::move(pts));
    }
    return grid;
}

TimeGrid build_time_grid(const PdmpModel& model, std::span<const double> s_errors, double safety)
{
    return build_time_grid(model, choose_delta(model, s_errors, safety));
}

namespace {

/// exp(-Lambda(x_i, u)) 1{u < t*_i}.
double alive(const PdmpModel& model, std::size_t i, double u)
{
    return u < model.exit_time(i) ? std::exp(-model.cum_hazard(i, u)) : 0.0;
}

/// g(Phi(x_i, u)) 1{u < t*_i}, times the survival to u unless Pooled.
double reward_term(const PdmpModel& model, std::size_t i, double u, Survival survival)
{
    if (!(u < model.exit_time(i))) return 0.0;
    const double g = model.reward(model.flow(model.point(i), u));
    return survival == Survival::Pooled ? g : g * alive(model, i, u);
}

/// Reward-until-u term from sum_i pi^i reward_term, sum_i pi^i alive and the
/// quantized survival mass `tail`.
double combine(Survival survival, double reward, double survive_exact, double tail)
{
    switch (survival) {
    case Survival::PerPoint:
        return reward;
    case Survival::Pooled:
        return reward * tail;
    case Survival::Conditional:
        return survive_exact > 0.0 ? tail * (reward / survive_exact) : 0.0;
    }
    return 0.0;
}

}  // namespace

double flow_reward(const PdmpModel& model, std::span<const double> pi, double u, Survival survival)
{
    double h = 0.0;
    for (std::size_t i = 0; i < model.q(); ++i)
        if (pi[i] != 0.0) h += pi[i] * reward_term(model, i, u, survival);
    return h;
}

double j_hat(const PdmpModel& model, const QuantizedStage& from, const QuantizedStage& to,
             std::span<const double> v_next, std::size_t cls, double u, Survival survival)
{
    const auto& row = from.trans.at(cls);
    double continuation = 0.0;
    double survive = 0.0;
    for (std::size_t e = 0; e < row.cols.size(); ++e) {
        const std::size_t j = row.cols[e];
        if (to.s[j] <= u) continuation += row.probs[e] * v_next[to.point_class[j]];
        else survive += row.probs[e];
    }
    const auto pi = from.class_pi(cls);
    double exact = 0.0;
    for (std::size_t i = 0; i < model.q(); ++i) exact += pi[i] * alive(model, i, u);
    return continuation + combine(survival, flow_reward(model, pi, u, survival), exact, survive);
}

double k_hat(const PdmpModel& model, const QuantizedStage& from, const QuantizedStage& to,
             std::span<const double> v_next, std::size_t cls)
{
    return j_hat(model, from, to, v_next, cls, model.max_exit_time());
}

std::vector<double> terminal_values(const PdmpModel& model, const QuantizedStage& stage)
{
    std::vector<double> g(model.q());
    for (std::size_t i = 0; i < model.q(); ++i) g[i] = model.reward(model.point(i));
    std::vector<double> v(stage.classes());
    for (std::size_t c = 0; c < stage.classes(); ++c) {
        const auto pi = stage.class_pi(c);
        double acc = 0.0;
        for (std::size_t i = 0; i < model.q(); ++i) acc += g[i] * pi[i];
        v[c] = acc;
    }
    return v;
}

ValuePolicyTable backward_recursion(const PdmpModel& model, const std::vector<QuantizedStage>& stages,
                                    const TimeGrid& grid, Survival survival)
{
    const auto n_max = static_cast<std::size_t>(model.horizon());
    if (stages.size() != n_max + 1) throw DomainError("need one quantized stage per step 0..N");
    const std::size_t q = model.q();
    const auto& times = grid.times;
    const std::size_t n_times = times.size();

    std::vector<double> gphi(n_times * q);
    std::vector<double> live(n_times * q);
    for (std::size_t a = 0; a < n_times; ++a)
        for (std::size_t i = 0; i < q; ++i) {
            gphi[a * q + i] = reward_term(model, i, times[a], survival);
            live[a * q + i] = alive(model, i, times[a]);
        }

    ValuePolicyTable table;
    table.t_max = model.max_exit_time();
    table.survival = survival;
    table.grid = grid;
    table.steps.resize(n_max + 1);
    table.steps[n_max].value = terminal_values(model, stages[n_max]);

    for (std::size_t n = n_max; n >= 1; --n) {
        const QuantizedStage& from = stages[n - 1];
        const QuantizedStage& to = stages[n];
        const auto& v_next = table.steps[n].value;
        StepPolicy& out = table.steps[n - 1];
        const std::size_t nc = from.classes();
        out.value.assign(nc, 0.0);
        out.best_time.assign(nc, 0.0);
        out.j_max.assign(nc, 0.0);
        out.k_value.assign(nc, 0.0);
        out.wait.assign(nc, 0);

        const auto ncls = static_cast<std::int64_t>(nc);
#pragma omp parallel for schedule(dynamic, 64)
        for (std::int64_t c = 0; c < ncls; ++c) {
            const auto& row = from.trans[c];
            const std::size_t len = row.cols.size();
            std::vector<std::size_t> order(len);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                return to.s[row.cols[x]] < to.s[row.cols[y]];
            });
            // Suffix mass of successors with s_j beyond each sorted position.
            std::vector<double> tail(len + 1, 0.0);
            for (std::size_t e = len; e-- > 0;) tail[e] = tail[e + 1] + row.probs[order[e]];

            const auto pi = from.class_pi(c);
            double continuation = 0.0;
            std::size_t e = 0;
            double best = 0.0;
            double best_u = 0.0;
            bool first = true;
            for (std::size_t a = 0; a < n_times; ++a) {
                const double u = times[a];
                for (; e < len && to.s[row.cols[order[e]]] <= u; ++e)
                    continuation += row.probs[order[e]] * v_next[to.point_class[row.cols[order[e]]]];
                double h = 0.0;
                double exact = 0.0;
                for (std::size_t i = 0; i < q; ++i) {
                    h += pi[i] * gphi[a * q + i];
                    exact += pi[i] * live[a * q + i];
                }
                const double j = continuation + combine(survival, h, exact, tail[e]);
                if (first || j > best) {
                    best = j;
                    best_u = u;
                    first = false;
                }
            }
            double k_val = 0.0;
            for (std::size_t x = 0; x < len; ++x)
                k_val += row.probs[x] * v_next[to.point_class[row.cols[x]]];

            out.j_max[c] = best;
            out.best_time[c] = best_u;
            out.k_value[c] = k_val;
            out.wait[c] = k_val > best ? 1 : 0;
            out.value[c] = std::max(best, k_val);
        }
    }
    return table;
}

Survival parse_survival(const std::string& name)
{
    if (name == "per_point") return Survival::PerPoint;
    if (name == "pooled") return Survival::Pooled;
    if (name == "conditional") return Survival::Conditional;
    throw ConfigError("unknown survival weighting '" + name + "' (expected per_point, pooled or conditional)");
}

std::string to_string(Survival survival)
{
    switch (survival) {
    case Survival::PerPoint:
        return "per_point";
    case Survival::Pooled:
        return "pooled";
    case Survival::Conditional:
        return "conditional";
    }
    return "per_point";
}

nlohmann::json policy_to_json(const ValuePolicyTable& table)
{
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& st : table.steps)
        steps.push_back({{"value", st.value},
                         {"best_time", st.best_time},
                         {"j_max", st.j_max},
                         {"k_value", st.k_value},
                         {"wait", st.wait}});
    return {{"t_max", table.t_max},
            {"survival", to_string(table.survival)},
            {"delta", table.grid.delta},
            {"times", table.grid.times},
            {"steps", std::move(steps)}};
}

ValuePolicyTable policy_from_json(const nlohmann::json& j)
{
    ValuePolicyTable table;
    try {
        table.t_max = j.at("t_max").get<double>();
        table.survival = parse_survival(j.at("survival").get<std::string>());
        table.grid.delta = j.at("delta").get<double>();
        table.grid.times = j.at("times").get<std::vector<double>>();
        for (const auto& js : j.at("steps")) {
            StepPolicy st;
            st.value = js.at("value").get<std::vector<double>>();
            st.best_time = js.at("best_time").get<std::vector<double>>();
            st.j_max = js.at("j_max").get<std::vector<double>>();
            st.k_value = js.at("k_value").get<std::vector<double>>();
            st.wait = js.at("wait").get<std::vector<std::uint8_t>>();
            table.steps.push_back(std::move(st));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed policy file: ") + e.what());
    }
    return table;
}

}  // namespace pdmp
