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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "pdmp/dp.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/rng.hpp"
#include "trained.hpp"

using namespace pdmp;

namespace {

PdmpModel short_model(int horizon)
{
    ExampleParams p;
    p.horizon = horizon;
    return example_model(p);
}

// Gamma_{k-1} with one point feeding a three-point Gamma_k.
struct HandStages {
    QuantizedStage from;
    QuantizedStage to;
    std::vector<double> v_next{0.35, 0.6, 0.2};
};

HandStages hand_stages()
{
    HandStages h;
    h.from = make_stage(0, 3, 1.0, {0.2, 0.3, 0.5}, {0.0});
    h.to = make_stage(1, 3, 1.0, {0.6, 0.3, 0.1, 0.1, 0.8, 0.1, 0.0, 0.2, 0.8}, {0.15, 0.45, 0.8});
    h.from.trans = {QuantizedStage::Row{{0, 1, 2}, {0.2, 0.5, 0.3}}};
    return h;
}

// Brute-force J over every successor point, with the example model's
// g(Phi(x, u)) = x + u and Lambda(x, u) = 3 (x u + u^2 / 2) written out.
double j_oracle(const HandStages& h, double u, Survival survival)
{
    const double xs[3] = {0.5, 0.25, 0.0};
    const double tstar[3] = {0.5, 0.75, 1.0};
    const auto& row = h.from.trans[0];
    double jump = 0.0;
    double tail = 0.0;
    for (std::size_t e = 0; e < row.cols.size(); ++e) {
        const std::size_t j = row.cols[e];
        if (h.to.s[j] <= u) jump += row.probs[e] * h.v_next[j];
        else tail += row.probs[e];
    }
    double plain = 0.0;
    double weighted = 0.0;
    double alive = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(u < tstar[i])) continue;
        const double pi = h.from.pi[i];
        const double surv = std::exp(-3.0 * (xs[i] * u + 0.5 * u * u));
        plain += pi * (xs[i] + u);
        weighted += pi * (xs[i] + u) * surv;
        alive += pi * surv;
    }
    switch (survival) {
    case Survival::PerPoint:
        return jump + weighted;
    case Survival::Pooled:
        return jump + tail * plain;
    case Survival::Conditional:
        return jump + (alive > 0.0 ? tail * weighted / alive : 0.0);
    }
    return 0.0;
}

}  // namespace

TEST_CASE("time step window")
{
    const PdmpModel m = example_model();
    CHECK(delta_upper_bound(m) == 0.125);
    CHECK(delta_lower_bound(m, 0.06) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(choose_delta(m, std::vector<double>{0.01, 0.06, 0.02}, 0.05) == doctest::Approx(0.105).epsilon(1e-12));
    CHECK_THROWS_AS(choose_delta(m, std::vector<double>{0.1}, 0.05), DeltaInfeasible);
    CHECK_THROWS_AS(build_time_grid(m, 0.125), DeltaInfeasible);
    CHECK_THROWS_AS(build_time_grid(m, 0.0), DeltaInfeasible);
}

TEST_CASE("time grid for delta 0.1")
{
    const PdmpModel m = example_model();
    const TimeGrid g = build_time_grid(m, 0.1);
    REQUIRE(g.strata.size() == 3);
    REQUIRE(g.per_stratum[0].size() == 4);
    const double want[4] = {0.1, 0.2, 0.3, 0.4};
    for (int i = 0; i < 4; ++i) CHECK(g.per_stratum[0][i] == doctest::Approx(want[i]).epsilon(1e-12));

    for (double delta : {0.1, 0.07, 0.03, 0.011}) {
        const TimeGrid gr = build_time_grid(m, delta);
        for (std::size_t s = 0; s < gr.strata.size(); ++s) {
            const auto [lo, hi] = gr.strata[s];
            const auto& pts = gr.per_stratum[s];
            REQUIRE_FALSE(pts.empty());
            double prev = lo;
            for (double u : pts) {
                CHECK(u > lo);
                CHECK(u < hi);
                CHECK(u - prev <= delta + 1e-12);
                CHECK(u - lo >= std::min(delta, hi - lo) - 1e-12);
                CHECK(hi - u >= std::min(delta, hi - lo) - 1e-12);
                prev = u;
            }
            CHECK(hi - prev <= delta + 1e-12);
        }
        for (std::size_t i = 1; i < gr.times.size(); ++i) CHECK(gr.times[i] > gr.times[i - 1]);
    }
}

TEST_CASE("quantized J on a hand-built stage")
{
    const PdmpModel m = short_model(1);
    const HandStages h = hand_stages();
    for (Survival sv : {Survival::PerPoint, Survival::Pooled, Survival::Conditional}) {
        for (double u : {0.05, 0.15, 0.3, 0.45, 0.5, 0.6, 0.75, 0.8, 0.95, 1.0}) {
            CHECK(std::abs(j_hat(m, h.from, h.to, h.v_next, 0, u, sv) - j_oracle(h, u, sv)) <= 1e-12);
        }
    }
    // At t*_q only the jump term is left, which is the K operator.
    const double k = 0.2 * 0.35 + 0.5 * 0.6 + 0.3 * 0.2;
    CHECK(std::abs(k_hat(m, h.from, h.to, h.v_next, 0) - k) <= 1e-15);
    for (Survival sv : {Survival::PerPoint, Survival::Pooled, Survival::Conditional})
        CHECK(j_hat(m, h.from, h.to, h.v_next, 0, 1.0, sv) == k_hat(m, h.from, h.to, h.v_next, 0));
}

TEST_CASE("quantized J with a single successor beyond u")
{
    const PdmpModel m = short_model(1);
    HandStages h = hand_stages();
    h.from.trans = {QuantizedStage::Row{{2}, {1.0}}};
    const double u = 0.3;
    const std::vector<double> pi{0.2, 0.3, 0.5};
    CHECK(j_hat(m, h.from, h.to, h.v_next, 0, u, Survival::PerPoint) ==
          doctest::Approx(flow_reward(m, pi, u, Survival::PerPoint)).epsilon(1e-14));
    CHECK(j_hat(m, h.from, h.to, h.v_next, 0, u, Survival::Pooled) ==
          doctest::Approx(flow_reward(m, pi, u, Survival::Pooled)).epsilon(1e-14));
}

TEST_CASE("terminal values are exact")
{
    const PdmpModel m = example_model();
    Rng rng(6, Stream::Oracle, 30);
    std::vector<double> pi;
    std::vector<double> s;
    for (int j = 0; j < 1000; ++j) {
        double w[3];
        double total = 0.0;
        for (double& x : w) total += x = -std::log(rng.uniform());
        for (double x : w) pi.push_back(x / total);
        s.push_back(rng.uniform());
    }
    QuantizedStage st = make_stage(9, 3, 1.0, pi, s);
    const auto v = terminal_values(m, st);
    for (std::size_t c = 0; c < st.classes(); ++c) {
        const auto p = st.class_pi(c);
        CHECK(v[c] - (m.reward(m.point(0)) * p[0] + m.reward(m.point(1)) * p[1] + m.reward(m.point(2)) * p[2]) == 0.0);
    }
}

TEST_CASE("backward recursion matches the operator definition")
{
    const PdmpModel m = example_model();
    const auto& stages = testing::trained_grids(50);
    const TimeGrid grid = build_time_grid(m, 0.09);
    for (Survival sv : {Survival::Conditional, Survival::PerPoint, Survival::Pooled}) {
        const ValuePolicyTable t = backward_recursion(m, stages, grid, sv);
        CHECK(t.steps[9].value == terminal_values(m, stages[9]));
        for (std::size_t n = 0; n < 9; ++n) {
            const auto& step = t.steps[n];
            for (std::size_t c = 0; c < stages[n].classes(); ++c) {
                double best = -1.0;
                double best_u = 0.0;
                for (double u : grid.times) {
                    const double j = j_hat(m, stages[n], stages[n + 1], t.steps[n + 1].value, c, u, sv);
                    CHECK(step.value[c] >= j - 1e-12);
                    if (j > best + 1e-12) {
                        best = j;
                        best_u = u;
                    }
                }
                const double k = k_hat(m, stages[n], stages[n + 1], t.steps[n + 1].value, c);
                CHECK(step.j_max[c] == doctest::Approx(best).epsilon(1e-12));
                CHECK(step.best_time[c] == best_u);
                CHECK(step.k_value[c] == doctest::Approx(k).epsilon(1e-12));
                CHECK(step.value[c] == std::max(step.j_max[c], step.k_value[c]));
                CHECK(step.value[c] >= step.k_value[c]);
                CHECK(bool(step.wait[c]) == (step.k_value[c] > step.j_max[c]));
            }
        }
    }
}

TEST_CASE("ties pick the earliest grid time")
{
    // Every successor has s beyond the grid and v = 0, and g is flat, so J is
    // constant in u under the pooled weighting.
    ExampleParams p;
    p.horizon = 1;
    ModelSpec spec = example_spec(p);
    spec.reward = [](const State&) { return 0.5; };
    spec.reward_bound = 0.5;
    const PdmpModel m(spec);
    std::vector<QuantizedStage> stages;
    stages.push_back(make_stage(0, 3, 1.0, {0.0, 0.0, 1.0}, {0.0}));
    stages.push_back(make_stage(1, 3, 1.0, {1.0, 0.0, 0.0}, {1.0}));
    stages[0].trans = {QuantizedStage::Row{{0}, {1.0}}};
    const TimeGrid grid = build_time_grid(m, 0.1);
    const ValuePolicyTable t = backward_recursion(m, stages, grid, Survival::Pooled);
    CHECK(t.steps[0].best_time[0] == grid.times.front());
    CHECK(t.steps[0].j_max[0] == 0.5);
    CHECK(t.steps[0].wait[0] == 0);
}

TEST_CASE("values stay within the reward bound")
{
    const PdmpModel m = example_model();
    for (std::size_t size : {50u, 300u}) {
        const auto& stages = testing::trained_grids(size);
        for (Survival sv : {Survival::Conditional, Survival::Pooled}) {
            const ValuePolicyTable t = backward_recursion(m, stages, build_time_grid(m, 0.1), sv);
            for (const auto& step : t.steps)
                for (double v : step.value) {
                    CHECK(v >= 0.0);
                    CHECK(v <= m.reward_bound());
                }
        }
    }
}

TEST_CASE("larger grids raise the value estimate")
{
    // Each size with its own error-driven time step, as in the pipeline.
    const PdmpModel m = example_model();
    auto v0 = [&](std::size_t size) {
        const auto& stages = testing::trained_grids(size);
        std::vector<double> s_err;
        for (const auto& e : measure_errors(stages, m, 20000, 1, 2.0)) s_err.push_back(e.s);
        s_err.erase(s_err.begin());
        return backward_recursion(m, stages, build_time_grid(m, s_err, 0.05)).v0();
    };
    CHECK(v0(1000) > v0(50));
}

TEST_CASE("policy tables survive a JSON round trip bit for bit")
{
    const PdmpModel m = example_model();
    const ValuePolicyTable t = backward_recursion(m, testing::trained_grids(50), build_time_grid(m, 0.09));
    const std::string text = policy_to_json(t).dump();
    const ValuePolicyTable back = policy_from_json(nlohmann::json::parse(text));
    CHECK(back.survival == t.survival);
    CHECK(back.grid.times == t.grid.times);
    CHECK(back.grid.delta == t.grid.delta);
    for (std::size_t n = 0; n < t.steps.size(); ++n) {
        CHECK(back.steps[n].value == t.steps[n].value);
        CHECK(back.steps[n].best_time == t.steps[n].best_time);
        CHECK(back.steps[n].wait == t.steps[n].wait);
    }
    CHECK(policy_to_json(back).dump() == text);
}

TEST_CASE("survival names")
{
    for (Survival sv : {Survival::PerPoint, Survival::Pooled, Survival::Conditional})
        CHECK(parse_survival(to_string(sv)) == sv);
    CHECK_THROWS_AS(parse_survival("both"), ConfigError);
}
