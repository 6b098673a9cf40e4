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
#include "pdmp/bounds.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/stats.hpp"

using namespace pdmp;

TEST_CASE("value function Lipschitz bounds")
{
    const auto c = lipschitz_constants(9, 1.0);
    REQUIRE(c.size() == 10);
    CHECK(c[9] == 1.0);
    CHECK(c[8] == 5.0);
    CHECK(c[0] == 2045.0);
    CHECK(lipschitz_constants(example_model()) == c);
}

TEST_CASE("zero quantization error leaves only the time-step terms")
{
    const PdmpModel m = example_model();
    const double delta = 0.01;
    const BoundReport b = theoretical_bound(bound_inputs(m, std::vector<double>(10, 0.0), std::vector<double>(10, 0.0), delta));
    // a = [g]_2 + 2 C_g C_lambda = 1 + 2 * 1 * 3.
    CHECK(b.value_bound == doctest::Approx(9 * 7.0 * delta).epsilon(1e-12));
}

TEST_CASE("theoretical bound grows with each error input")
{
    const PdmpModel m = example_model();
    const std::vector<double> pi(10, 0.02);
    const std::vector<double> s(10, 0.01);
    const double base = theoretical_bound(bound_inputs(m, pi, s, 0.05)).value_bound;
    for (std::size_t n = 0; n < 10; ++n) {
        auto p2 = pi;
        p2[n] *= 1.5;
        CHECK(theoretical_bound(bound_inputs(m, p2, s, 0.05)).value_bound >= base);
        if (n == 0) continue;
        auto s2 = s;
        s2[n] *= 1.2;
        CHECK(theoretical_bound(bound_inputs(m, pi, s2, 0.05)).value_bound >= base);
    }
}

TEST_CASE("theoretical bound rejects an infeasible time step")
{
    const PdmpModel m = example_model();
    const std::vector<double> pi(10, 0.02);
    CHECK_THROWS_AS(theoretical_bound(bound_inputs(m, pi, std::vector<double>(10, 0.06), 0.05)), DeltaInfeasible);
    CHECK_THROWS_AS(theoretical_bound(bound_inputs(m, pi, std::vector<double>(10, 0.0), 0.2)), DeltaInfeasible);
}

TEST_CASE("empirical bound")
{
    CHECK(empirical_bound(0.8313, 0.8545, 0.9944) == doctest::Approx(0.1399).epsilon(1e-9));
    CHECK(empirical_bound(0.7900, 0.8135, 0.9944) == doctest::Approx(0.1809).epsilon(1e-9));
    CHECK(empirical_bound(0.5, 0.5, 0.5) == 0.0);
    CHECK(empirical_bound(0.9, 0.1, 0.4) >= 0.0);
}

TEST_CASE("table rows reproduce their empirical bound column")
{
    struct Row {
        double vbar, vhat, bem;
    };
    const Row rows[] = {{0.7900, 0.8135, 0.181}, {0.8031, 0.8250, 0.169}, {0.8182, 0.8407, 0.154},
                        {0.8250, 0.8477, 0.147}, {0.8313, 0.8545, 0.140}};
    for (const Row& r : rows) CHECK(std::abs(empirical_bound(r.vbar, r.vhat, 0.9944) - r.bem) <= 0.001);
}

TEST_CASE("mean estimates")
{
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const MeanEstimate e = mean_estimate(x);
    CHECK(e.mean == 2.5);
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-14));
    std::vector<double> many(1000, 0.1);
    CHECK(pairwise_sum(many) == doctest::Approx(100.0).epsilon(1e-14));
}
