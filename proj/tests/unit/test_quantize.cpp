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
#include <numeric>
#include <vector>

#include "doctest.h"
#include "pdmp/errors.hpp"
#include "pdmp/nearest.hpp"
#include "pdmp/quantize.hpp"
#include "pdmp/rng.hpp"
#include "trained.hpp"

using namespace pdmp;

namespace {

// Stage k restricted to its first `size` training samples, as a codebook.
QuantizedStage subsample_codebook(const ThetaSamples& ts, std::size_t k, std::size_t size)
{
    std::vector<double> pi(ts.pi[k].begin(), ts.pi[k].begin() + size * ts.q);
    std::vector<double> s(ts.s[k].begin(), ts.s[k].begin() + size);
    return make_stage(static_cast<int>(k), ts.q, 1.0, std::move(pi), std::move(s));
}

}  // namespace

TEST_CASE("kd-tree matches brute force")
{
    Rng rng(1, Stream::Oracle, 20);
    for (std::size_t dim : {1u, 2u, 4u}) {
        std::vector<double> pts(3000 * dim);
        for (double& x : pts) x = std::round(rng.uniform() * 40.0) / 40.0;  // many exact ties
        const NearestIndex index(pts, dim);
        for (int i = 0; i < 2000; ++i) {
            std::vector<double> x(dim);
            for (double& c : x) c = rng.uniform();
            CHECK(index.nearest(x) == nearest_brute_force(pts, dim, x));
        }
    }
}

TEST_CASE("projection examples")
{
    const QuantizedStage one = make_stage(1, 3, 1.0, {0.2, 0.3, 0.5}, {0.4});
    const std::vector<double> any{1.0, 0.0, 0.0};
    CHECK(one.project(any, 0.9) == 0);

    const QuantizedStage two = make_stage(1, 3, 1.0, {0.2, 0.3, 0.5, 0.2, 0.3, 0.5}, {0.8, 0.2});
    const std::vector<double> pi{0.2, 0.3, 0.5};
    CHECK(two.project(pi, 0.49) == 1);
    CHECK(two.project(pi, 0.8) == 0);
    CHECK(two.project(pi, 0.2) == 1);
}

TEST_CASE("single point grids")
{
    const PdmpModel m = example_model();
    ClvqOptions opt;
    opt.grid_sizes = uniform_grid_sizes(9, 1);
    opt.n_samples = 20000;
    const auto stages = clvq_train(m, opt);
    const ThetaSamples ts = simulate_theta(m, opt.n_samples, opt.seed, Stream::QuantizerCount);
    for (std::size_t k = 0; k <= 9; ++k) {
        REQUIRE(stages[k].size() == 1);
        const double mean_s = std::accumulate(ts.s[k].begin(), ts.s[k].end(), 0.0) / ts.n;
        CHECK(std::abs(stages[k].s[0] - mean_s) <= 1e-12);
        for (std::size_t i = 0; i < 3; ++i) {
            double mean = 0.0;
            for (std::size_t p = 0; p < ts.n; ++p) mean += ts.pi_at(k, p)[i];
            CHECK(std::abs(stages[k].pi[i] - mean / ts.n) <= 1e-12);
        }
        if (k < 9) {
            REQUIRE(stages[k].trans.size() == 1);
            CHECK(stages[k].trans[0].cols == std::vector<std::uint32_t>{0});
            CHECK(stages[k].trans[0].probs == std::vector<double>{1.0});
        }
    }
}

TEST_CASE("trained grid invariants")
{
    const auto& stages = testing::trained_grids(300);
    const double tmax = 1.0;
    REQUIRE(stages.size() == 10);
    CHECK(stages[0].size() == 1);
    for (const auto& st : stages) {
        double wsum = 0.0;
        for (std::size_t j = 0; j < st.size(); ++j) {
            double total = 0.0;
            for (double p : st.point_pi(j)) {
                CHECK(p >= 0.0);
                total += p;
            }
            CHECK(std::abs(total - 1.0) <= 1e-9);
            CHECK((st.s[j] >= 0.0 && st.s[j] <= tmax));
            CHECK(st.weights[j] > 0.0);
            wsum += st.weights[j];
            CHECK(st.project(st.point_pi(j), st.s[j]) == j);
        }
        CHECK(std::abs(wsum - 1.0) <= 1e-9);
        for (const auto& row : st.trans) {
            double total = 0.0;
            for (double p : row.probs) {
                CHECK(p >= 0.0);
                total += p;
            }
            CHECK(std::abs(total - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("transitions are consistent with next-stage weights")
{
    const auto& stages = testing::trained_grids(300);
    for (std::size_t k = 0; k + 1 < stages.size(); ++k) {
        const auto& from = stages[k];
        std::vector<double> mix(stages[k + 1].size(), 0.0);
        for (std::size_t c = 0; c < from.classes(); ++c)
            for (std::size_t e = 0; e < from.trans[c].cols.size(); ++e)
                mix[from.trans[c].cols[e]] += from.class_weights[c] * from.trans[c].probs[e];
        double tv = 0.0;
        for (std::size_t j = 0; j < mix.size(); ++j) tv += std::abs(mix[j] - stages[k + 1].weights[j]);
        CHECK(0.5 * tv <= 0.01);
    }
}

TEST_CASE("classes group identical filter components")
{
    const auto& st = testing::trained_grids(300)[3];
    for (std::size_t j = 0; j < st.size(); ++j) {
        const auto a = st.point_pi(j);
        const auto b = st.class_pi(st.point_class[j]);
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
    double total = 0.0;
    for (double w : st.class_weights) total += w;
    CHECK(std::abs(total - 1.0) <= 1e-9);
}

TEST_CASE("trained codebooks beat a random subsample")
{
    const PdmpModel m = example_model();
    const auto& stages = testing::trained_grids(1000);
    const ThetaSamples train = simulate_theta(m, 20000, 1, Stream::QuantizerTrain);
    const ThetaSamples held = simulate_theta(m, 20000, 1, Stream::QuantizerError);
    for (std::size_t k = 1; k <= 9; ++k) {
        const QuantizedStage random = subsample_codebook(train, k, stages[k].size());
        CHECK(quant_error(stages[k], held, 2.0).joint < quant_error(random, held, 2.0).joint);
    }
}

TEST_CASE("distortion decreases with grid size")
{
    const PdmpModel m = example_model();
    const ThetaSamples held = simulate_theta(m, 100000, 1, Stream::QuantizerError);
    for (std::size_t k = 1; k <= 9; ++k) {
        const double e50 = quant_error(testing::trained_grids(50)[k], held, 2.0).joint;
        const double e300 = quant_error(testing::trained_grids(300)[k], held, 2.0).joint;
        const double e1000 = quant_error(testing::trained_grids(1000)[k], held, 2.0).joint;
        CHECK(e50 > e300);
        CHECK(e300 > e1000);
    }
}

TEST_CASE("quantization error edge cases")
{
    const PdmpModel m = example_model();
    const ThetaSamples ts = simulate_theta(m, 500, 3, Stream::QuantizerError);
    const std::size_t k = 4;
    const QuantizedStage copy = subsample_codebook(ts, k, ts.n);
    const QuantError zero = quant_error(copy, ts, 2.0);
    CHECK(zero.joint == 0.0);
    CHECK(zero.pi == 0.0);
    CHECK(zero.s == 0.0);

    const auto& st = testing::trained_grids(50)[k];
    const QuantError e1 = quant_error(st, ts, 1.0);
    const QuantError e2 = quant_error(st, ts, 2.0);
    CHECK(e1.joint <= std::sqrt(4.0) * e2.joint);
    CHECK(e1.joint <= e2.joint);
    CHECK(e1.s <= e2.s);
    CHECK_THROWS_AS(quant_error(st, ts, 0.5), DomainError);
}

TEST_CASE("50-point inter-jump errors allow a time step")
{
    const auto errs = measure_errors(testing::trained_grids(50), example_model(), 20000, 1, 2.0);
    double worst = 0.0;
    for (std::size_t n = 1; n < errs.size(); ++n) worst = std::max(worst, errs[n].s);
    CHECK(std::sqrt(worst) / std::sqrt(2.0 * 3.0) < 0.125);
}

TEST_CASE("training options are validated")
{
    const PdmpModel m = example_model();
    ClvqOptions opt;
    opt.grid_sizes = uniform_grid_sizes(9, 50);
    opt.n_samples = 400;
    CHECK_THROWS_AS(clvq_train(m, opt), ConfigError);
    opt.n_samples = 1000;
    opt.grid_sizes = {2, 5, 5, 5, 5, 5, 5, 5, 5, 5};
    CHECK_THROWS_AS(clvq_train(m, opt), ConfigError);
    opt.grid_sizes = {1, 5, 5};
    CHECK_THROWS_AS(clvq_train(m, opt), ConfigError);
    opt.grid_sizes = {1, 5, 0, 5, 5, 5, 5, 5, 5, 5};
    CHECK_THROWS_AS(clvq_train(m, opt), ConfigError);
}

TEST_CASE("grids survive a JSON round trip bit for bit")
{
    const auto& stages = testing::trained_grids(50);
    const std::string text = stages_to_json(stages).dump();
    const auto back = stages_from_json(nlohmann::json::parse(text));
    REQUIRE(back.size() == stages.size());
    for (std::size_t k = 0; k < stages.size(); ++k) {
        CHECK(back[k].pi == stages[k].pi);
        CHECK(back[k].s == stages[k].s);
        CHECK(back[k].weights == stages[k].weights);
        CHECK(back[k].point_class == stages[k].point_class);
        CHECK(back[k].class_weights == stages[k].class_weights);
        for (std::size_t c = 0; c < stages[k].trans.size(); ++c) {
            CHECK(back[k].trans[c].cols == stages[k].trans[c].cols);
            CHECK(back[k].trans[c].probs == stages[k].trans[c].probs);
        }
    }
    CHECK(stages_to_json(back).dump() == text);
}
