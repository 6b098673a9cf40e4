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

#include "pdmp/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "pdmp/errors.hpp"
#include "pdmp/filter.hpp"
#include "pdmp/stats.hpp"

namespace pdmp {

ThetaSamples simulate_theta(const PdmpModel& model, std::size_t n_paths, std::uint64_t seed,
                            Stream purpose)
{
    const std::size_t q = model.q();
    const auto stages = static_cast<std::size_t>(model.horizon()) + 1;
    ThetaSamples out;
    out.q = q;
    out.n = n_paths;
    out.pi.assign(stages, std::vector<double>(n_paths * q));
    out.s.assign(stages, std::vector<double>(n_paths));

    const auto n = static_cast<std::int64_t>(n_paths);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        PathStreams streams(seed, purpose, static_cast<std::uint64_t>(i));
        const ChainPath path = simulate_chain(model, streams);
        FilterState pi = filter_init(model);
        for (std::size_t k = 0; k < stages; ++k) {
            if (k > 0) pi = filter_step(model, pi, path.y[k], path.s[k], path.boundary[k]);
            std::copy(pi.probs.begin(), pi.probs.end(), out.pi[k].begin() + i * q);
            out.s[k][i] = path.s[k];
        }
    }
    return out;
}

void QuantizedStage::reindex()
{
    const std::size_t dim = q + 1;
    std::vector<double> coords(size() * dim);
    for (std::size_t j = 0; j < size(); ++j) {
        std::copy_n(pi.begin() + j * q, q, coords.begin() + j * dim);
        coords[j * dim + q] = s[j] / s_scale;
    }
    index_ = NearestIndex(std::move(coords), dim);
}

std::size_t QuantizedStage::project(std::span<const double> pi_in, double s_in) const
{
    double buf[16];
    std::vector<double> heap;
    double* x = buf;
    if (q + 1 > 16) {
        heap.resize(q + 1);
        x = heap.data();
    }
    std::copy(pi_in.begin(), pi_in.end(), x);
    x[q] = s_in / s_scale;
    return index_.nearest({x, q + 1});
}

void assign_classes(QuantizedStage& stage)
{
    std::map<std::vector<double>, std::uint32_t> seen;
    stage.point_class.assign(stage.size(), 0);
    stage.class_rep.clear();
    for (std::size_t j = 0; j < stage.size(); ++j) {
        const auto p = stage.point_pi(j);
        std::vector<double> key(p.begin(), p.end());
        auto [it, fresh] = seen.try_emplace(std::move(key), static_cast<std::uint32_t>(stage.class_rep.size()));
        if (fresh) stage.class_rep.push_back(static_cast<std::uint32_t>(j));
        stage.point_class[j] = it->second;
    }
}

QuantizedStage make_stage(int k, std::size_t q, double s_scale, std::vector<double> pi,
                          std::vector<double> s)
{
    if (pi.size() != q * s.size()) throw DomainError("codebook pi block has the wrong size");
    QuantizedStage stage;
    stage.k = k;
    stage.q = q;
    stage.s_scale = s_scale;
    stage.pi = std::move(pi);
    stage.s = std::move(s);
    assign_classes(stage);
    stage.reindex();
    return stage;
}

std::vector<std::size_t> uniform_grid_sizes(int horizon, std::size_t size)
{
    std::vector<std::size_t> sizes(static_cast<std::size_t>(horizon) + 1, size);
    sizes[0] = 1;
    return sizes;
}

void clvq_pass(std::vector<double>& codebook, std::size_t dim, std::span<const double> samples,
               double gamma0)
{
    const std::size_t m = codebook.size() / dim;
    const std::size_t n = samples.size() / dim;
    if (m == 0 || n == 0) return;

    // Coordinate-major copy so the distance scan vectorises.
    std::vector<double> soa(m * dim);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t c = 0; c < dim; ++c) soa[c * m + j] = codebook[j * dim + c];

    const double big_a = static_cast<double>(n) / 10.0;
    std::vector<double> d2(m);
    for (std::size_t t = 0; t < n; ++t) {
        const double* x = &samples[t * dim];
        std::fill(d2.begin(), d2.end(), 0.0);
        for (std::size_t c = 0; c < dim; ++c) {
            const double xc = x[c];
            const double* col = &soa[c * m];
            double* d = d2.data();
            for (std::size_t j = 0; j < m; ++j) {
                const double diff = col[j] - xc;
                d[j] += diff * diff;
            }
        }
        const auto win = static_cast<std::size_t>(std::min_element(d2.begin(), d2.end()) - d2.begin());
        const double gamma = gamma0 * big_a / (big_a + static_cast<double>(t + 1));
        for (std::size_t c = 0; c < dim; ++c) soa[c * m + win] += gamma * (x[c] - soa[c * m + win]);
    }

    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t c = 0; c < dim; ++c) codebook[j * dim + c] = soa[c * m + j];
}

namespace {

std::vector<double> stage_coords(const ThetaSamples& samples, std::size_t k, double s_scale)
{
    const std::size_t q = samples.q;
    const std::size_t dim = q + 1;
    std::vector<double> out(samples.n * dim);
    for (std::size_t i = 0; i < samples.n; ++i) {
        std::copy_n(samples.pi[k].begin() + i * q, q, out.begin() + i * dim);
        out[i * dim + q] = samples.s[k][i] / s_scale;
    }
    return out;
}

std::vector<double> initial_codebook(std::span<const double> coords, std::size_t dim, std::size_t size)
{
    std::set<std::vector<double>> seen;
    std::vector<double> book;
    for (std::size_t i = 0; i * dim < coords.size() && seen.size() < size; ++i) {
        std::vector<double> x(coords.begin() + i * dim, coords.begin() + (i + 1) * dim);
        if (seen.insert(x).second) book.insert(book.end(), x.begin(), x.end());
    }
    return book;
}

std::vector<std::uint32_t> project_all(const QuantizedStage& stage, const ThetaSamples& samples)
{
    std::vector<std::uint32_t> idx(samples.n);
    const auto n = static_cast<std::int64_t>(samples.n);
    const auto k = static_cast<std::size_t>(stage.k);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        idx[i] = static_cast<std::uint32_t>(stage.project(samples.pi_at(k, i), samples.s[k][i]));
    return idx;
}

/// Keeps only visited points; remaps `idx` to the surviving numbering.
void prune(QuantizedStage& stage, std::vector<std::uint32_t>& idx)
{
    std::vector<std::size_t> count(stage.size(), 0);
    for (auto j : idx) ++count[j];

    constexpr auto kGone = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> remap(stage.size(), kGone);
    std::vector<double> pi;
    std::vector<double> s;
    std::vector<double> weights;
    for (std::size_t j = 0; j < stage.size(); ++j) {
        if (count[j] == 0) continue;
        remap[j] = static_cast<std::uint32_t>(s.size());
        const auto p = stage.point_pi(j);
        pi.insert(pi.end(), p.begin(), p.end());
        s.push_back(stage.s[j]);
        weights.push_back(static_cast<double>(count[j]) / static_cast<double>(idx.size()));
    }
    stage.dropped += stage.size() - s.size();
    stage.pi = std::move(pi);
    stage.s = std::move(s);
    stage.weights = std::move(weights);
    for (auto& j : idx) j = remap[j];
    assign_classes(stage);
    stage.class_weights.assign(stage.classes(), 0.0);
    for (std::size_t j = 0; j < stage.size(); ++j) stage.class_weights[stage.point_class[j]] += stage.weights[j];
    stage.reindex();
}

void estimate_transitions(QuantizedStage& stage, std::span<const std::uint32_t> from,
                          std::span<const std::uint32_t> to)
{
    std::vector<std::uint64_t> keys(from.size());
    for (std::size_t i = 0; i < from.size(); ++i)
        keys[i] = (static_cast<std::uint64_t>(stage.point_class[from[i]]) << 32) | to[i];
    std::sort(keys.begin(), keys.end());

    std::vector<std::size_t> class_count(stage.classes(), 0);
    for (auto j : from) ++class_count[stage.point_class[j]];

    stage.trans.assign(stage.classes(), {});
    for (std::size_t a = 0; a < keys.size();) {
        std::size_t b = a;
        while (b < keys.size() && keys[b] == keys[a]) ++b;
        const auto c = static_cast<std::size_t>(keys[a] >> 32);
        auto& row = stage.trans[c];
        row.cols.push_back(static_cast<std::uint32_t>(keys[a] & 0xffffffffu));
        row.probs.push_back(static_cast<double>(b - a) / static_cast<double>(class_count[c]));
        a = b;
    }
}

}  // namespace

namespace {

/// Moves every point to the mean of the counting samples in its cell.
void centre_cells(QuantizedStage& stage, const std::vector<std::uint32_t>& idx, const ThetaSamples& samples)
{
    const std::size_t q = stage.q;
    const auto k = static_cast<std::size_t>(stage.k);
    std::vector<double> pi(stage.size() * q, 0.0);
    std::vector<double> s(stage.size(), 0.0);
    std::vector<std::size_t> count(stage.size(), 0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const std::size_t j = idx[i];
        const auto p = samples.pi_at(k, i);
        for (std::size_t c = 0; c < q; ++c) pi[j * q + c] += p[c];
        s[j] += samples.s[k][i];
        ++count[j];
    }
    for (std::size_t j = 0; j < stage.size(); ++j) {
        const double n = static_cast<double>(count[j]);
        for (std::size_t c = 0; c < q; ++c) pi[j * q + c] /= n;
        s[j] /= n;
    }
    stage.pi = std::move(pi);
    stage.s = std::move(s);
    assign_classes(stage);
    stage.class_weights.assign(stage.classes(), 0.0);
    for (std::size_t j = 0; j < stage.size(); ++j) stage.class_weights[stage.point_class[j]] += stage.weights[j];
    stage.reindex();
}

}  // namespace

std::vector<QuantizedStage> clvq_train(const PdmpModel& model, const ClvqOptions& options)
{
    const auto stages = static_cast<std::size_t>(model.horizon()) + 1;
    const auto& sizes = options.grid_sizes;
    if (sizes.size() != stages)
        throw ConfigError("expected " + std::to_string(stages) + " grid sizes, got " + std::to_string(sizes.size()));
    if (sizes[0] != 1) throw ConfigError("the grid at step 0 must have exactly one point");
    for (auto m : sizes)
        if (m == 0) throw ConfigError("grid sizes must be positive");
    const std::size_t largest = *std::max_element(sizes.begin(), sizes.end());
    if (options.n_samples < 10 * largest)
        throw ConfigError("quantizer needs at least " + std::to_string(10 * largest) +
                          " training samples for grids of " + std::to_string(largest) + " points");

    const std::size_t q = model.q();
    const std::size_t dim = q + 1;
    const double s_scale = model.max_exit_time();

    std::vector<QuantizedStage> out;
    out.reserve(stages);
    {
        const ThetaSamples train = simulate_theta(model, options.n_samples, options.seed, Stream::QuantizerTrain);
        for (std::size_t k = 0; k < stages; ++k) {
            const auto coords = stage_coords(train, k, s_scale);
            auto book = initial_codebook(coords, dim, sizes[k]);
            clvq_pass(book, dim, coords, options.gamma0);
            const std::size_t m = book.size() / dim;
            std::vector<double> pi(m * q);
            std::vector<double> s(m);
            for (std::size_t j = 0; j < m; ++j) {
                std::copy_n(book.begin() + j * dim, q, pi.begin() + j * q);
                s[j] = book[j * dim + q] * s_scale;
            }
            out.push_back(make_stage(static_cast<int>(k), q, s_scale, std::move(pi), std::move(s)));
            out.back().dropped = sizes[k] - m;
        }
    }

    const ThetaSamples count = simulate_theta(model, options.n_count ? options.n_count : options.n_samples, options.seed, Stream::QuantizerCount);
    std::vector<std::vector<std::uint32_t>> idx(stages);
    for (std::size_t k = 0; k < stages; ++k) {
        idx[k] = project_all(out[k], count);
        prune(out[k], idx[k]);
        if (options.lloyd) centre_cells(out[k], idx[k], count);
    }
    for (std::size_t k = 0; k + 1 < stages; ++k) estimate_transitions(out[k], idx[k], idx[k + 1]);
    return out;
}

QuantError quant_error(const QuantizedStage& stage, const ThetaSamples& samples, double p)
{
    if (!(p >= 1.0)) throw DomainError("error norm exponent must be >= 1");
    const auto k = static_cast<std::size_t>(stage.k);
    const std::size_t q = stage.q;
    std::vector<double> e_joint(samples.n);
    std::vector<double> e_pi(samples.n);
    std::vector<double> e_s(samples.n);
    const auto n = static_cast<std::int64_t>(samples.n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto x = samples.pi_at(k, i);
        const double s = samples.s[k][i];
        const std::size_t j = stage.project(x, s);
        const auto g = stage.point_pi(j);
        double l1 = 0.0;
        double l2 = 0.0;
        for (std::size_t c = 0; c < q; ++c) {
            l1 += std::abs(x[c] - g[c]);
            l2 += (x[c] - g[c]) * (x[c] - g[c]);
        }
        const double ds = std::abs(s - stage.s[j]);
        const double dsn = ds / stage.s_scale;
        e_joint[i] = std::pow(std::sqrt(l2 + dsn * dsn), p);
        e_pi[i] = std::pow(l1, p);
        e_s[i] = std::pow(ds, p);
    }
    auto norm = [&](const std::vector<double>& v) {
        return samples.n ? std::pow(pairwise_sum(v) / static_cast<double>(samples.n), 1.0 / p) : 0.0;
    };
    return QuantError{norm(e_joint), norm(e_pi), norm(e_s)};
}

std::vector<QuantError> measure_errors(const std::vector<QuantizedStage>& stages,
                                       const PdmpModel& model, std::size_t n_eval,
                                       std::uint64_t seed, double p)
{
    const ThetaSamples held_out = simulate_theta(model, n_eval, seed, Stream::QuantizerError);
    std::vector<QuantError> out;
    out.reserve(stages.size());
    for (const auto& stage : stages) out.push_back(quant_error(stage, held_out, p));
    return out;
}

nlohmann::json stages_to_json(const std::vector<QuantizedStage>& stages)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& st : stages) {
        nlohmann::json pts = nlohmann::json::array();
        for (std::size_t j = 0; j < st.size(); ++j) {
            const auto p = st.point_pi(j);
            pts.push_back(std::vector<double>(p.begin(), p.end()));
        }
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : st.trans) rows.push_back({{"cols", r.cols}, {"probs", r.probs}});
        arr.push_back({{"k", st.k},
                       {"q", st.q},
                       {"s_scale", st.s_scale},
                       {"pi", std::move(pts)},
                       {"s", st.s},
                       {"weights", st.weights},
                       {"point_class", st.point_class},
                       {"class_weights", st.class_weights},
                       {"class_rep", st.class_rep},
                       {"trans", std::move(rows)},
                       {"dropped", st.dropped}});
    }
    return arr;
}

std::vector<QuantizedStage> stages_from_json(const nlohmann::json& j)
{
    std::vector<QuantizedStage> out;
    try {
        for (const auto& js : j) {
            QuantizedStage st;
            st.k = js.at("k").get<int>();
            st.q = js.at("q").get<std::size_t>();
            st.s_scale = js.at("s_scale").get<double>();
            for (const auto& p : js.at("pi")) {
                auto v = p.get<std::vector<double>>();
                if (v.size() != st.q) throw ConfigError("grid point with the wrong dimension");
                st.pi.insert(st.pi.end(), v.begin(), v.end());
            }
            st.s = js.at("s").get<std::vector<double>>();
            st.weights = js.at("weights").get<std::vector<double>>();
            st.point_class = js.at("point_class").get<std::vector<std::uint32_t>>();
            st.class_weights = js.at("class_weights").get<std::vector<double>>();
            st.class_rep = js.at("class_rep").get<std::vector<std::uint32_t>>();
            for (const auto& r : js.at("trans"))
                st.trans.push_back({r.at("cols").get<std::vector<std::uint32_t>>(),
                                    r.at("probs").get<std::vector<double>>()});
            st.dropped = js.value("dropped", std::size_t{0});
            if (st.pi.size() != st.q * st.s.size() || st.point_class.size() != st.s.size())
                throw ConfigError("inconsistent grid stage " + std::to_string(st.k));
            st.reindex();
            out.push_back(std::move(st));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed grid file: ") + e.what());
    }
    return out;
}

}  // namespace pdmp
