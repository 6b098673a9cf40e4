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

#include "pdmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pdmp/errors.hpp"

namespace pdmp {

namespace {

constexpr double kProbTol = 1e-12;

double integrate(const std::function<double(double)>& f, double lo, double hi)
{
    if (hi <= lo) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, 1e-13);
}

void check_probability_vector(std::span<const double> p, std::size_t q, const char* what)
{
    if (p.size() != q) {
        std::ostringstream os;
        os << what << ": expected " << q << " probabilities, got " << p.size();
        throw ConfigError(os.str());
    }
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw ConfigError(std::string(what) + ": negative or NaN probability");
        total += v;
    }
    if (std::abs(total - 1.0) > kProbTol) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": probabilities sum to " << total;
        throw ConfigError(os.str());
    }
}

}  // namespace

Noise gaussian_noise(double variance, std::size_t dim)
{
    if (!(variance > 0.0)) throw ConfigError("noise variance must be positive");
    Noise noise;
    noise.dim = dim;
    noise.gaussian_variance = variance;
    const double log_norm = -0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * variance);
    noise.log_density = [variance, log_norm](std::span<const double> w) {
        double sq = 0.0;
        for (double c : w) sq += c * c;
        return log_norm - 0.5 * sq / variance;
    };
    const double sd = std::sqrt(variance);
    noise.sample = [sd](Rng& rng, std::span<double> out) {
        for (double& c : out) c = sd * rng.normal();
    };
    return noise;
}

PdmpModel::PdmpModel(ModelSpec spec)
    : flow_(std::move(spec.flow)),
      exit_time_(std::move(spec.exit_time)),
      rate_(std::move(spec.rate)),
      cum_hazard_(std::move(spec.cum_hazard)),
      inverse_hazard_(std::move(spec.inverse_hazard)),
      kernel_(std::move(spec.kernel)),
      noise_(std::move(spec.noise)),
      reward_(std::move(spec.reward)),
      reward_bound_(spec.reward_bound),
      reward_time_lipschitz_(spec.reward_time_lipschitz),
      rate_bound_(spec.rate_bound),
      reward_monotone_(spec.reward_monotone_along_flow),
      horizon_(spec.horizon)
{
    if (spec.points.empty()) throw ConfigError("model needs at least one post-jump point");
    if (!flow_ || !exit_time_ || !rate_ || !kernel_ || !spec.obs_map || !reward_ ||
        !noise_.log_density || !noise_.sample)
        throw ConfigError("model is missing a required characteristic");
    if (horizon_ < 1) throw ConfigError("horizon must be at least 1");
    if (!(rate_bound_ > 0.0)) throw ConfigError("rate bound must be positive");

    const std::size_t q = spec.points.size();
    const std::size_t d = spec.points.front().size();
    std::vector<double> raw_exit(q);
    for (std::size_t i = 0; i < q; ++i) {
        if (spec.points[i].size() != d) throw ConfigError("points have inconsistent dimension");
        raw_exit[i] = exit_time_(spec.points[i]);
        if (!(raw_exit[i] > 0.0) || !std::isfinite(raw_exit[i]))
            throw ConfigError("exit time t*(x) must be finite and positive for every point of E0");
    }

    original_of_sorted_.resize(q);
    std::iota(original_of_sorted_.begin(), original_of_sorted_.end(), std::size_t{0});
    std::stable_sort(original_of_sorted_.begin(), original_of_sorted_.end(),
                     [&](std::size_t a, std::size_t b) { return raw_exit[a] < raw_exit[b]; });
    sorted_of_original_.resize(q);
    for (std::size_t i = 0; i < q; ++i) sorted_of_original_[original_of_sorted_[i]] = i;

    points_.reserve(q);
    exit_times_.reserve(q);
    for (std::size_t i = 0; i < q; ++i) {
        points_.push_back(spec.points[original_of_sorted_[i]]);
        exit_times_.push_back(raw_exit[original_of_sorted_[i]]);
    }

    for (std::size_t i = 0; i < q; ++i) {
        obs_.push_back(spec.obs_map(points_[i]));
        if (obs_.back().size() != noise_.dim)
            throw ConfigError("observation map and noise dimensions differ");
    }

    // Kernel rows, hazard shape and rate bound along each flow segment.
    for (std::size_t i = 0; i < q; ++i) {
        const double ts = exit_times_[i];
        double previous = 0.0;
        for (int step = 0; step <= 16; ++step) {
            const double t = ts * step / 16.0;
            const State x = flow_(points_[i], t);
            check_probability_vector(kernel(x), q, "kernel Q(x, .)");
            const double r = rate_(x);
            if (!(r >= 0.0) || r > rate_bound_ * (1.0 + 1e-12))
                throw ConfigError("jump rate outside [0, rate bound] along the flow");
            const double h = cum_hazard(i, t);
            if (step == 0 && h != 0.0) throw ConfigError("cumulative hazard must vanish at t = 0");
            if (h < previous - 1e-12) throw ConfigError("cumulative hazard must be nondecreasing");
            if (h > rate_bound_ * t * (1.0 + 1e-9) + 1e-12)
                throw ConfigError("cumulative hazard exceeds rate bound times t");
            previous = h;
            if (std::abs(reward_(x)) > reward_bound_ * (1.0 + 1e-12))
                throw ConfigError("reward exceeds its declared bound along the flow");
        }
    }

    if (noise_.gaussian_variance) {
        // 1-D marginal of the isotropic density, other coordinates at zero.
        const double var = *noise_.gaussian_variance;
        const double half_width = 14.0 * std::sqrt(var);
        std::vector<double> w(noise_.dim, 0.0);
        const double mass = integrate(
            [&](double t) {
                w[0] = t;
                return std::exp(noise_.log_density(w));
            },
            -half_width, half_width);
        const double expected =
            std::pow(2.0 * std::numbers::pi * var, -0.5 * static_cast<double>(noise_.dim - 1));
        if (std::abs(mass - expected) > 1e-6 * expected)
            throw ConfigError("noise density does not integrate to one");
    }

    if (spec.initial_index >= q) throw ConfigError("initial point index out of range");
    initial_index_ = sorted_of_original_[spec.initial_index];
    initial_distribution_.assign(q, 0.0);
    if (spec.initial_distribution) {
        check_probability_vector(*spec.initial_distribution, q, "initial distribution");
        for (std::size_t i = 0; i < q; ++i)
            initial_distribution_[sorted_of_original_[i]] = (*spec.initial_distribution)[i];
        initial_point_mass_ =
            std::count_if(initial_distribution_.begin(), initial_distribution_.end(),
                          [](double p) { return p > 0.0; }) == 1;
        if (initial_point_mass_) {
            initial_index_ = static_cast<std::size_t>(
                std::max_element(initial_distribution_.begin(), initial_distribution_.end()) -
                initial_distribution_.begin());
        }
    } else {
        initial_distribution_[initial_index_] = 1.0;
    }
}

double PdmpModel::cum_hazard(std::size_t i, double t) const
{
    return cum_hazard_at(points_[i], t);
}

double PdmpModel::cum_hazard_at(const State& x, double t) const
{
    if (t == 0.0) return 0.0;
    if (cum_hazard_) return cum_hazard_(x, t);
    return integrate([&](double s) { return rate_(flow_(x, s)); }, 0.0, t);
}

std::vector<double> PdmpModel::kernel(const State& x) const
{
    std::vector<double> given = kernel_(x);
    if (given.size() != q()) throw ConfigError("kernel returned a vector of the wrong size");
    std::vector<double> sorted(q());
    for (std::size_t i = 0; i < q(); ++i) sorted[sorted_of_original_[i]] = given[i];
    return sorted;
}

double PdmpModel::noise_density(std::span<const double> w) const
{
    return std::exp(noise_.log_density(w));
}

ModelSpec example_spec(const ExampleParams& p)
{
    if (!(p.a > 0.0) || !(p.v > 0.0)) throw ConfigError("example model needs a > 0 and v > 0");
    if (p.points.empty()) throw ConfigError("example model needs at least one point");
    for (double x : p.points)
        if (!(x >= 0.0 && x < 1.0)) throw ConfigError("example model points must lie in [0, 1)");

    const auto x0 = std::find(p.points.begin(), p.points.end(), p.x0);
    if (x0 == p.points.end()) throw ConfigError("x0 must be one of the points");

    const double a = p.a;
    const double v = p.v;
    const std::size_t q = p.points.size();

    ModelSpec spec;
    for (double x : p.points) spec.points.push_back({x});
    spec.flow = [v](const State& x, double t) { return State{x[0] + v * t}; };
    spec.exit_time = [v](const State& x) { return (1.0 - x[0]) / v; };
    spec.rate = [a](const State& x) { return a * x[0]; };
    spec.cum_hazard = [a, v](const State& x, double t) { return a * (x[0] * t + 0.5 * v * t * t); };
    // Root of (a v / 2) t^2 + a x t - h = 0, written to avoid cancellation.
    spec.inverse_hazard = [a, v](const State& x, double h) {
        const double c = h / a;
        return 2.0 * c / (x[0] + std::sqrt(x[0] * x[0] + 2.0 * v * c));
    };
    spec.kernel = [q](const State&) { return std::vector<double>(q, 1.0 / static_cast<double>(q)); };
    spec.obs_map = [](const State& x) { return std::vector<double>{x[0]}; };
    spec.noise = gaussian_noise(p.sigma2, 1);
    spec.reward = [](const State& x) { return x[0]; };
    spec.reward_bound = 1.0;
    spec.reward_time_lipschitz = v;
    spec.rate_bound = a;
    spec.reward_monotone_along_flow = true;
    spec.horizon = p.horizon;
    spec.initial_index = static_cast<std::size_t>(x0 - p.points.begin());
    spec.initial_distribution = p.initial_distribution;
    return spec;
}

PdmpModel example_model(const ExampleParams& params)
{
    return PdmpModel(example_spec(params));
}

double cum_hazard_generic(const PdmpModel& model, std::size_t z, double t)
{
    if (z >= model.q()) throw DomainError("post-jump index out of range");
    if (!(t >= 0.0) || t > model.exit_time(z)) {
        std::ostringstream os;
        os << "cumulative hazard requested at t = " << t << " outside [0, " << model.exit_time(z) << "]";
        throw DomainError(os.str());
    }
    return model.cum_hazard(z, t);
}

JumpDraw sample_jump_time(const PdmpModel& model, std::size_t z, double u)
{
    if (!(u > 0.0 && u <= 1.0)) throw DomainError("jump-time draw must lie in (0, 1]");
    const double ts = model.exit_time(z);
    const double boundary_mass = std::exp(-model.cum_hazard(z, ts));
    if (u <= boundary_mass) return {ts, true};

    const double target = -std::log(u);
    if (target == 0.0) return {0.0, false};

    double t;
    if (model.has_closed_form_inverse()) {
        t = model.inverse_hazard(model.point(z), target);
    } else {
        double lo = 0.0;
        double hi = ts;
        if (model.cum_hazard(z, hi) < target) throw NumericError("jump-time bisection failed to bracket");
        for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (model.cum_hazard(z, mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        t = 0.5 * (lo + hi);
    }
    // A natural jump happens strictly before t*.
    if (t >= ts) t = std::nextafter(ts, 0.0);
    if (t < 0.0) t = 0.0;
    return {t, false};
}

std::size_t sample_categorical(std::span<const double> probs, double u)
{
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        if (probs[j] <= 0.0) continue;
        acc += probs[j];
        last_positive = j;
        if (u < acc) return j;
    }
    return last_positive;
}

ChainPath simulate_chain(const PdmpModel& model, PathStreams& streams)
{
    const int n_steps = model.horizon();
    ChainPath path;
    path.z.reserve(n_steps + 1);
    path.s.reserve(n_steps + 1);
    path.y.reserve(n_steps + 1);
    path.boundary.reserve(n_steps + 1);

    std::size_t z = model.initial_is_point_mass()
                        ? model.initial_index()
                        : sample_categorical(model.initial_distribution(), streams.dynamics.uniform());
    path.z.push_back(z);
    path.s.push_back(0.0);
    path.y.emplace_back(model.obs(z).begin(), model.obs(z).end());
    path.boundary.push_back(false);

    std::vector<double> noise(model.obs_dim());
    for (int n = 1; n <= n_steps; ++n) {
        const JumpDraw jump = sample_jump_time(model, z, streams.dynamics.uniform());
        const State pre_jump = model.flow(model.point(z), jump.time);
        z = sample_categorical(model.kernel(pre_jump), streams.dynamics.uniform());
        model.sample_noise(streams.noise, noise);
        std::vector<double> y(model.obs(z).begin(), model.obs(z).end());
        for (std::size_t c = 0; c < y.size(); ++c) y[c] += noise[c];

        path.z.push_back(z);
        path.s.push_back(jump.time);
        path.y.push_back(std::move(y));
        path.boundary.push_back(jump.boundary);
    }
    return path;
}

double trajectory_value_sup(const PdmpModel& model, const ChainPath& path)
{
    const std::size_t n = path.steps();
    double best = model.reward(model.point(path.z[n]));
    const double step = model.max_exit_time() / 1000.0;
    for (std::size_t k = 0; k < n; ++k) {
        const State& x = model.point(path.z[k]);
        const double len = path.s[k + 1];
        // Left limit at the end of the segment; the flow is continuous.
        best = std::max(best, model.reward(model.flow(x, len)));
        best = std::max(best, model.reward(x));
        if (!model.reward_monotone_along_flow()) {
            for (double t = step; t < len; t += step) best = std::max(best, model.reward(model.flow(x, t)));
        }
    }
    return best;
}

}  // namespace pdmp
