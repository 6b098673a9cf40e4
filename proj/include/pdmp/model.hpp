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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pdmp/rng.hpp"

namespace pdmp {

using State = std::vector<double>;

/// Observation noise W with a density on R^d.
struct Noise {
    std::size_t dim = 1;
    std::function<double(std::span<const double>)> log_density;
    std::function<void(Rng&, std::span<double>)> sample;
    /// Per-coordinate variance when the noise is isotropic Gaussian, else empty.
    std::optional<double> gaussian_variance;
};

/// Isotropic centred Gaussian noise N(0, variance * I_dim).
Noise gaussian_noise(double variance, std::size_t dim = 1);

/// User-facing description of a problem instance. Points may be given in any
/// order; PdmpModel sorts them by exit time. `kernel` returns probabilities
/// aligned with `points` as given here.
struct ModelSpec {
    std::vector<State> points;
    std::function<State(const State&, double)> flow;
    std::function<double(const State&)> exit_time;
    std::function<double(const State&)> rate;
    /// Optional closed form of the cumulative hazard along the flow.
    std::function<double(const State&, double)> cum_hazard;
    /// Optional closed-form inverse: the t in (0, t*(x)) with Lambda(x, t) = h.
    std::function<double(const State&, double)> inverse_hazard;
    std::function<std::vector<double>(const State&)> kernel;
    std::function<std::vector<double>(const State&)> obs_map;
    Noise noise;
    std::function<double(const State&)> reward;
    double reward_bound = 0.0;
    double reward_time_lipschitz = 0.0;
    double rate_bound = 0.0;
    /// g(Phi(x, t)) nondecreasing in t for every x in E0.
    bool reward_monotone_along_flow = false;
    int horizon = 1;
    std::size_t initial_index = 0;
    /// Prior on Z_0 replacing the point mass at `initial_index`.
    std::optional<std::vector<double>> initial_distribution;
};

/// Immutable PDMP problem instance over the finite post-jump set E0, with
/// points ordered so that t*_1 <= ... <= t*_q. Safe to share across threads.
class PdmpModel {
public:
    explicit PdmpModel(ModelSpec spec);

    std::size_t q() const { return points_.size(); }
    std::size_t state_dim() const { return points_.front().size(); }
    std::size_t obs_dim() const { return noise_.dim; }
    int horizon() const { return horizon_; }

    const State& point(std::size_t i) const { return points_[i]; }
    /// Exit times t*_1 <= ... <= t*_q.
    std::span<const double> exit_times() const { return exit_times_; }
    double exit_time(std::size_t i) const { return exit_times_[i]; }
    /// t*_q, the largest exit time.
    double max_exit_time() const { return exit_times_.back(); }
    /// Position in the sorted order of the i-th point as originally given.
    std::size_t sorted_index(std::size_t original) const { return sorted_of_original_[original]; }

    State flow(const State& x, double t) const { return flow_(x, t); }
    double rate(const State& x) const { return rate_(x); }
    double exit_time_of(const State& x) const { return exit_time_(x); }
    /// Lambda(x_i, t) for a point of E0; t must lie in [0, t*_i].
    double cum_hazard(std::size_t i, double t) const;
    /// Lambda(x, t) for an arbitrary x, closed form or quadrature.
    double cum_hazard_at(const State& x, double t) const;
    bool has_closed_form_hazard() const { return static_cast<bool>(cum_hazard_); }
    bool has_closed_form_inverse() const { return static_cast<bool>(inverse_hazard_); }
    double inverse_hazard(const State& x, double h) const { return inverse_hazard_(x, h); }

    /// Q(x, .) as a probability vector over the sorted E0.
    std::vector<double> kernel(const State& x) const;

    double log_noise_density(std::span<const double> w) const { return noise_.log_density(w); }
    double noise_density(std::span<const double> w) const;
    void sample_noise(Rng& rng, std::span<double> out) const { noise_.sample(rng, out); }
    const Noise& noise() const { return noise_; }

    /// phi(x_i), precomputed.
    std::span<const double> obs(std::size_t i) const { return obs_[i]; }

    double reward(const State& x) const { return reward_(x); }
    double reward_bound() const { return reward_bound_; }
    double reward_time_lipschitz() const { return reward_time_lipschitz_; }
    double rate_bound() const { return rate_bound_; }
    bool reward_monotone_along_flow() const { return reward_monotone_; }

    std::size_t initial_index() const { return initial_index_; }
    /// Pi_0 over the sorted E0.
    const std::vector<double>& initial_distribution() const { return initial_distribution_; }
    bool initial_is_point_mass() const { return initial_point_mass_; }

private:
    std::vector<State> points_;
    std::vector<double> exit_times_;
    std::vector<std::size_t> sorted_of_original_;
    std::vector<std::size_t> original_of_sorted_;
    std::vector<std::vector<double>> obs_;
    std::function<State(const State&, double)> flow_;
    std::function<double(const State&)> exit_time_;
    std::function<double(const State&)> rate_;
    std::function<double(const State&, double)> cum_hazard_;
    std::function<double(const State&, double)> inverse_hazard_;
    std::function<std::vector<double>(const State&)> kernel_;
    Noise noise_;
    std::function<double(const State&)> reward_;
    double reward_bound_;
    double reward_time_lipschitz_;
    double rate_bound_;
    bool reward_monotone_;
    int horizon_;
    std::size_t initial_index_;
    std::vector<double> initial_distribution_;
    bool initial_point_mass_ = true;
};

/// Parameters of the built-in one-dimensional example: E = [0, 1),
/// Phi(x, t) = x + v t, lambda(x) = a x, Q uniform on E0, Gaussian
/// observation noise, g(x) = x.
struct ExampleParams {
    std::vector<double> points{0.0, 0.25, 0.5};
    double x0 = 0.0;
    double a = 3.0;
    double v = 1.0;
    double sigma2 = 0.25;
    int horizon = 9;
    std::optional<std::vector<double>> initial_distribution;
};

ModelSpec example_spec(const ExampleParams& params);
PdmpModel example_model(const ExampleParams& params = {});

/// Embedded chain of one simulated trajectory, n = 0..N.
struct ChainPath {
    std::vector<std::size_t> z;
    std::vector<double> s;
    std::vector<std::vector<double>> y;
    std::vector<bool> boundary;

    std::size_t steps() const { return z.empty() ? 0 : z.size() - 1; }
};

struct JumpDraw {
    double time;
    bool boundary;
};

/// Generalised inverse of the survival function of the next inter-jump time
/// from x_z, evaluated at u in (0, 1]. Boundary jumps return the stored t*
/// bit-exactly.
JumpDraw sample_jump_time(const PdmpModel& model, std::size_t z, double u);

/// Lambda(x_z, t); throws DomainError outside [0, t*(x_z)].
double cum_hazard_generic(const PdmpModel& model, std::size_t z, double t);

/// Index drawn from a probability vector with one uniform.
std::size_t sample_categorical(std::span<const double> probs, double u);

ChainPath simulate_chain(const PdmpModel& model, PathStreams& streams);

/// sup over [0, T_N] of g(X_t) along the path.
double trajectory_value_sup(const PdmpModel& model, const ChainPath& path);

}  // namespace pdmp
