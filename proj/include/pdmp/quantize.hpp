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
#include <utility>
#include <vector>

#include "json.hpp"

#include "pdmp/model.hpp"
#include "pdmp/nearest.hpp"

namespace pdmp {

/// Samples of Theta_k = (Pi_k, S_k), k = 0..N, stored per stage.
struct ThetaSamples {
    std::size_t q = 0;
    std::size_t n = 0;
    std::vector<std::vector<double>> pi;  // stage -> n x q, row-major
    std::vector<std::vector<double>> s;   // stage -> n

    std::size_t stages() const { return s.size(); }
    std::span<const double> pi_at(std::size_t k, std::size_t i) const
    {
        return {pi[k].data() + i * q, q};
    }
};

/// Simulates `n_paths` chains with the filter attached, path i drawing from
/// the streams (seed, purpose, i). Independent of the thread count.
ThetaSamples simulate_theta(const PdmpModel& model, std::size_t n_paths, std::uint64_t seed,
                            Stream purpose);

/// Quantization grid Gamma_k of Theta_k with its empirical cell weights and
/// the transition estimate P(point j at k+1 | pi-class c at k).
///
/// Projections use the Euclidean metric on (pi^1, ..., pi^q, s / s_scale).
struct QuantizedStage {
    struct Row {
        std::vector<std::uint32_t> cols;
        std::vector<double> probs;
    };

    int k = 0;
    std::size_t q = 0;
    double s_scale = 1.0;
    std::vector<double> pi;  // points x q
    std::vector<double> s;
    std::vector<double> weights;
    std::vector<std::uint32_t> point_class;
    std::vector<double> class_weights;
    /// Index of the first point of each class; its pi is the class pi.
    std::vector<std::uint32_t> class_rep;
    /// One row per class; empty at the last stage.
    std::vector<Row> trans;
    /// Codebook points dropped for lack of visits.
    std::size_t dropped = 0;

    std::size_t size() const { return s.size(); }
    std::size_t classes() const { return class_rep.size(); }
    std::span<const double> point_pi(std::size_t j) const { return {pi.data() + j * q, q}; }
    std::span<const double> class_pi(std::size_t c) const { return point_pi(class_rep[c]); }

    /// Rebuilds the search index; call after editing the points.
    void reindex();
    std::size_t project(std::span<const double> pi_in, double s_in) const;

private:
    NearestIndex index_;
};

/// A stage holding the given codebook only (no weights, no transitions),
/// each point its own class. Used for baselines and hand-built stages.
QuantizedStage make_stage(int k, std::size_t q, double s_scale, std::vector<double> pi,
                          std::vector<double> s);

/// Groups points by bit-identical pi into classes, in order of first occurrence.
void assign_classes(QuantizedStage& stage);

struct ClvqOptions {
    /// Gamma_0 .. Gamma_N sizes; sizes[0] must be 1.
    std::vector<std::size_t> grid_sizes;
    std::size_t n_samples = 100000;
    /// Paths for the frozen counting pass; 0 means n_samples.
    std::size_t n_count = 0;
    std::uint64_t seed = 1;
    double gamma0 = 0.5;
    /// Finish with one Lloyd step: each point moves to the mean of the
    /// counting samples in its cell.
    bool lloyd = true;
};

/// Trains Gamma_0..Gamma_N by one online CLVQ pass per stage, then estimates
/// weights and transitions by a frozen pass over fresh samples. Unvisited
/// points are dropped (counted in QuantizedStage::dropped).
std::vector<QuantizedStage> clvq_train(const PdmpModel& model, const ClvqOptions& options);

/// Grid sizes [1, size, ..., size] for a horizon N.
std::vector<std::size_t> uniform_grid_sizes(int horizon, std::size_t size);

/// One online CLVQ pass on a codebook (points x dim, row-major), using the
/// samples in order. Exposed for testing.
void clvq_pass(std::vector<double>& codebook, std::size_t dim, std::span<const double> samples,
               double gamma0);

/// L^p quantization errors of one stage.
struct QuantError {
    double joint = 0.0;  // projection metric
    double pi = 0.0;     // L1 norm on the simplex
    double s = 0.0;      // |S - S_hat|
};

QuantError quant_error(const QuantizedStage& stage, const ThetaSamples& samples, double p);

/// Errors of every stage on `n_eval` fresh paths from the QuantizerError stream.
std::vector<QuantError> measure_errors(const std::vector<QuantizedStage>& stages,
                                       const PdmpModel& model, std::size_t n_eval,
                                       std::uint64_t seed, double p);

nlohmann::json stages_to_json(const std::vector<QuantizedStage>& stages);
std::vector<QuantizedStage> stages_from_json(const nlohmann::json& j);

}  // namespace pdmp
