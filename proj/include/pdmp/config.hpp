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
#include <optional>
#include <string>
#include <vector>

#include "pdmp/dp.hpp"
#include "pdmp/model.hpp"

namespace pdmp {

/// Run configuration read from a flat key = value file.
///
/// Required keys: points, x0, a, v, sigma2, horizon, seed. Optional keys
/// (defaults in brackets): prior [point mass at x0], grid_sizes [none],
/// train_paths [100000], count_paths [= train_paths], error_paths [100000],
/// eval_paths [1000000], sup_paths [1000000], sim_paths [10000], p [2],
/// safety [0.05], delta [chosen from errors], survival [conditional],
/// gamma0 [0.5], threads [0 = OpenMP default].
struct RunConfig {
    ExampleParams model;
    std::uint64_t seed = 1;
    std::vector<std::size_t> grid_sizes;
    std::size_t train_paths = 100000;
    std::size_t count_paths = 0;
    std::size_t error_paths = 100000;
    std::size_t eval_paths = 1000000;
    std::size_t sup_paths = 1000000;
    std::size_t sim_paths = 10000;
    double p = 2.0;
    double safety = 0.05;
    std::optional<double> delta;
    Survival survival = Survival::Conditional;
    double gamma0 = 0.5;
    int threads = 0;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

/// "50,1000" or "50 1000" -> {50, 1000}.
std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace pdmp
