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
#include <span>

namespace pdmp {

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> x);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Sample mean and standard error, both accumulated pairwise.
MeanEstimate mean_estimate(std::span<const double> x);

/// Number of OpenMP threads to use (1 when built without OpenMP).
void set_thread_count(int threads);
int thread_count();

}  // namespace pdmp
