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

#include "pdmp/stats.hpp"

#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pdmp {

double pairwise_sum(std::span<const double> x)
{
    if (x.size() <= 32) {
        double acc = 0.0;
        for (double v : x) acc += v;
        return acc;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

MeanEstimate mean_estimate(std::span<const double> x)
{
    MeanEstimate out;
    out.n = x.size();
    if (x.empty()) return out;
    out.mean = pairwise_sum(x) / static_cast<double>(x.size());
    if (x.size() < 2) return out;
    std::vector<double> dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - out.mean) * (x[i] - out.mean);
    const double var = pairwise_sum(dev) / static_cast<double>(x.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(x.size()));
    return out;
}

void set_thread_count(int threads)
{
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

int thread_count()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace pdmp
