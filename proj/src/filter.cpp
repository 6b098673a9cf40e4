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

#include "pdmp/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdmp/errors.hpp"

namespace pdmp {

namespace {

std::string describe(std::span<const double> y, double s)
{
    std::ostringstream os;
    os.precision(17);
    os << "y = (";
    for (std::size_t c = 0; c < y.size(); ++c) os << (c ? ", " : "") << y[c];
    os << "), s = " << s;
    return os.str();
}

/// Normalises exp(log_prefactor_j + log f_W(y - phi(x_j))) by max-shift.
FilterState normalise(const PdmpModel& model, std::span<const double> prefactor,
                      std::span<const double> y, double s)
{
    const std::size_t q = model.q();
    std::vector<double> log_w(q);
    std::vector<double> resid(y.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q; ++j) {
        if (prefactor[j] <= 0.0) {
            log_w[j] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const auto phi = model.obs(j);
        for (std::size_t c = 0; c < y.size(); ++c) resid[c] = y[c] - phi[c];
        log_w[j] = std::log(prefactor[j]) + model.log_noise_density(resid);
        top = std::max(top, log_w[j]);
    }
    if (!std::isfinite(top)) throw DegenerateLikelihood("filter weights vanish at " + describe(y, s));

    FilterState out{std::vector<double>(q)};
    double total = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        out.probs[j] = std::exp(log_w[j] - top);
        total += out.probs[j];
    }
    for (double& p : out.probs) p /= total;
    return out;
}

}  // namespace

FilterState filter_init(const PdmpModel& model)
{
    return FilterState{model.initial_distribution()};
}

FilterState filter_step(const PdmpModel& model, const FilterState& pi, std::span<const double> y,
                        double s, bool boundary)
{
    const std::size_t q = model.q();
    if (pi.probs.size() != q) throw DomainError("filter state has the wrong dimension");
    if (y.size() != model.obs_dim()) throw DomainError("observation has the wrong dimension");
    if (!(s > 0.0) || s > model.max_exit_time())
        throw DomainError("inter-jump time outside (0, t*_q]: " + describe(y, s));

    const auto ts = model.exit_times();
    const auto [first, last] = std::equal_range(ts.begin(), ts.end(), s);
    std::vector<double> prefactor(q, 0.0);

    if (first != last) {
        const auto m0 = static_cast<std::size_t>(first - ts.begin());
        const auto m1 = static_cast<std::size_t>(last - ts.begin());
        if (m1 - m0 == 1) {
            // Boundary jump from x_m: the law of Z_n no longer depends on pi.
            prefactor = model.kernel(model.flow(model.point(m0), ts[m0]));
        } else {
            // Several points share this exit time; weigh them by pi.
            for (std::size_t m = m0; m < m1; ++m) {
                if (pi.probs[m] == 0.0) continue;
                const double w = pi.probs[m] * std::exp(-model.cum_hazard(m, ts[m]));
                const auto row = model.kernel(model.flow(model.point(m), ts[m]));
                for (std::size_t j = 0; j < q; ++j) prefactor[j] += w * row[j];
            }
        }
    } else {
        if (boundary) throw DomainError("boundary jump at a time matching no exit time: " + describe(y, s));
        // Only points whose exit time exceeds s can still be flowing at s.
        for (auto i = static_cast<std::size_t>(first - ts.begin()); i < q; ++i) {
            if (pi.probs[i] == 0.0) continue;
            const State x = model.flow(model.point(i), s);
            const double w = pi.probs[i] * model.rate(x) * std::exp(-model.cum_hazard(i, s));
            if (w == 0.0) continue;
            const auto row = model.kernel(x);
            for (std::size_t j = 0; j < q; ++j) prefactor[j] += w * row[j];
        }
    }
    return normalise(model, prefactor, y, s);
}

std::vector<FilterState> filter_path(const PdmpModel& model, const ChainPath& path)
{
    std::vector<FilterState> out;
    out.reserve(path.z.size());
    out.push_back(filter_init(model));
    for (std::size_t n = 1; n < path.z.size(); ++n)
        out.push_back(filter_step(model, out.back(), path.y[n], path.s[n], path.boundary[n]));
    return out;
}

}  // namespace pdmp
