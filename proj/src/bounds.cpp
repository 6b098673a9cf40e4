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

#include "pdmp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdmp/dp.hpp"
#include "pdmp/errors.hpp"

namespace pdmp {

std::vector<double> lipschitz_constants(int horizon, double reward_bound)
{
    std::vector<double> lv(static_cast<std::size_t>(horizon) + 1);
    for (int n = 0; n <= horizon; ++n) lv[n] = (std::ldexp(1.0, horizon - n + 2) - 3.0) * reward_bound;
    return lv;
}

std::vector<double> lipschitz_constants(const PdmpModel& model)
{
    return lipschitz_constants(model.horizon(), model.reward_bound());
}

BoundInputs bound_inputs(const PdmpModel& model, std::vector<double> pi_error,
                         std::vector<double> s_error, double delta)
{
    BoundInputs in;
    in.pi_error = std::move(pi_error);
    in.s_error = std::move(s_error);
    in.reward_bound = model.reward_bound();
    in.rate_bound = model.rate_bound();
    in.reward_time_lipschitz = model.reward_time_lipschitz();
    in.horizon = model.horizon();
    in.delta = delta;
    in.delta_upper = delta_upper_bound(model);
    return in;
}

BoundReport theoretical_bound(const BoundInputs& in)
{
    const auto n_max = static_cast<std::size_t>(in.horizon);
    if (in.pi_error.size() != n_max + 1 || in.s_error.size() != n_max + 1)
        throw DomainError("bound inputs need errors for steps 0..N");
    for (std::size_t n = 0; n <= n_max; ++n)
        if (in.pi_error[n] < 0.0 || in.s_error[n] < 0.0) throw DomainError("negative quantization error");

    if (in.delta_upper > 0.0 && !(in.delta < in.delta_upper)) {
        std::ostringstream os;
        os << "time step " << in.delta << " not below " << in.delta_upper;
        throw DeltaInfeasible(os.str());
    }
    const double root = std::sqrt(2.0 * in.rate_bound);
    for (std::size_t n = 1; n <= n_max; ++n) {
        if (!(in.delta > std::sqrt(in.s_error[n]) / root)) {
            std::ostringstream os;
            os << "time step " << in.delta << " too small for inter-jump error " << in.s_error[n] << " at step " << n;
            throw DeltaInfeasible(os.str());
        }
    }

    const double cg = in.reward_bound;
    const auto lv = lipschitz_constants(in.horizon, cg);
    const double a = in.reward_time_lipschitz + 2.0 * cg * in.rate_bound;
    const double b = 2.0 * cg * root;

    BoundReport out;
    out.value_steps.assign(n_max + 1, 0.0);
    out.value_steps[n_max] = cg * in.pi_error[n_max];
    for (std::size_t n = n_max; n-- > 0;) {
        const double c = lv[n] + 4.0 * cg + 2.0 * lv[n + 1];
        out.value_steps[n] = out.value_steps[n + 1] + a * in.delta + b * std::sqrt(in.s_error[n + 1]) +
                             c * in.pi_error[n] + 2.0 * lv[n + 1] * in.pi_error[n + 1];
    }
    out.value_bound = out.value_steps[0];

    // Policy error: ||V_N - V_bar_N|| = 0, then the analogous per-step sum.
    double policy = 0.0;
    for (std::size_t n = n_max; n-- > 0;) {
        const double d = 7.0 * cg + 4.0 * lv[n + 1];
        policy += out.value_steps[n] + out.value_steps[n + 1] + d * in.pi_error[n] +
                  2.0 * lv[n + 1] * in.pi_error[n + 1] + b * std::sqrt(in.s_error[n + 1]);
    }
    out.policy_bound = policy;
    return out;
}

double empirical_bound(double vbar0, double vhat0, double sup_estimate)
{
    return std::max(std::abs(vbar0 - vhat0), std::abs(sup_estimate - vhat0));
}

}  // namespace pdmp
