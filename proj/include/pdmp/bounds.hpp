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

#include <vector>

#include "pdmp/model.hpp"

namespace pdmp {

/// Lipschitz bounds [v_n] = (2^{N-n+2} - 3) C_g for n = 0..N.
std::vector<double> lipschitz_constants(const PdmpModel& model);
std::vector<double> lipschitz_constants(int horizon, double reward_bound);

struct BoundInputs {
    /// ||Pi_n - Pi_hat_n||_p and ||S_n - S_hat_n||_p for n = 0..N.
    std::vector<double> pi_error;
    std::vector<double> s_error;
    double reward_bound = 0.0;           // C_g
    double rate_bound = 0.0;             // C_lambda
    double reward_time_lipschitz = 0.0;  // [g]_2
    int horizon = 0;
    double delta = 0.0;
    /// Upper limit on delta from the exit-time gaps; <= 0 skips the check.
    double delta_upper = 0.0;
};

BoundInputs bound_inputs(const PdmpModel& model, std::vector<double> pi_error,
                         std::vector<double> s_error, double delta);

struct BoundReport {
    double value_bound = 0.0;   // bound on |V_0 - V_hat_0|
    double policy_bound = 0.0;  // bound on |V_0 - V_bar_0|
    /// Per-step bounds on ||V_n - V_hat_n||_p, n = 0..N.
    std::vector<double> value_steps;
};

/// Sums the per-step error inequalities from n = N-1 down to 0, starting
/// from ||V_N - V_hat_N|| <= C_g ||Pi_N - Pi_hat_N||. Throws DeltaInfeasible
/// when delta violates either of its conditions.
BoundReport theoretical_bound(const BoundInputs& in);

/// max(|vbar0 - vhat0|, |sup - vhat0|).
double empirical_bound(double vbar0, double vhat0, double sup_estimate);

}  // namespace pdmp
