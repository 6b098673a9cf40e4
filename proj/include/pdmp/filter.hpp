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

#include <span>
#include <vector>

#include "pdmp/model.hpp"

namespace pdmp {

/// Conditional law of Z_n over the sorted E0 given the observations up to T_n.
struct FilterState {
    std::vector<double> probs;
};

FilterState filter_init(const PdmpModel& model);

/// One step of the exact recursive filter: Pi_n from Pi_{n-1}, the new
/// observation y = Y_n and inter-jump time s = S_n.
///
/// A time equal to some t*_m is handled by the boundary branch even when
/// `boundary` is false; `boundary` set with a time matching no exit time is a
/// DomainError. Throws DegenerateLikelihood when every weight vanishes.
FilterState filter_step(const PdmpModel& model, const FilterState& pi, std::span<const double> y,
                        double s, bool boundary);

/// Filter states Pi_0..Pi_n along a simulated path.
std::vector<FilterState> filter_path(const PdmpModel& model, const ChainPath& path);

}  // namespace pdmp
