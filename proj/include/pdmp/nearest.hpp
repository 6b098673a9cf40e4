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
#include <vector>

namespace pdmp {

/// Exact Euclidean nearest-neighbour search over a frozen point set
/// (kd-tree with bucket leaves). Ties resolve to the lowest point index, so
/// results match a brute-force scan.
class NearestIndex {
public:
    NearestIndex() = default;
    NearestIndex(std::vector<double> coords, std::size_t dim);

    std::size_t size() const { return dim_ ? coords_.size() / dim_ : 0; }
    std::size_t dim() const { return dim_; }

    std::size_t nearest(std::span<const double> x) const;
    /// Index of the nearest point and its squared distance.
    std::size_t nearest(std::span<const double> x, double& dist2) const;

private:
    struct Node {
        std::uint32_t begin;
        std::uint32_t end;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t axis = 0;
        double split = 0.0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, std::span<const double> x, std::size_t& best, double& best_d2) const;

    std::vector<double> coords_;
    std::size_t dim_ = 0;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

/// Brute-force reference with the same tie rule.
std::size_t nearest_brute_force(std::span<const double> coords, std::size_t dim,
                                std::span<const double> x);

}  // namespace pdmp
