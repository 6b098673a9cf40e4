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

#include "pdmp/nearest.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace pdmp {

namespace {

constexpr std::uint32_t kLeafSize = 8;

inline double dist2(const double* a, std::span<const double> x)
{
    double d = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
        const double diff = a[c] - x[c];
        d += diff * diff;
    }
    return d;
}

}  // namespace

NearestIndex::NearestIndex(std::vector<double> coords, std::size_t dim)
    : coords_(std::move(coords)), dim_(dim)
{
    const auto n = static_cast<std::uint32_t>(size());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    if (n > 0) {
        nodes_.reserve(2 * (n / kLeafSize + 1));
        build(0, n);
    }
}

std::int32_t NearestIndex::build(std::uint32_t begin, std::uint32_t end)
{
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    // Split on the axis of largest spread at the median.
    std::uint32_t axis = 0;
    double widest = -1.0;
    for (std::uint32_t c = 0; c < dim_; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::uint32_t i = begin; i < end; ++i) {
            const double v = coords_[order_[i] * dim_ + c];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > widest) {
            widest = hi - lo;
            axis = c;
        }
    }
    if (widest <= 0.0) return id;  // all coincide: keep as a leaf

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return coords_[a * dim_ + axis] < coords_[b * dim_ + axis];
                     });
    const double split = coords_[order_[mid] * dim_ + axis];
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void NearestIndex::search(std::int32_t id, std::span<const double> x, std::size_t& best,
                          double& best_d2) const
{
    const Node& node = nodes_[id];
    if (node.left < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const std::uint32_t p = order_[i];
            const double d = dist2(&coords_[p * dim_], x);
            if (d < best_d2 || (d == best_d2 && p < best)) {
                best_d2 = d;
                best = p;
            }
        }
        return;
    }
    // Left subtree holds coordinates <= split, right subtree >= split.
    const double diff = x[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    search(near, x, best, best_d2);
    if (diff * diff <= best_d2) search(far, x, best, best_d2);
}

std::size_t NearestIndex::nearest(std::span<const double> x, double& d2) const
{
    std::size_t best = std::numeric_limits<std::size_t>::max();
    d2 = std::numeric_limits<double>::infinity();
    if (!nodes_.empty()) search(0, x, best, d2);
    return best;
}

std::size_t NearestIndex::nearest(std::span<const double> x) const
{
    double d2;
    return nearest(x, d2);
}

std::size_t nearest_brute_force(std::span<const double> coords, std::size_t dim,
                                std::span<const double> x)
{
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p * dim < coords.size(); ++p) {
        const double d = dist2(&coords[p * dim], x);
        if (d < best_d2) {
            best_d2 = d;
            best = p;
        }
    }
    return best;
}

}  // namespace pdmp
