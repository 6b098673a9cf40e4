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

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace pdmp {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Purpose tag of an RNG stream. Streams with different purposes (or
/// different indices within a purpose) never share a Philox counter.
enum class Stream : std::uint32_t {
    Simulation = 1,
    QuantizerTrain = 2,
    QuantizerCount = 3,
    QuantizerError = 4,
    Evaluation = 5,
    Supremum = 6,
    Oracle = 7,
};

/// Counter-based generator keyed by (seed, purpose, index).
///
/// The 128-bit Philox counter is laid out as
///   [block lo, block hi, index lo, (index hi & 0xffffff) | tag << 24]
/// so every (purpose, index) pair owns a disjoint 2^64-block sequence.
/// Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    Rng(std::uint64_t seed, Stream purpose, std::uint64_t index, bool noise = false);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();

    double normal() { return normal_(*this); }

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint32_t index_lo_;
    std::uint32_t index_hi_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int next_ = 4;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// The two independent draws a simulated path consumes: the jump dynamics
/// (inter-jump times, post-jump locations) and the observation noise.
struct PathStreams {
    Rng dynamics;
    Rng noise;

    PathStreams(std::uint64_t seed, Stream purpose, std::uint64_t path)
        : dynamics(seed, purpose, path, false), noise(seed, purpose, path, true)
    {}
};

}  // namespace pdmp
