// Copyright 2026 The NSQST Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>

namespace nsqst {

/// Deterministic 64-bit generator. Distribution helpers are implemented here
/// instead of through <random> distributions so that streams are identical
/// across standard-library implementations.
class Rng {
   public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    bool bit() { return (engine_() >> 63) != 0; }
    /// Unbiased integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

   private:
    std::mt19937_64 engine_;
};

/// Named substream of a root seed. Components draw from
/// derive_seed(root, "clifford", iteration, index) and similar, so any part of
/// a run can be replayed without replaying the others.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t a = 0,
                          std::uint64_t b = 0);

inline Rng substream(std::uint64_t root, std::string_view stream, std::uint64_t a = 0,
                     std::uint64_t b = 0) {
    return Rng(derive_seed(root, stream, a, b));
}

}  // namespace nsqst
