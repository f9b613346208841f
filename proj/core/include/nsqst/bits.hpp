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

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace nsqst {

/// Computational-basis label. Qubit 0 is the leftmost character of the
/// printed string and the most significant bit of the integer value, so the
/// integer doubles as the amplitude index of a dense state vector.
using BitString = std::uint64_t;

inline constexpr int kMaxDenseQubits = 12;

inline int bit_at(BitString s, int qubit, int n) {
    return static_cast<int>((s >> (n - 1 - qubit)) & 1u);
}

inline BitString flip_bit(BitString s, int qubit, int n) {
    return s ^ (BitString{1} << (n - 1 - qubit));
}

/// Index-space mask of a single qubit.
inline BitString qubit_mask(int qubit, int n) {
    return BitString{1} << (n - 1 - qubit);
}

inline int parity(std::uint64_t v) {
    return std::popcount(v) & 1;
}

/// Converts between index order (qubit 0 most significant) and lane order
/// (qubit q at bit q). The map is an involution.
inline std::uint64_t reverse_bits(std::uint64_t v, int n) {
    std::uint64_t r = 0;
    for (int q = 0; q < n; ++q) {
        r |= ((v >> q) & 1u) << (n - 1 - q);
    }
    return r;
}

std::string to_string(BitString s, int n);
BitString parse_bits(std::string_view text);

}  // namespace nsqst
