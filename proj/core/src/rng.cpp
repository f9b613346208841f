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

#include "nsqst/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nsqst/bits.hpp"

namespace nsqst {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("Rng::below: bound must be positive");
    }
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % bound;
}

double Rng::normal() {
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t a,
                          std::uint64_t b) {
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ fnv1a(stream));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ (b * 0xd1342543de82ef95ULL));
    return h;
}

std::string to_string(BitString s, int n) {
    std::string out(static_cast<std::size_t>(n), '0');
    for (int q = 0; q < n; ++q) {
        if (bit_at(s, q, n)) {
            out[static_cast<std::size_t>(q)] = '1';
        }
    }
    return out;
}

BitString parse_bits(std::string_view text) {
    if (text.empty() || text.size() > 64) {
        throw std::invalid_argument("parse_bits: expected 1..64 characters");
    }
    BitString s = 0;
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("parse_bits: invalid character in '" + std::string(text) + "'");
        }
        s = (s << 1) | static_cast<BitString>(c == '1');
    }
    return s;
}

}  // namespace nsqst
