// Copyright 2026 The simjoin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "simjoin/errors.hpp"

namespace simjoin {

/// Similarity threshold kept as an exact rational so every ceiling in the
/// filter arithmetic is computed in integers. Floating point at boundaries
/// like t=0.5 can shift the minimal overlap by one and break oracle
/// equivalence.
struct Threshold {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Threshold() = default;
    constexpr Threshold(std::int64_t n, std::int64_t d) : num(n), den(d) {}

    static Threshold make(std::int64_t num, std::int64_t den) {
        if (den <= 0 || num < 0 || num > den) {
            throw ConfigError("threshold must satisfy 0 <= num/den <= 1");
        }
        const std::int64_t g = std::gcd(num, den);
        return Threshold{num / g, den / g};
    }

    /// Accepts "0.8", ".5", "1", "0", or "7/11".
    static Threshold parse(std::string_view text);

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool positive() const { return num > 0; }
    bool operator==(const Threshold&) const = default;

    /// ceil(t * len).
    std::int64_t ceil_mul(std::int64_t len) const {
        return ceil_div(num * len, den);
    }

    /// ceil((1 - t) * len).
    std::int64_t ceil_one_minus_mul(std::int64_t len) const {
        return ceil_div((den - num) * len, den);
    }

    /// t * |x| <= |y| without rounding.
    bool length_compatible(std::int64_t len_x, std::int64_t len_y) const {
        return num * len_x <= den * len_y;
    }

    static constexpr std::int64_t ceil_div(std::int64_t n, std::int64_t d) {
        return (n + d - 1) / d; // n >= 0, d > 0
    }

    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

/// Probe prefix from the join loop: p = |x| - ceil(t*|x|) + 1.
inline std::int64_t probe_prefix_len(Threshold t, std::int64_t len) {
    return len - t.ceil_mul(len) + 1;
}

/// Prefix-filtering definition: ceil((1-t)*|x|) + 1. One longer than the
/// probe prefix whenever t*|x| is not integral.
inline std::int64_t filter_prefix_len(Threshold t, std::int64_t len) {
    return t.ceil_one_minus_mul(len) + 1;
}

} // namespace simjoin
