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

#include "simjoin/threshold.hpp"

#include <cctype>

namespace simjoin {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

} // namespace

Threshold Threshold::parse(std::string_view text) {
    if (text.empty()) throw ConfigError("empty threshold");

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto n = text.substr(0, slash);
        auto d = text.substr(slash + 1);
        if (!all_digits(n) || !all_digits(d)) {
            throw ConfigError("bad rational threshold: " + std::string(text));
        }
        return make(std::stoll(std::string(n)), std::stoll(std::string(d)));
    }

    auto dot = text.find('.');
    if (dot == std::string_view::npos) {
        if (!all_digits(text)) throw ConfigError("bad threshold: " + std::string(text));
        return make(std::stoll(std::string(text)), 1);
    }

    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (!all_digits(whole) || (!frac.empty() && !all_digits(frac))) {
        throw ConfigError("bad threshold: " + std::string(text));
    }
    if (frac.size() > 9) frac = frac.substr(0, 9); // more precision than any t we use

    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    std::int64_t num = std::stoll(std::string(whole)) * den +
                       (frac.empty() ? 0 : std::stoll(std::string(frac)));
    return make(num, den);
}

} // namespace simjoin
