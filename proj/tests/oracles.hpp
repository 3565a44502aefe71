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

// Independent reference implementations the tests check the library
// against. These deliberately share no code with the production paths.

#pragma once

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "simjoin/dataset.hpp"
#include "simjoin/ppjoin.hpp"
#include "simjoin/threshold.hpp"

namespace oracles {

/// Plain sliding-window n-grams over '_'+lower(text)+'_' as a std::set.
inline std::set<std::string> ngrams(const std::string& raw, int n) {
    std::string text;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!text.empty() && text.back() != ' ') text.push_back(' ');
        } else {
            text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    const std::string padded = "_" + text + "_";
    std::set<std::string> grams;
    for (std::size_t i = 0; i + n <= padded.size(); ++i) grams.insert(padded.substr(i, n));
    return grams;
}

inline std::size_t intersection_size(const std::set<std::string>& a,
                                     const std::set<std::string>& b) {
    std::size_t count = 0;
    for (const auto& x : a) count += b.count(x);
    return count;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    const std::size_t inter = intersection_size(a, b);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

/// Double-loop threshold join over token sets, exact rational comparison.
inline simjoin::MatchSet threshold_join(const std::vector<simjoin::TokenSet>& sets,
                                        simjoin::Threshold t, bool cross_only) {
    simjoin::MatchSet out;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        std::set<std::string> a(sets[i].tokens.begin(), sets[i].tokens.end());
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            if (cross_only && sets[i].owner_id == sets[j].owner_id) continue;
            std::set<std::string> b(sets[j].tokens.begin(), sets[j].tokens.end());
            const auto inter = static_cast<std::int64_t>(intersection_size(a, b));
            const auto uni = static_cast<std::int64_t>(a.size() + b.size()) - inter;
            if (inter * t.den >= t.num * uni) {
                out.emplace(sets[i].record_id, sets[j].record_id);
            }
        }
    }
    return out;
}

/// A two-owner synthetic corpus for equivalence checks.
inline std::vector<simjoin::Dataset> two_party_corpus(std::uint64_t seed, std::size_t total,
                                                      double corruption = 0.1) {
    const std::size_t dups = std::max<std::size_t>(1, total / 5);
    const std::size_t originals = total - dups;
    simjoin::SyntheticData data =
        simjoin::generate_synthetic(seed, originals, dups, corruption);
    return simjoin::split_dataset(data.dataset, {originals, dups});
}

} // namespace oracles
