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

#include "simjoin/ppjoin.hpp"

#include <algorithm>
#include <fstream>

#include "simjoin/csv.hpp"

namespace simjoin {

void write_pairs_csv(const std::filesystem::path& path, const MatchSet& pairs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "id_a,id_b\n";
    for (const auto& p : pairs) out << p.a << ',' << p.b << '\n';
}

namespace {

std::vector<std::string> sorted_tokens(const TokenSet& set) {
    std::vector<std::string> tokens = set.tokens;
    std::sort(tokens.begin(), tokens.end());
    return tokens;
}

std::size_t sorted_intersection_size(std::span<const std::string> a,
                                     std::span<const std::string> b) {
    std::size_t i = 0, j = 0, count = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++count, ++i, ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return count;
}

std::size_t sorted_intersection_size(std::span<const std::uint32_t> a,
                                     std::span<const std::uint32_t> b) {
    std::size_t i = 0, j = 0, count = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++count, ++i, ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return count;
}

} // namespace

double jaccard(const TokenSet& x, const TokenSet& y) {
    if (x.tokens.empty() || y.tokens.empty()) {
        throw PreconditionError("jaccard over empty token set");
    }
    const auto a = sorted_tokens(x);
    const auto b = sorted_tokens(y);
    const std::size_t inter = sorted_intersection_size(a, b);
    return static_cast<double>(inter) /
           static_cast<double>(a.size() + b.size() - inter);
}

MatchSet full_compare(std::span<const TokenSet> token_sets, Threshold t,
                      bool cross_dataset_only) {
    std::vector<std::vector<std::string>> sorted;
    sorted.reserve(token_sets.size());
    for (const auto& set : token_sets) sorted.push_back(sorted_tokens(set));

    MatchSet result;
    for (std::size_t i = 0; i < token_sets.size(); ++i) {
        for (std::size_t j = i + 1; j < token_sets.size(); ++j) {
            if (cross_dataset_only && token_sets[i].owner_id == token_sets[j].owner_id) continue;
            const std::size_t inter = sorted_intersection_size(sorted[i], sorted[j]);
            const std::size_t uni = sorted[i].size() + sorted[j].size() - inter;
            // inter/uni >= num/den, exactly.
            if (static_cast<std::int64_t>(inter) * t.den >=
                t.num * static_cast<std::int64_t>(uni)) {
                result.emplace(token_sets[i].record_id, token_sets[j].record_id);
            }
        }
    }
    return result;
}

MatchSet full_compare(std::span<const Dataset> datasets, Threshold t, int gram_size) {
    if (datasets.empty()) throw PreconditionError("full_compare needs at least one dataset");
    const auto token_sets = tokenize_all(datasets, gram_size);
    return full_compare(token_sets, t, datasets.size() >= 2);
}

const GlobalOrdering::Entry* GlobalOrdering::find(const std::string& token) const {
    auto it = entries.find(token);
    return it == entries.end() ? nullptr : &it->second;
}

GlobalOrdering build_ordering(std::span<const TokenSet> token_sets) {
    if (token_sets.empty()) throw PreconditionError("build_ordering over empty corpus");

    GlobalOrdering ordering;
    for (const auto& set : token_sets) {
        for (const auto& token : set.tokens) ordering.entries[token].doc_freq += 1;
    }

    std::vector<std::pair<const std::string*, std::uint32_t>> by_freq;
    by_freq.reserve(ordering.entries.size());
    for (const auto& [token, entry] : ordering.entries) {
        by_freq.emplace_back(&token, entry.doc_freq);
    }
    std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return *a.first < *b.first; // lexicographic tiebreak, reproducible everywhere
    });
    for (std::uint32_t rank = 0; rank < by_freq.size(); ++rank) {
        ordering.entries[*by_freq[rank].first].rank = rank;
    }
    return ordering;
}

OrderedRecord order_record(const TokenSet& tokens, const GlobalOrdering& ordering, Threshold t) {
    if (!t.positive() || t.num > t.den) {
        throw ConfigError("ppjoin threshold must be in (0,1]");
    }
    OrderedRecord record;
    record.record_id = tokens.record_id;
    record.owner_id = tokens.owner_id;
    record.token_ranks.reserve(tokens.size());
    for (const auto& token : tokens.tokens) {
        const auto* entry = ordering.find(token);
        if (!entry) throw OrderingMissError("token '" + token + "' missing from ordering");
        record.token_ranks.push_back(entry->rank);
    }
    std::sort(record.token_ranks.begin(), record.token_ranks.end());

    const auto len = static_cast<std::int64_t>(record.token_ranks.size());
    record.prefix_len = static_cast<std::uint32_t>(probe_prefix_len(t, len));
    record.filter_prefix_len =
        static_cast<std::uint32_t>(std::min(filter_prefix_len(t, len), len));
    return record;
}

std::vector<OrderedRecord> order_corpus(std::span<const TokenSet> token_sets,
                                        const GlobalOrdering& ordering, Threshold t) {
    std::vector<OrderedRecord> records;
    records.reserve(token_sets.size());
    for (const auto& set : token_sets) records.push_back(order_record(set, ordering, t));
    std::sort(records.begin(), records.end(), [](const OrderedRecord& a, const OrderedRecord& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        if (a.owner_id != b.owner_id) return a.owner_id < b.owner_id;
        return a.record_id < b.record_id;
    });
    return records;
}

std::int64_t alpha(Threshold t, std::int64_t len_x, std::int64_t len_y) {
    if (!t.positive() || t.num > t.den) throw ConfigError("alpha needs t in (0,1]");
    if (len_x < 1 || len_y < 1) throw ConfigError("alpha needs positive lengths");
    // ceil(num/(den+num) * (len_x+len_y))
    return Threshold::ceil_div(t.num * (len_x + len_y), t.den + t.num);
}

std::map<std::string, std::uint64_t> JoinCounters::as_map() const {
    return {
        {"probes_examined", probes_examined},
        {"length_filter_skips", length_filter_skips},
        {"owner_filter_skips", owner_filter_skips},
        {"position_filter_prunes", position_filter_prunes},
        {"candidates_verified", candidates_verified},
        {"suffix_intersections", suffix_intersections},
        {"pairs_emitted", pairs_emitted},
    };
}

std::vector<MatchPair> verify(const OrderedRecord& x, std::span<const OrderedRecord> records,
                              const OverlapMap& overlaps, Threshold t, JoinCounters* counters) {
    std::vector<MatchPair> certified;
    const auto len_x = static_cast<std::int64_t>(x.size());
    const std::uint32_t p_x = x.prefix_len;

    // Deterministic candidate order keeps counters reproducible.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates(overlaps.counts().begin(),
                                                                    overlaps.counts().end());
    std::sort(candidates.begin(), candidates.end());

    for (const auto& [index, count] : candidates) {
        if (count == 0) continue; // pruned by the position filter
        const OrderedRecord& y = records[index];
        const auto len_y = static_cast<std::int64_t>(y.size());
        const std::int64_t required = alpha(t, len_x, len_y);
        const std::uint32_t p_y = y.prefix_len;

        if (counters) counters->candidates_verified += 1;

        // Pivot on the last probe-prefix token of each record; only the
        // record whose pivot ranks smaller still has unseen prefix-side
        // overlap, so a single suffix intersection completes the count.
        const std::uint32_t w_x = x.token_ranks[p_x - 1];
        const std::uint32_t w_y = y.token_ranks[p_y - 1];

        std::int64_t overlap = count;
        if (w_x < w_y) {
            const std::int64_t ubound = count + len_x - p_x;
            if (ubound >= required) {
                if (counters) counters->suffix_intersections += 1;
                overlap += sorted_intersection_size(
                    std::span(x.token_ranks).subspan(p_x),
                    std::span(y.token_ranks).subspan(count));
            }
        } else {
            const std::int64_t ubound = count + len_y - p_y;
            if (ubound >= required) {
                if (counters) counters->suffix_intersections += 1;
                overlap += sorted_intersection_size(
                    std::span(x.token_ranks).subspan(count),
                    std::span(y.token_ranks).subspan(p_y));
            }
        }

        if (overlap >= required) {
            certified.emplace_back(x.record_id, y.record_id);
            if (counters) counters->pairs_emitted += 1;
        }
    }
    return certified;
}

JoinResult ppjoin(std::span<const OrderedRecord> records, Threshold t, bool cross_dataset_only) {
    if (!t.positive() || t.num > t.den) throw ConfigError("ppjoin threshold must be in (0,1]");
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i - 1].size() > records[i].size()) {
            throw PreconditionError("ppjoin input must be sorted ascending by length");
        }
    }

    JoinResult result;
    // rank -> (record index, 1-based prefix position); grows while we scan.
    std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> index;
    OverlapMap overlaps;

    for (std::uint32_t xi = 0; xi < records.size(); ++xi) {
        const OrderedRecord& x = records[xi];
        const auto len_x = static_cast<std::int64_t>(x.size());
        overlaps.clear();

        for (std::uint32_t i = 1; i <= x.prefix_len; ++i) {
            const std::uint32_t w = x.token_ranks[i - 1];
            auto postings = index.find(w);
            if (postings != index.end()) {
                for (const auto& [yi, j] : postings->second) {
                    const OrderedRecord& y = records[yi];
                    result.counters.probes_examined += 1;
                    if (cross_dataset_only && y.owner_id == x.owner_id) {
                        result.counters.owner_filter_skips += 1;
                        continue;
                    }
                    const auto len_y = static_cast<std::int64_t>(y.size());
                    if (!t.length_compatible(len_x, len_y)) { // |y| >= t|x|
                        result.counters.length_filter_skips += 1;
                        continue;
                    }
                    if (overlaps.pruned(yi)) continue;

                    const std::int64_t required = alpha(t, len_x, len_y);
                    const std::int64_t ubound =
                        1 + std::min(len_x - i, len_y - j);
                    if (overlaps.overlap(yi) + ubound >= required) {
                        overlaps.bump(yi);
                    } else {
                        overlaps.prune(yi);
                        result.counters.position_filter_prunes += 1;
                    }
                }
            }
            index[w].emplace_back(xi, i);
        }

        for (const auto& pair : verify(x, records, overlaps, t, &result.counters)) {
            result.pairs.insert(pair);
        }
    }
    return result;
}

JoinResult ppjoin_datasets(std::span<const Dataset> datasets, Threshold t,
                           bool cross_dataset_only, int gram_size) {
    const auto token_sets = tokenize_all(datasets, gram_size);
    const auto ordering = build_ordering(token_sets);
    const auto records = order_corpus(token_sets, ordering, t);
    return ppjoin(records, t, cross_dataset_only);
}

} // namespace simjoin
