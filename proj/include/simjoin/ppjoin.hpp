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
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simjoin/dataset.hpp"
#include "simjoin/threshold.hpp"

namespace simjoin {

/// Canonical unordered pair of record ids, a < b.
struct MatchPair {
    RecordId a = 0;
    RecordId b = 0;

    MatchPair() = default;
    MatchPair(RecordId x, RecordId y) : a(x < y ? x : y), b(x < y ? y : x) {}

    auto operator<=>(const MatchPair&) const = default;
};

using MatchSet = std::set<MatchPair>;

void write_pairs_csv(const std::filesystem::path& path, const MatchSet& pairs);

/// |x ∩ y| / |x ∪ y| over token sets. Both sets must be non-empty.
double jaccard(const TokenSet& x, const TokenSet& y);

/// Brute-force oracle. With one dataset: every unordered pair inside it
/// (de-duplication). With several: every cross-dataset pair. Keeps pairs
/// whose Jaccard similarity is >= t, decided in exact rational arithmetic.
MatchSet full_compare(std::span<const Dataset> datasets, Threshold t, int gram_size = 2);
MatchSet full_compare(std::span<const TokenSet> token_sets, Threshold t,
                      bool cross_dataset_only);

/// Token -> (document frequency, rank). Ranks ascend by frequency; ties
/// break lexicographically so every run and every party agrees.
struct GlobalOrdering {
    struct Entry {
        std::uint32_t doc_freq = 0;
        std::uint32_t rank = 0;
    };
    std::unordered_map<std::string, Entry> entries;

    std::size_t size() const { return entries.size(); }
    const Entry* find(const std::string& token) const;
};

GlobalOrdering build_ordering(std::span<const TokenSet> token_sets);

/// A record re-ordered by global rank, with both prefix quantities: the
/// probe prefix used by the join loop and the longer prefix-filtering
/// length used by the post-hoc prefix property.
struct OrderedRecord {
    RecordId record_id = 0;
    int owner_id = 0;
    std::vector<std::uint32_t> token_ranks; // strictly increasing
    std::uint32_t prefix_len = 0;           // p = |x| - ceil(t|x|) + 1
    std::uint32_t filter_prefix_len = 0;    // ceil((1-t)|x|) + 1

    std::size_t size() const { return token_ranks.size(); }
};

OrderedRecord order_record(const TokenSet& tokens, const GlobalOrdering& ordering, Threshold t);

/// All records of a corpus ordered for the join: ranks assigned, records
/// sorted by (length, owner, id).
std::vector<OrderedRecord> order_corpus(std::span<const TokenSet> token_sets,
                                        const GlobalOrdering& ordering, Threshold t);

/// Minimal overlap alpha = ceil(t/(1+t) * (len_x + len_y)), exact.
std::int64_t alpha(Threshold t, std::int64_t len_x, std::int64_t len_y);

/// Per-probe overlap accumulator (the paper's A). A candidate whose count
/// was reset to zero is pruned for good; it is never revived.
class OverlapMap {
public:
    void bump(std::uint32_t candidate) { counts_[candidate] += 1; }
    void prune(std::uint32_t candidate) { counts_[candidate] = 0; }
    bool pruned(std::uint32_t candidate) const {
        auto it = counts_.find(candidate);
        return it != counts_.end() && it->second == 0;
    }
    std::uint32_t overlap(std::uint32_t candidate) const {
        auto it = counts_.find(candidate);
        return it == counts_.end() ? 0 : it->second;
    }
    void set(std::uint32_t candidate, std::uint32_t count) { counts_[candidate] = count; }
    const std::unordered_map<std::uint32_t, std::uint32_t>& counts() const { return counts_; }
    void clear() { counts_.clear(); }

private:
    std::unordered_map<std::uint32_t, std::uint32_t> counts_;
};

struct JoinCounters {
    std::uint64_t probes_examined = 0;       // inverted-index entries touched
    std::uint64_t length_filter_skips = 0;
    std::uint64_t owner_filter_skips = 0;
    std::uint64_t position_filter_prunes = 0;
    std::uint64_t candidates_verified = 0;   // A[y] > 0 entries reaching Verify
    std::uint64_t suffix_intersections = 0;  // Verify slice intersections run
    std::uint64_t pairs_emitted = 0;

    std::map<std::string, std::uint64_t> as_map() const;
};

struct JoinResult {
    MatchSet pairs;
    JoinCounters counters;
};

/// PPJoin: inverted-index candidate generation over probe prefixes with
/// length and position filtering, then Verify. Records must arrive sorted
/// ascending by (length, owner, id) and share one ordering/threshold;
/// unsorted input raises PreconditionError. Output is exactly the Jaccard
/// >= t pair set; with cross_dataset_only, same-owner pairs are skipped.
JoinResult ppjoin(std::span<const OrderedRecord> records, Threshold t,
                  bool cross_dataset_only = false);

/// The verification phase for one probe record, exposed for tests. For each
/// candidate with A[y] > 0 this extends the accumulated overlap with one
/// sorted suffix intersection guarded by the ubound check, and certifies the
/// pair when the final overlap reaches alpha.
std::vector<MatchPair> verify(const OrderedRecord& x, std::span<const OrderedRecord> records,
                              const OverlapMap& overlaps, Threshold t,
                              JoinCounters* counters = nullptr);

/// Convenience: tokenize + order + join.
JoinResult ppjoin_datasets(std::span<const Dataset> datasets, Threshold t,
                           bool cross_dataset_only = false, int gram_size = 2);

} // namespace simjoin
