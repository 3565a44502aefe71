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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simjoin/dataset.hpp"
#include "simjoin/ppjoin.hpp"
#include "simjoin/threshold.hpp"

namespace simjoin {

/// Double-hashing parameters: bit i of a token is
/// h_i = (hmac_sha1(key_f, token) + i * hmac_md5(key_g, token)) mod l,
/// for i = 1..k, digests read as big-endian unsigned integers.
struct FingerprintParams {
    std::uint32_t k = 2;
    std::uint32_t l = 1000;
    std::string key_f;
    std::string key_g;

    void validate() const;
    std::string key_f_digest() const; // sha256 hex; raw keys never serialized
    std::string key_g_digest() const;
};

struct Fingerprint {
    RecordId record_id = 0;
    int owner_id = 0;
    std::uint32_t length_bits = 0;
    std::uint32_t cardinality = 0;
    std::vector<std::uint64_t> words;

    bool test(std::uint32_t bit) const {
        return (words[bit >> 6] >> (bit & 63)) & 1u;
    }
    void set(std::uint32_t bit) {
        auto& word = words[bit >> 6];
        const std::uint64_t mask = std::uint64_t{1} << (bit & 63);
        if (!(word & mask)) {
            word |= mask;
            ++cardinality;
        }
    }
    /// Ascending set-bit positions.
    std::vector<std::uint32_t> set_bits() const;
    std::string to_hex() const;
    bool operator==(const Fingerprint&) const = default;
};

/// The k bit positions one token maps to (with repeats if the hashes
/// collide).
std::vector<std::uint32_t> token_bit_positions(std::string_view token,
                                               const FingerprintParams& params);

Fingerprint fingerprint(const TokenSet& tokens, const FingerprintParams& params);
std::vector<Fingerprint> fingerprint_all(std::span<const TokenSet> token_sets,
                                         const FingerprintParams& params);

/// popcount(a AND b) / (|a| + |b| - popcount(a AND b)). ParamError on
/// mismatched lengths.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

/// Bit positions permuted by ascending set-bit frequency over the corpus,
/// ties by position. Plays the role the global token ordering plays for
/// PPJoin.
struct BitOrdering {
    std::vector<std::uint32_t> rank_of_bit; // position -> rank
    std::vector<std::uint32_t> bit_of_rank; // rank -> position
};

BitOrdering build_bit_ordering(std::span<const Fingerprint> fingerprints);

struct P4Filters {
    bool length = true;
    bool prefix = true;
    bool position = true;

    static P4Filters none() { return {false, false, false}; }
    static P4Filters all() { return {true, true, true}; }
};

struct P4Counters {
    std::uint64_t pairs_considered = 0;
    std::uint64_t length_filter_prunes = 0;
    std::uint64_t prefix_filter_prunes = 0;
    std::uint64_t position_filter_prunes = 0;
    std::uint64_t tanimoto_comparisons = 0; // pairs surviving all filters
    std::uint64_t pairs_emitted = 0;

    std::map<std::string, std::uint64_t> as_map() const;
};

struct P4JoinResult {
    MatchSet pairs;
    P4Counters counters;
};

/// P4Join: no inverted index, a cardinality-sorted scan with the three
/// PPJoin filters restated over set-bit cardinalities; survivors are scored
/// with Tanimoto. Input must be sorted ascending by cardinality
/// (PreconditionError otherwise). The filters are lossless with respect to
/// the full Tanimoto comparison; only the counters change.
P4JoinResult p4join(std::span<const Fingerprint> fingerprints, Threshold t,
                    P4Filters filters = P4Filters::all(), bool cross_dataset_only = false);

/// Sort helper: ascending (cardinality, owner, record id).
void sort_by_cardinality(std::vector<Fingerprint>& fingerprints);

struct OptimalK {
    double value = 0.0;        // (l/U) ln 2
    std::uint32_t rounded = 1; // nearest integer, at least 1
};

OptimalK optimal_k(std::uint64_t l, std::uint64_t U);

/// Inverse use of the same relation: l = k*U / ln 2.
double optimal_l(std::uint32_t k, std::uint64_t U);

/// f ~= (1 - e^{-Uk/l})^k.
double false_positive_rate(std::uint64_t U, std::uint32_t k, std::uint64_t l);

/// Fingerprint file: one JSON header line carrying (k, l, hashed keys),
/// then "record_id,owner_id,hex" lines.
struct FingerprintFile {
    std::uint32_t k = 0;
    std::uint32_t l = 0;
    std::string key_f_digest;
    std::string key_g_digest;
    std::vector<Fingerprint> fingerprints;

    /// ParamError when params do not reproduce the header.
    void check_params(const FingerprintParams& params) const;
};

void write_fingerprints(const std::filesystem::path& path, const FingerprintParams& params,
                        std::span<const Fingerprint> fingerprints);
FingerprintFile read_fingerprints(const std::filesystem::path& path);
Fingerprint fingerprint_from_hex(RecordId record_id, int owner_id, std::uint32_t l,
                                 const std::string& hex);

} // namespace simjoin
