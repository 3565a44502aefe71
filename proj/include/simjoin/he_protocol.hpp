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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simjoin/dataset.hpp"
#include "simjoin/he_backend.hpp"
#include "simjoin/ppjoin.hpp"
#include "simjoin/threshold.hpp"
#include "simjoin/transcript.hpp"

namespace simjoin::he {

/// A record as the host receives it: opaque token handles plus the record's
/// token count, which the protocol deliberately leaves public.
struct EncryptedRecord {
    RecordId record_id = 0;
    int owner_id = 0;
    std::vector<CiphertextHandle> token_handles;

    std::size_t length() const { return token_handles.size(); }
};

struct LocalOrderingEntry {
    CiphertextHandle token;
    std::uint32_t doc_freq = 0;
};

/// A party's document-frequency map with encrypted keys.
struct LocalEncryptedOrdering {
    int owner_id = 0;
    std::vector<LocalOrderingEntry> entries;
};

struct EncryptedOrderingEntry {
    CiphertextHandle token;
    std::uint32_t doc_freq = 0;
    std::uint32_t rank = 0;
};

/// The coalesced global ordering: one entry per distinct underlying token,
/// ranks ascending by summed frequency, frequency ties broken by host
/// arrival order (no plaintext-dependent tiebreak exists at the host).
struct EncryptedOrdering {
    std::vector<EncryptedOrderingEntry> entries; // sorted by rank
};

struct LocalPreprocessResult {
    std::vector<EncryptedRecord> records;
    LocalEncryptedOrdering ordering;
};

/// Party-side pre-processing: tokenize, count local document frequency,
/// then encrypt every record token and every ordering key. Entry order is
/// shuffled so the host's arrival order carries no plaintext information.
LocalPreprocessResult local_preprocess(const Dataset& dataset, CryptoBackend& backend,
                                       int gram_size = 2, std::uint64_t shuffle_seed = 0);

struct HostOptions {
    std::uint64_t seed = 0;
    int in_flight_limit = 1; // accepted bound for concurrent queries
};

/// The computation host C. Every interactive decryption query flows through
/// is_match() and lands in the transcript; the scan order of query loops is
/// randomized so the host cannot fix the pairing of tokens.
class HostSession {
public:
    HostSession(CryptoBackend& backend, MultipartyKeyPair keypair, HostOptions options = {});

    /// Defaults to all n shares; tests drop to d-1 to exercise threshold
    /// enforcement.
    void set_participating_shares(std::vector<int> shares);

    void register_records(std::span<const EncryptedRecord> records);

    /// Interactive equality query. True iff the underlying plaintexts are
    /// equal; either way only the masked decryption value is observed.
    bool is_match(CiphertextHandle a, CiphertextHandle b);

    /// Coalesce local document-frequency maps: matching tokens accumulate
    /// their local counts, fresh tokens are inserted. Registers the entries'
    /// arrival as a side effect.
    EncryptedOrdering doc_freq_join(std::span<const LocalEncryptedOrdering> locals);

    /// Literal nested-loop intersection count via is_match.
    std::uint64_t private_set_intersection(std::span<const CiphertextHandle> x,
                                           std::span<const CiphertextHandle> y);

    /// Rank of a token handle in the global ordering: one randomized
    /// is_match scan over O's keys per handle, cached afterwards. Raises
    /// ProtocolError if no key matches.
    std::uint32_t rank_of(CiphertextHandle handle, const EncryptedOrdering& ordering);

    void emit(RecordId a, RecordId b, int owner_a, int owner_b);

    HostTranscript& transcript() { return transcript_; }
    const HostTranscript& transcript() const { return transcript_; }
    std::uint64_t rank_scan_queries() const { return rank_scan_queries_; }
    std::mt19937_64& rng() { return rng_; }

private:
    CryptoBackend& backend_;
    MultipartyKeyPair keypair_;
    HostOptions options_;
    HostTranscript transcript_;
    std::mt19937_64 rng_;
    std::vector<int> shares_;
    std::unordered_map<std::uint64_t, std::uint32_t> rank_cache_;
    std::vector<std::uint32_t> scan_perm_; // fixed shuffle of O, rotated per scan
    std::uint64_t rank_scan_queries_ = 0;
};

/// A record after global pre-processing: handles sorted by their rank in
/// the encrypted ordering, probe prefix computed from the public length.
struct HeOrderedRecord {
    RecordId record_id = 0;
    int owner_id = 0;
    std::vector<std::uint32_t> token_ranks;         // strictly increasing
    std::vector<CiphertextHandle> handles_by_rank;  // aligned with token_ranks
    std::uint32_t prefix_len = 0;

    std::size_t size() const { return token_ranks.size(); }
};

/// Rank-assign and sort each record's tokens, then sort the records by
/// (length, owner, id) for the join.
std::vector<HeOrderedRecord> he_order_records(HostSession& host,
                                              std::span<const EncryptedRecord> records,
                                              const EncryptedOrdering& ordering, Threshold t);

struct HeJoinResult {
    MatchSet pairs;
    std::map<std::string, std::uint64_t> counters;
};

/// The private join: same phase structure as the plaintext algorithm, but
/// every token comparison is an is_match query, and records of the same
/// owner are never paired. Output equals the plaintext join restricted to
/// cross-owner pairs; the session transcript records everything the host
/// saw along the way.
HeJoinResult he_ppjoin(HostSession& host, std::span<const EncryptedRecord> records,
                       const EncryptedOrdering& ordering, Threshold t);

/// Verification for one probe record, exposed for tests. Pivot ranks come
/// from the session's rank cache (warmed during pre-processing by the same
/// is_match scan HE-Verify prescribes); suffix overlap is a
/// private_set_intersection over the exact slice bounds of the plaintext
/// Verify.
std::vector<MatchPair> he_verify(HostSession& host, const HeOrderedRecord& x,
                                 std::span<const HeOrderedRecord> records, const OverlapMap& overlaps,
                                 Threshold t, std::map<std::string, std::uint64_t>* counters = nullptr);

/// Placeholder parameters for a real lattice backend; parsed, stored and
/// reported but unused by the simulation.
struct RealBackendConfig {
    int mult_depth = 1;
    std::uint64_t plaintext_modulus = 65537;
    double sigma = 3.2;
    int security_bits = 128;
};

struct HeRunConfig {
    int n_parties = 2;
    int threshold_shares = 2; // d
    Threshold t{8, 10};
    std::uint64_t seed = 0;
    int gram_size = 2;
    int in_flight_limit = 1;
    std::string backend = "simulation";
    std::uint64_t plaintext_modulus = 65537;
    RealBackendConfig real;
};

struct HePhaseTimes {
    double local_preprocess_ms = 0.0;
    double global_preprocess_ms = 0.0;
    double join_ms = 0.0;
};

struct HeRunResult {
    MatchSet pairs;
    std::map<std::string, std::uint64_t> counters;
    HePhaseTimes times;
    HostTranscript transcript;
    MultipartyKeyPair keypair;
};

/// One-shot protocol run: keygen, per-party local pre-processing, host-side
/// global pre-processing, join + verify. One dataset per party. Passing a
/// backend overrides the simulation default (test fixtures use this).
HeRunResult run_he_ppjoin(std::span<const Dataset> datasets, const HeRunConfig& config,
                          CryptoBackend* backend = nullptr);

/// The baseline the paper compares against: a full comparison computing
/// every cross pair's intersection with private_set_intersection, then
/// thresholding. Leaks complete similarity scores to the host by design.
HeRunResult run_he_jaccard_full(std::span<const Dataset> datasets, const HeRunConfig& config,
                                CryptoBackend* backend = nullptr);

} // namespace simjoin::he
