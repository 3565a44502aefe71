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

#include "simjoin/he_protocol.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <unordered_map>

namespace simjoin::he {

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

} // namespace

LocalPreprocessResult local_preprocess(const Dataset& dataset, CryptoBackend& backend,
                                       int gram_size, std::uint64_t shuffle_seed) {
    LocalPreprocessResult result;
    result.ordering.owner_id = dataset.owner_id;

    // Plaintext work stays on the party: tokenization and the local
    // document-frequency count.
    std::vector<TokenSet> token_sets = tokenize_all(dataset, gram_size);
    std::map<std::string, std::uint32_t> doc_freq;
    for (const auto& set : token_sets) {
        for (const auto& token : set.tokens) doc_freq[token] += 1;
    }

    result.records.reserve(token_sets.size());
    for (const auto& set : token_sets) {
        EncryptedRecord record;
        record.record_id = set.record_id;
        record.owner_id = set.owner_id;
        record.token_handles.reserve(set.tokens.size());
        for (const auto& token : set.tokens) {
            record.token_handles.push_back(backend.encrypt(token));
        }
        result.records.push_back(std::move(record));
    }

    result.ordering.entries.reserve(doc_freq.size());
    for (const auto& [token, freq] : doc_freq) {
        result.ordering.entries.push_back({backend.encrypt(token), freq});
    }
    // Shuffled so the entry order the host observes is independent of the
    // plaintext keys.
    std::mt19937_64 rng(shuffle_seed ^ (0x9e3779b97f4a7c15ULL * (dataset.owner_id + 1)));
    for (std::size_t i = result.ordering.entries.size(); i > 1; --i) {
        std::swap(result.ordering.entries[i - 1], result.ordering.entries[bounded(rng, i)]);
    }
    return result;
}

HostSession::HostSession(CryptoBackend& backend, MultipartyKeyPair keypair, HostOptions options)
    : backend_(backend), keypair_(std::move(keypair)), options_(options), rng_(options.seed) {
    if (options_.in_flight_limit < 1) throw ConfigError("in-flight limit must be >= 1");
    shares_.resize(static_cast<std::size_t>(keypair_.n_parties));
    std::iota(shares_.begin(), shares_.end(), 0);
}

void HostSession::set_participating_shares(std::vector<int> shares) {
    shares_ = std::move(shares);
}

void HostSession::register_records(std::span<const EncryptedRecord> records) {
    for (const auto& record : records) {
        for (const auto& handle : record.token_handles) {
            TranscriptEvent event;
            event.kind = EventKind::kRecordToken;
            event.handle_a = handle.id;
            event.record_a = record.record_id;
            event.owner_a = record.owner_id;
            transcript_.append(event);
        }
    }
}

bool HostSession::is_match(CiphertextHandle a, CiphertextHandle b) {
    const MaskedDecryption masked = backend_.is_zero_after_sub_mul_random(a, b, shares_);
    TranscriptEvent event;
    event.kind = EventKind::kIsMatch;
    event.handle_a = a.id;
    event.handle_b = b.id;
    event.matched = masked.is_zero;
    event.mask = masked.value;
    const std::uint64_t seq = transcript_.append(event);
    if (!masked.debug_plaintext.empty()) {
        transcript_.attach_leak(seq, masked.debug_plaintext);
    }
    return masked.is_zero;
}

EncryptedOrdering HostSession::doc_freq_join(std::span<const LocalEncryptedOrdering> locals) {
    struct PendingEntry {
        CiphertextHandle token;
        std::uint64_t doc_freq = 0;
    };
    std::vector<PendingEntry> global;

    for (const auto& local : locals) {
        for (const auto& entry : local.entries) {
            TranscriptEvent event;
            event.kind = EventKind::kOrderingToken;
            event.handle_a = entry.token.id;
            event.owner_a = local.owner_id;
            transcript_.append(event);
        }
    }

    bool first = true;
    for (const auto& local : locals) {
        if (first) {
            // A single party's keys are distinct by construction; they seed
            // the global map without any queries.
            for (const auto& entry : local.entries) {
                global.push_back({entry.token, entry.doc_freq});
            }
            first = false;
            continue;
        }
        for (const auto& entry : local.entries) {
            bool found = false;
            if (!global.empty()) {
                // Randomized rotation keeps the pairing of tokens
                // undetermined; at most one key can match.
                const std::size_t start = bounded(rng_, global.size());
                for (std::size_t i = 0; i < global.size(); ++i) {
                    auto& candidate = global[(start + i) % global.size()];
                    if (is_match(entry.token, candidate.token)) {
                        candidate.doc_freq += entry.doc_freq;
                        found = true;
                        break;
                    }
                }
            }
            if (!found) global.push_back({entry.token, entry.doc_freq});
        }
    }

    // Ranks ascend by frequency; ties keep host arrival order (stable).
    std::vector<std::uint32_t> order(global.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return global[a].doc_freq < global[b].doc_freq;
    });

    EncryptedOrdering ordering;
    ordering.entries.reserve(global.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
        const auto& entry = global[order[rank]];
        ordering.entries.push_back(
            {entry.token, static_cast<std::uint32_t>(entry.doc_freq), rank});
    }
    return ordering;
}

std::uint64_t HostSession::private_set_intersection(std::span<const CiphertextHandle> x,
                                                    std::span<const CiphertextHandle> y) {
    std::uint64_t psi = 0;
    for (const auto& a : x) {
        for (const auto& b : y) {
            psi += is_match(a, b) ? 1 : 0;
        }
    }
    return psi;
}

std::uint32_t HostSession::rank_of(CiphertextHandle handle, const EncryptedOrdering& ordering) {
    if (auto it = rank_cache_.find(handle.id); it != rank_cache_.end()) return it->second;

    if (scan_perm_.size() != ordering.entries.size()) {
        scan_perm_.resize(ordering.entries.size());
        std::iota(scan_perm_.begin(), scan_perm_.end(), 0);
        for (std::size_t i = scan_perm_.size(); i > 1; --i) {
            std::swap(scan_perm_[i - 1], scan_perm_[bounded(rng_, i)]);
        }
    }

    const std::size_t n = ordering.entries.size();
    const std::size_t start = n ? bounded(rng_, n) : 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& entry = ordering.entries[scan_perm_[(start + i) % n]];
        ++rank_scan_queries_;
        if (is_match(handle, entry.token)) {
            rank_cache_.emplace(handle.id, entry.rank);
            return entry.rank;
        }
    }
    throw ProtocolError("token handle " + std::to_string(handle.id) +
                        " matches no key of the global ordering");
}

void HostSession::emit(RecordId a, RecordId b, int owner_a, int owner_b) {
    TranscriptEvent event;
    event.kind = EventKind::kEmit;
    const bool swap = b < a;
    event.record_a = swap ? b : a;
    event.record_b = swap ? a : b;
    event.owner_a = swap ? owner_b : owner_a;
    event.owner_b = swap ? owner_a : owner_b;
    transcript_.append(event);
}

std::vector<HeOrderedRecord> he_order_records(HostSession& host,
                                              std::span<const EncryptedRecord> records,
                                              const EncryptedOrdering& ordering, Threshold t) {
    if (!t.positive() || t.num > t.den) throw ConfigError("threshold must be in (0,1]");

    std::vector<HeOrderedRecord> ordered;
    ordered.reserve(records.size());
    for (const auto& record : records) {
        HeOrderedRecord out;
        out.record_id = record.record_id;
        out.owner_id = record.owner_id;

        std::vector<std::pair<std::uint32_t, CiphertextHandle>> ranked;
        ranked.reserve(record.token_handles.size());
        for (const auto& handle : record.token_handles) {
            ranked.emplace_back(host.rank_of(handle, ordering), handle);
        }
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        out.token_ranks.reserve(ranked.size());
        out.handles_by_rank.reserve(ranked.size());
        for (const auto& [rank, handle] : ranked) {
            out.token_ranks.push_back(rank);
            out.handles_by_rank.push_back(handle);
        }
        const auto len = static_cast<std::int64_t>(out.token_ranks.size());
        out.prefix_len = static_cast<std::uint32_t>(probe_prefix_len(t, len));
        ordered.push_back(std::move(out));
    }

    std::sort(ordered.begin(), ordered.end(), [](const HeOrderedRecord& a, const HeOrderedRecord& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        if (a.owner_id != b.owner_id) return a.owner_id < b.owner_id;
        return a.record_id < b.record_id;
    });
    return ordered;
}

std::vector<MatchPair> he_verify(HostSession& host, const HeOrderedRecord& x,
                                 std::span<const HeOrderedRecord> records,
                                 const OverlapMap& overlaps, Threshold t,
                                 std::map<std::string, std::uint64_t>* counters) {
    std::vector<MatchPair> certified;
    const auto len_x = static_cast<std::int64_t>(x.size());
    const std::uint32_t p_x = x.prefix_len;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates(overlaps.counts().begin(),
                                                                    overlaps.counts().end());
    std::sort(candidates.begin(), candidates.end());

    for (const auto& [index, count] : candidates) {
        if (count == 0) continue;
        const HeOrderedRecord& y = records[index];
        const auto len_y = static_cast<std::int64_t>(y.size());
        const std::int64_t required = alpha(t, len_x, len_y);
        const std::uint32_t p_y = y.prefix_len;
        if (counters) (*counters)["candidates_verified"] += 1;

        // Pivot positions in O: the pre-processing rank scan already ran
        // the is_match lookup for every token, so these are cache hits.
        const std::uint32_t w_x = x.token_ranks[p_x - 1];
        const std::uint32_t w_y = y.token_ranks[p_y - 1];

        std::int64_t overlap = count;
        if (w_x < w_y) {
            const std::int64_t ubound = count + len_x - p_x;
            if (ubound >= required) {
                if (counters) (*counters)["verify_psi_calls"] += 1;
                overlap += static_cast<std::int64_t>(host.private_set_intersection(
                    std::span(x.handles_by_rank).subspan(p_x),
                    std::span(y.handles_by_rank).subspan(count)));
            }
        } else {
            const std::int64_t ubound = count + len_y - p_y;
            if (ubound >= required) {
                if (counters) (*counters)["verify_psi_calls"] += 1;
                overlap += static_cast<std::int64_t>(host.private_set_intersection(
                    std::span(x.handles_by_rank).subspan(count),
                    std::span(y.handles_by_rank).subspan(p_y)));
            }
        }

        if (overlap >= required) {
            certified.emplace_back(x.record_id, y.record_id);
            host.emit(x.record_id, y.record_id, x.owner_id, y.owner_id);
            if (counters) (*counters)["pairs_emitted"] += 1;
        }
    }
    return certified;
}

HeJoinResult he_ppjoin(HostSession& host, std::span<const EncryptedRecord> records,
                       const EncryptedOrdering& ordering, Threshold t) {
    const std::uint64_t queries_before = host.transcript().is_match_count();
    const std::vector<HeOrderedRecord> ordered = he_order_records(host, records, ordering, t);
    const std::uint64_t rank_queries = host.transcript().is_match_count() - queries_before;

    HeJoinResult result;
    result.counters["rank_assignment_queries"] = rank_queries;

    std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> index;
    OverlapMap overlaps;

    for (std::uint32_t xi = 0; xi < ordered.size(); ++xi) {
        const HeOrderedRecord& x = ordered[xi];
        const auto len_x = static_cast<std::int64_t>(x.size());
        overlaps.clear();

        for (std::uint32_t i = 1; i <= x.prefix_len; ++i) {
            const std::uint32_t w = x.token_ranks[i - 1];
            auto postings = index.find(w);
            if (postings != index.end()) {
                for (const auto& [yi, j] : postings->second) {
                    const HeOrderedRecord& y = ordered[yi];
                    result.counters["probes_examined"] += 1;
                    // Records of the same owner are never candidates: the
                    // protocol resolves entities across datasets only.
                    if (y.owner_id == x.owner_id) {
                        result.counters["owner_filter_skips"] += 1;
                        continue;
                    }
                    const auto len_y = static_cast<std::int64_t>(y.size());
                    if (!t.length_compatible(len_x, len_y)) {
                        result.counters["length_filter_skips"] += 1;
                        continue;
                    }
                    if (overlaps.pruned(yi)) continue;

                    // The probe confirmation the protocol prescribes: both
                    // tokens sit in the same ordering slot, and the host
                    // still only learns the boolean.
                    result.counters["probe_queries"] += 1;
                    if (!host.is_match(x.handles_by_rank[i - 1], y.handles_by_rank[j - 1])) {
                        throw ProtocolError("ordering rank collision: distinct tokens share a rank");
                    }

                    const std::int64_t required = alpha(t, len_x, len_y);
                    const std::int64_t ubound = 1 + std::min(len_x - i, len_y - j);
                    if (overlaps.overlap(yi) + ubound >= required) {
                        overlaps.bump(yi);
                    } else {
                        overlaps.prune(yi);
                        result.counters["position_filter_prunes"] += 1;
                    }
                }
            }
            index[w].emplace_back(xi, i);
        }

        for (const auto& pair : he_verify(host, x, ordered, overlaps, t, &result.counters)) {
            result.pairs.insert(pair);
        }
    }

    result.counters["is_match_queries"] = host.transcript().is_match_count();
    return result;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct PreparedRun {
    SimulationBackendOptions sim_options;
    std::unique_ptr<SimulationBackend> owned_backend;
    CryptoBackend* backend = nullptr;
    MultipartyKeyPair keypair;
    std::vector<LocalPreprocessResult> locals;
    std::vector<EncryptedRecord> all_records;
    double local_ms = 0.0;
};

PreparedRun prepare_run(std::span<const Dataset> datasets, const HeRunConfig& config,
                        CryptoBackend* backend) {
    if (datasets.empty()) throw ConfigError("protocol run needs at least one dataset");
    if (config.n_parties != static_cast<int>(datasets.size())) {
        throw ConfigError("config names " + std::to_string(config.n_parties) + " parties but " +
                          std::to_string(datasets.size()) + " datasets were supplied");
    }

    PreparedRun run;
    if (backend) {
        run.backend = backend;
    } else {
        if (config.backend != "simulation") {
            throw ConfigError("unknown backend '" + config.backend +
                              "' (only the simulation backend is bundled)");
        }
        run.sim_options.seed = config.seed;
        run.sim_options.plaintext_modulus = config.plaintext_modulus;
        run.owned_backend = std::make_unique<SimulationBackend>(run.sim_options);
        run.backend = run.owned_backend.get();
    }

    run.keypair = run.backend->keygen(config.n_parties, config.threshold_shares);

    const auto start = Clock::now();
    for (const auto& dataset : datasets) {
        run.locals.push_back(
            local_preprocess(dataset, *run.backend, config.gram_size, config.seed));
    }
    run.local_ms = ms_since(start);
    for (const auto& local : run.locals) {
        run.all_records.insert(run.all_records.end(), local.records.begin(),
                               local.records.end());
    }
    return run;
}

} // namespace

HeRunResult run_he_ppjoin(std::span<const Dataset> datasets, const HeRunConfig& config,
                          CryptoBackend* backend) {
    PreparedRun run = prepare_run(datasets, config, backend);

    HostSession host(*run.backend, run.keypair,
                     HostOptions{config.seed + 1, config.in_flight_limit});
    host.register_records(run.all_records);

    const auto global_start = Clock::now();
    std::vector<LocalEncryptedOrdering> local_orderings;
    local_orderings.reserve(run.locals.size());
    for (const auto& local : run.locals) local_orderings.push_back(local.ordering);
    const EncryptedOrdering ordering = host.doc_freq_join(local_orderings);
    const std::uint64_t global_queries = host.transcript().is_match_count();
    const double global_ms = ms_since(global_start);

    const auto join_start = Clock::now();
    HeJoinResult join = he_ppjoin(host, run.all_records, ordering, config.t);

    HeRunResult result;
    result.pairs = std::move(join.pairs);
    result.counters = std::move(join.counters);
    result.counters["doc_freq_join_queries"] = global_queries;
    result.counters["is_match_queries"] = host.transcript().is_match_count();
    result.counters["ordering_entries"] = ordering.entries.size();
    result.times.local_preprocess_ms = run.local_ms;
    result.times.global_preprocess_ms = global_ms;
    result.times.join_ms = ms_since(join_start);
    result.keypair = run.keypair;
    result.transcript = std::move(host.transcript());
    return result;
}

HeRunResult run_he_jaccard_full(std::span<const Dataset> datasets, const HeRunConfig& config,
                                CryptoBackend* backend) {
    PreparedRun run = prepare_run(datasets, config, backend);

    HostSession host(*run.backend, run.keypair,
                     HostOptions{config.seed + 1, config.in_flight_limit});
    host.register_records(run.all_records);

    const auto join_start = Clock::now();
    HeRunResult result;
    for (std::size_t i = 0; i < run.all_records.size(); ++i) {
        for (std::size_t j = i + 1; j < run.all_records.size(); ++j) {
            const auto& x = run.all_records[i];
            const auto& y = run.all_records[j];
            if (x.owner_id == y.owner_id) continue;
            const auto psi = static_cast<std::int64_t>(
                host.private_set_intersection(x.token_handles, y.token_handles));
            const auto len_x = static_cast<std::int64_t>(x.length());
            const auto len_y = static_cast<std::int64_t>(y.length());
            // psi / (|x|+|y|-psi) >= t, exactly.
            if (psi * config.t.den >= config.t.num * (len_x + len_y - psi)) {
                result.pairs.emplace(x.record_id, y.record_id);
                host.emit(x.record_id, y.record_id, x.owner_id, y.owner_id);
            }
        }
    }

    result.counters["is_match_queries"] = host.transcript().is_match_count();
    result.times.local_preprocess_ms = run.local_ms;
    result.times.global_preprocess_ms = 0.0;
    result.times.join_ms = ms_since(join_start);
    result.keypair = run.keypair;
    result.transcript = std::move(host.transcript());
    return result;
}

} // namespace simjoin::he
