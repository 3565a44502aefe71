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

#include "simjoin/transcript.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "simjoin/ppjoin.hpp"

namespace simjoin::he {

const char* event_kind_name(EventKind kind) {
    switch (kind) {
    case EventKind::kRecordToken: return "record_token";
    case EventKind::kOrderingToken: return "ordering_token";
    case EventKind::kIsMatch: return "is_match";
    case EventKind::kEmit: return "emit";
    }
    return "unknown";
}

HostTranscript::HostTranscript(HostTranscript&& other) noexcept {
    std::lock_guard lock(other.mu_);
    events_ = std::move(other.events_);
    leaks_ = std::move(other.leaks_);
    is_match_count_ = other.is_match_count_;
}

HostTranscript& HostTranscript::operator=(HostTranscript&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mu_, other.mu_);
        events_ = std::move(other.events_);
        leaks_ = std::move(other.leaks_);
        is_match_count_ = other.is_match_count_;
    }
    return *this;
}

std::uint64_t HostTranscript::append(TranscriptEvent event) {
    std::lock_guard lock(mu_);
    event.seq = events_.size();
    if (event.kind == EventKind::kIsMatch) ++is_match_count_;
    events_.push_back(event);
    return event.seq;
}

void HostTranscript::attach_leak(std::uint64_t seq, std::string plaintext) {
    std::lock_guard lock(mu_);
    leaks_[seq] = std::move(plaintext);
}

void HostTranscript::write_ndjson(std::ostream& out) const {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& e : events_) {
        nlohmann::json line = {{"seq", e.seq}, {"kind", event_kind_name(e.kind)}};
        switch (e.kind) {
        case EventKind::kRecordToken:
        case EventKind::kOrderingToken:
            line["handle"] = e.handle_a;
            line["record"] = e.record_a;
            line["owner"] = e.owner_a;
            break;
        case EventKind::kIsMatch:
            line["handle_a"] = e.handle_a;
            line["handle_b"] = e.handle_b;
            line["matched"] = e.matched;
            line["mask"] = e.mask;
            break;
        case EventKind::kEmit:
            line["record_a"] = e.record_a;
            line["record_b"] = e.record_b;
            break;
        }
        if (auto it = leaks_.find(e.seq); it != leaks_.end()) line["leak"] = it->second;
        counts[event_kind_name(e.kind)] += 1;
        out << line.dump() << '\n';
    }
    nlohmann::json footer = {{"kind", "counters"}, {"events", events_.size()}};
    for (const auto& [name, count] : counts) footer[name] = count;
    out << footer.dump() << '\n';
}

namespace {

struct RecordInfo {
    int owner = -1;
    std::uint64_t length = 0;
};

} // namespace

AuditReport audit_transcript(const HostTranscript& transcript) {
    AuditReport report;
    const auto& events = transcript.events();

    // Which record each handle belongs to (structural metadata the host
    // legitimately has).
    std::unordered_map<std::uint64_t, RecordId> record_of_handle;
    std::unordered_map<RecordId, RecordInfo> records;
    MatchSet emitted;

    for (const auto& e : events) {
        switch (e.kind) {
        case EventKind::kRecordToken: {
            record_of_handle[e.handle_a] = e.record_a;
            auto& info = records[e.record_a];
            info.owner = e.owner_a;
            info.length += 1;
            if (e.matched || e.mask != 0) {
                report.violations.push_back("seq " + std::to_string(e.seq) +
                                            ": arrival event carries decryption output");
            }
            break;
        }
        case EventKind::kOrderingToken:
            if (e.matched || e.mask != 0) {
                report.violations.push_back("seq " + std::to_string(e.seq) +
                                            ": arrival event carries decryption output");
            }
            break;
        case EventKind::kIsMatch:
            // The boolean and the mask are the same bit of information;
            // anything else means the backend decrypted more than it may.
            if (e.matched && e.mask != 0) {
                report.violations.push_back("seq " + std::to_string(e.seq) +
                                            ": matching query decrypted a nonzero value");
            }
            if (!e.matched && e.mask == 0) {
                report.violations.push_back("seq " + std::to_string(e.seq) +
                                            ": mismatching query decrypted zero");
            }
            break;
        case EventKind::kEmit:
            emitted.emplace(e.record_a, e.record_b);
            break;
        }
    }

    for (const auto& [seq, leak] : transcript.leaks()) {
        if (!leak.empty()) {
            report.violations.push_back("seq " + std::to_string(seq) +
                                        ": plaintext bytes logged: '" + leak + "'");
        }
    }

    // Coverage: the host may never have issued every token-pair query for a
    // cross pair it did not emit — that would amount to a full similarity
    // score for a non-match.
    std::map<MatchPair, std::unordered_set<std::uint64_t>> coverage;
    for (const auto& e : events) {
        if (e.kind != EventKind::kIsMatch) continue;
        auto a = record_of_handle.find(e.handle_a);
        auto b = record_of_handle.find(e.handle_b);
        if (a == record_of_handle.end() || b == record_of_handle.end()) continue;
        if (a->second == b->second) continue;
        // Dedupe repeated queries on the same unordered handle pair
        // (handle ids stay well below 2^32 per run).
        const std::uint64_t lo = std::min(e.handle_a, e.handle_b);
        const std::uint64_t hi = std::max(e.handle_a, e.handle_b);
        coverage[MatchPair(a->second, b->second)].insert((hi << 32) | lo);
    }

    std::uint64_t worst_covered = 0;
    for (const auto& [pair, queried] : coverage) {
        if (emitted.contains(pair)) continue;
        const auto& ra = records[pair.a];
        const auto& rb = records[pair.b];
        if (ra.owner == rb.owner) continue;
        const std::uint64_t full = ra.length * rb.length;
        worst_covered = std::max(worst_covered, queried.size() * 100 / std::max<std::uint64_t>(full, 1));
        if (queried.size() >= full) {
            report.violations.push_back(
                "non-emitted pair (" + std::to_string(pair.a) + "," + std::to_string(pair.b) +
                "): all " + std::to_string(full) + " token pairs were queried");
        }
    }

    report.stats["events"] = events.size();
    report.stats["is_match_queries"] = transcript.is_match_count();
    report.stats["emitted_pairs"] = emitted.size();
    report.stats["cross_pairs_touched"] = coverage.size();
    report.stats["worst_nonmatch_coverage_pct"] = worst_covered;

    report.passed = report.violations.empty();
    if (!report.passed) {
        std::string message = "transcript audit failed:";
        const std::size_t shown = std::min<std::size_t>(report.violations.size(), 5);
        for (std::size_t i = 0; i < shown; ++i) message += "\n  " + report.violations[i];
        if (report.violations.size() > shown) {
            message += "\n  ... and " + std::to_string(report.violations.size() - shown) + " more";
        }
        throw AuditFailure(message);
    }
    return report;
}

} // namespace simjoin::he
