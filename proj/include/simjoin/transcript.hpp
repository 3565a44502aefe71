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
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "simjoin/dataset.hpp"

namespace simjoin::he {

enum class EventKind : std::uint8_t {
    kRecordToken,   // a record token handle arrived at the host
    kOrderingToken, // a local ordering key handle arrived
    kIsMatch,       // interactive equality query: boolean + masked value
    kEmit,          // a certified pair entered the output
};

const char* event_kind_name(EventKind kind);

struct TranscriptEvent {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::kIsMatch;
    std::uint64_t handle_a = 0;
    std::uint64_t handle_b = 0;
    RecordId record_a = -1;
    RecordId record_b = -1;
    int owner_a = -1;
    int owner_b = -1;
    bool matched = false;
    std::uint64_t mask = 0; // host-visible decryption output for is_match
};

/// The computation host's complete observable view. Append-only; a total
/// order is assigned under the lock, so concurrent appends are safe.
class HostTranscript {
public:
    HostTranscript() = default;
    HostTranscript(HostTranscript&& other) noexcept;
    HostTranscript& operator=(HostTranscript&& other) noexcept;

    std::uint64_t append(TranscriptEvent event);
    /// Test fixtures use this to model a backend that leaks plaintext; an
    /// honest run never attaches anything here.
    void attach_leak(std::uint64_t seq, std::string plaintext);

    const std::vector<TranscriptEvent>& events() const { return events_; }
    const std::map<std::uint64_t, std::string>& leaks() const { return leaks_; }
    std::uint64_t is_match_count() const { return is_match_count_; }
    std::uint64_t size() const { return events_.size(); }
    void reserve(std::size_t n) { events_.reserve(n); }

    /// Newline-delimited structured records, one JSON object per event,
    /// then one counters object.
    void write_ndjson(std::ostream& out) const;

private:
    mutable std::mutex mu_;
    std::vector<TranscriptEvent> events_;
    std::map<std::uint64_t, std::string> leaks_;
    std::uint64_t is_match_count_ = 0;
};

struct AuditReport {
    bool passed = false;
    std::vector<std::string> violations;
    std::map<std::string, std::uint64_t> stats;
};

/// Checks the protocol's leakage statement against what the host actually
/// saw: no plaintext bytes anywhere, per-record only the token count,
/// is_match booleans as the only plaintext-derived bits (mask 0 iff match),
/// and no non-emitted cross pair whose token pairs were exhaustively
/// queried (the host must never complete a similarity score for them).
/// Throws AuditFailure listing the offending events when any check fails.
AuditReport audit_transcript(const HostTranscript& transcript);

} // namespace simjoin::he
