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
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simjoin/p4join.hpp"

namespace simjoin::attacks {

/// All n-grams over [a-z0-9_ ] — the token space bi-gram tokenization with
/// '_' padding can produce after lowercase/whitespace normalization.
std::vector<std::string> default_universe(int gram_size = 2);

struct BitSensitivity {
    std::uint32_t position = 0;
    std::uint32_t dist = 0; // universe tokens hashing to this position
    std::uint32_t freq = 0; // corpus fingerprints with the bit set
    std::optional<double> sensitivity; // 1/min(dist, freq); null when min is 0
};

struct SensitivityReport {
    std::vector<BitSensitivity> bits; // one entry per bit position
    /// Positions ordered by descending sensitivity (undefined entries last,
    /// ties by position).
    std::vector<std::uint32_t> ranking() const;
};

/// The simulation attack: learn how exposed each bit position is. The
/// corpus header must match the supplied params (ParamError otherwise) —
/// dist is recomputed by hashing every universe token with them.
SensitivityReport bit_sensitivity(const FingerprintFile& corpus,
                                  std::span<const std::string> universe,
                                  const FingerprintParams& params);

void write_sensitivity_csv(const std::filesystem::path& path, const SensitivityReport& report);

struct RecoveryResult {
    RecordId fingerprint_id = 0;
    /// Universe tokens whose k bits are all set in the target.
    std::vector<std::string> candidates;
    /// Candidate bits cover every set bit of the target (attacker-checkable).
    bool covers_target = false;
    /// Candidate list was cut off by the budget.
    bool truncated = false;
    /// Candidates == true token set; only meaningful when ground truth was
    /// supplied for scoring.
    bool exact_recovery = false;
};

/// Brute-force recovery over an enumerable universe. Candidates always
/// superset the true token set. When `truth` is given the result is scored
/// for exact recovery.
RecoveryResult enumeration_attack(const Fingerprint& target,
                                  std::span<const std::string> universe,
                                  const FingerprintParams& params, std::size_t budget,
                                  const TokenSet* truth = nullptr);

/// Deterministic, salt-free fingerprinting lets an adversary precompute
/// fingerprint -> cleartext once and answer lookups forever after.
class RainbowTable {
public:
    static RainbowTable build(std::span<const std::string> cleartexts,
                              const FingerprintParams& params, int gram_size = 2);

    std::vector<std::string> lookup(const Fingerprint& fp) const;
    std::size_t size() const { return table_.size(); }

private:
    std::unordered_map<std::string, std::vector<std::string>> table_; // hex -> cleartexts
};

struct MisconfigWarning {
    std::string code;
    std::string message;
};

/// Parameter linter: fingerprints that are almost surely unique (f < 1e-3)
/// invite cross-checking by eavesdroppers; k > l trades away accuracy.
std::vector<MisconfigWarning> lint_params(std::uint64_t universe_size,
                                          const FingerprintParams& params);

} // namespace simjoin::attacks
