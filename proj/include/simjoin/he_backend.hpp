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
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "simjoin/errors.hpp"

namespace simjoin::he {

/// Opaque encrypted token. Distinct encryptions of equal plaintexts get
/// distinct handles; nothing about the plaintext is recoverable from one.
struct CiphertextHandle {
    std::uint64_t id = 0;
    std::uint8_t backend_tag = 0;

    bool operator==(const CiphertextHandle&) const = default;
};

/// Joint evaluation key plus n secret-share ids; distributed decryption
/// needs at least `threshold` of them.
struct MultipartyKeyPair {
    std::uint64_t public_key_id = 0;
    int n_parties = 0;
    int threshold = 0;
    std::vector<std::uint64_t> share_ids; // share i held by party i only
};

struct MaskedDecryption {
    bool is_zero = false;
    std::uint64_t value = 0; // 0 on match, fresh nonzero randomness otherwise
    /// Empty for every honest backend. Test fixtures model a leaky
    /// implementation by filling it; the audit flags any occurrence.
    std::string debug_plaintext;
};

/// The seam between the protocol and the cryptography: KeyGen, Encrypt and
/// the one interactive decryption query the host is ever allowed,
/// decrypt((c_i - c_j) * r_*). A lattice implementation can sit behind this
/// contract unchanged; the bundled backend simulates the information flow.
class CryptoBackend {
public:
    virtual ~CryptoBackend() = default;

    virtual std::string name() const = 0;
    virtual MultipartyKeyPair keygen(int n_parties, int threshold) = 0;
    virtual CiphertextHandle encrypt(std::string_view plaintext) = 0;
    /// `shares`: indices of the parties participating in the distributed
    /// decryption. Fewer than `threshold` distinct shares raises
    /// ThresholdUnmetError and reveals nothing.
    virtual MaskedDecryption is_zero_after_sub_mul_random(CiphertextHandle a, CiphertextHandle b,
                                                          std::span<const int> shares) = 0;
};

struct SimulationBackendOptions {
    std::uint64_t seed = 0;
    std::uint64_t plaintext_modulus = 65537; // masks are uniform over [1, modulus)
};

/// Faithful simulation of the threshold-HE information flow. Plaintexts
/// live in a vault standing in for what the parties jointly hold; the host
/// only ever sees handles and the contract's outputs. The mismatch mask is
/// drawn fresh per query, modelling the random nonzero ciphertext a data
/// owner contributes.
class SimulationBackend : public CryptoBackend {
public:
    explicit SimulationBackend(SimulationBackendOptions options = {});

    std::string name() const override { return "simulation"; }
    MultipartyKeyPair keygen(int n_parties, int threshold) override;
    CiphertextHandle encrypt(std::string_view plaintext) override;
    MaskedDecryption is_zero_after_sub_mul_random(CiphertextHandle a, CiphertextHandle b,
                                                  std::span<const int> shares) override;

    /// Party-side distributed decryption, used by tests as the roundtrip
    /// oracle. The host never calls this.
    std::string decrypt(CiphertextHandle handle, std::span<const int> shares) const;

    const MultipartyKeyPair& keypair() const;

private:
    void check_shares(std::span<const int> shares) const;
    const std::string& plaintext_of(CiphertextHandle handle) const;

    mutable std::mutex mu_;
    SimulationBackendOptions options_;
    std::mt19937_64 rng_;
    std::unordered_map<std::uint64_t, std::string> vault_;
    MultipartyKeyPair keypair_;
    bool keygen_done_ = false;
    std::uint64_t next_handle_ = 1;
};

} // namespace simjoin::he
