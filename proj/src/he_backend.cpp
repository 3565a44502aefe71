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

#include "simjoin/he_backend.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

namespace simjoin::he {

SimulationBackend::SimulationBackend(SimulationBackendOptions options)
    : options_(options), rng_(options.seed) {
    if (options_.plaintext_modulus < 2) {
        throw ConfigError("plaintext modulus must be >= 2");
    }
}

MultipartyKeyPair SimulationBackend::keygen(int n_parties, int threshold) {
    if (n_parties < 1) throw ConfigError("keygen needs at least one party");
    if (threshold < 1 || threshold > n_parties) {
        throw ConfigError("threshold d must satisfy 1 <= d <= n");
    }
    std::lock_guard lock(mu_);
    vault_.clear();
    keypair_ = MultipartyKeyPair{};
    keypair_.public_key_id = rng_();
    keypair_.n_parties = n_parties;
    keypair_.threshold = threshold;
    keypair_.share_ids.resize(static_cast<std::size_t>(n_parties));
    for (auto& share : keypair_.share_ids) share = rng_();
    keygen_done_ = true;
    next_handle_ = 1;
    return keypair_;
}

const MultipartyKeyPair& SimulationBackend::keypair() const {
    if (!keygen_done_) throw ProtocolError("keygen has not run");
    return keypair_;
}

CiphertextHandle SimulationBackend::encrypt(std::string_view plaintext) {
    std::lock_guard lock(mu_);
    if (!keygen_done_) throw ProtocolError("encrypt before keygen");
    CiphertextHandle handle{next_handle_++, 0};
    vault_.emplace(handle.id, std::string(plaintext));
    return handle;
}

void SimulationBackend::check_shares(std::span<const int> shares) const {
    std::unordered_set<int> distinct;
    for (int share : shares) {
        if (share < 0 || share >= keypair_.n_parties) {
            throw ConfigError("unknown secret share index " + std::to_string(share));
        }
        distinct.insert(share);
    }
    if (static_cast<int>(distinct.size()) < keypair_.threshold) {
        throw ThresholdUnmetError("distributed decryption needs " +
                                  std::to_string(keypair_.threshold) + " shares, got " +
                                  std::to_string(distinct.size()));
    }
}

const std::string& SimulationBackend::plaintext_of(CiphertextHandle handle) const {
    auto it = vault_.find(handle.id);
    if (it == vault_.end()) {
        throw ProtocolError("unknown ciphertext handle " + std::to_string(handle.id));
    }
    return it->second;
}

MaskedDecryption SimulationBackend::is_zero_after_sub_mul_random(CiphertextHandle a,
                                                                 CiphertextHandle b,
                                                                 std::span<const int> shares) {
    std::lock_guard lock(mu_);
    if (!keygen_done_) throw ProtocolError("decryption query before keygen");
    check_shares(shares);

    MaskedDecryption out;
    out.is_zero = plaintext_of(a) == plaintext_of(b);
    if (out.is_zero) {
        out.value = 0; // (m - m) * r_* decrypts to 0 whatever the mask
    } else {
        // (m_a - m_b) * r_* with r_* uniform nonzero, contributed by a data
        // owner; the product is uniform over the nonzero plaintext space.
        const std::uint64_t range = options_.plaintext_modulus - 1;
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % range;
        std::uint64_t v = rng_();
        while (v >= limit) v = rng_();
        out.value = 1 + v % range;
    }
    return out;
}

std::string SimulationBackend::decrypt(CiphertextHandle handle, std::span<const int> shares) const {
    std::lock_guard lock(mu_);
    if (!keygen_done_) throw ProtocolError("decrypt before keygen");
    check_shares(shares);
    return plaintext_of(handle);
}

} // namespace simjoin::he
