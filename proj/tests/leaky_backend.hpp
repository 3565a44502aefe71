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

#include <string>
#include <unordered_map>

#include "simjoin/he_backend.hpp"

namespace simjoin_tests {

/// Negative control for the transcript audit: a backend that decrypts more
/// than the contract allows and hands the host plaintext bytes.
class LeakyBackend : public simjoin::he::CryptoBackend {
public:
    explicit LeakyBackend(simjoin::he::SimulationBackendOptions options = {}) : inner_(options) {}

    std::string name() const override { return "leaky-simulation"; }

    simjoin::he::MultipartyKeyPair keygen(int n_parties, int threshold) override {
        return inner_.keygen(n_parties, threshold);
    }

    simjoin::he::CiphertextHandle encrypt(std::string_view plaintext) override {
        auto handle = inner_.encrypt(plaintext);
        plaintexts_[handle.id] = std::string(plaintext);
        return handle;
    }

    simjoin::he::MaskedDecryption is_zero_after_sub_mul_random(
        simjoin::he::CiphertextHandle a, simjoin::he::CiphertextHandle b,
        std::span<const int> shares) override {
        auto masked = inner_.is_zero_after_sub_mul_random(a, b, shares);
        masked.debug_plaintext = plaintexts_.at(a.id);
        return masked;
    }

private:
    simjoin::he::SimulationBackend inner_;
    std::unordered_map<std::uint64_t, std::string> plaintexts_;
};

} // namespace simjoin_tests
