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

#include "simjoin/hashing.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <stdexcept>

namespace simjoin::hashing {

namespace {

template <std::size_t N>
std::array<std::uint8_t, N> hmac_digest(const char* algorithm, std::string_view key,
                                        std::string_view message) {
    std::array<std::uint8_t, N> out{};
    std::size_t out_len = out.size();
    if (!EVP_Q_mac(nullptr, "HMAC", nullptr, algorithm, nullptr, key.data(), key.size(),
                   reinterpret_cast<const unsigned char*>(message.data()), message.size(),
                   out.data(), out.size(), &out_len) ||
        out_len != out.size()) {
        throw std::runtime_error(std::string("HMAC-") + algorithm + " failed");
    }
    return out;
}

} // namespace

std::array<std::uint8_t, 20> hmac_sha1(std::string_view key, std::string_view message) {
    return hmac_digest<20>("SHA1", key, message);
}

std::array<std::uint8_t, 16> hmac_md5(std::string_view key, std::string_view message) {
    return hmac_digest<16>("MD5", key, message);
}

std::array<std::uint8_t, 32> sha256(std::string_view data) {
    std::array<std::uint8_t, 32> out{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
    return out;
}

std::uint64_t digest_mod(std::span<const std::uint8_t> digest, std::uint64_t m) {
    if (m == 0) throw std::runtime_error("digest_mod: zero modulus");
    // Horner over bytes keeps the big-endian value reduced mod m.
    std::uint64_t r = 0;
    for (std::uint8_t byte : digest) {
        r = static_cast<std::uint64_t>(
            ((static_cast<unsigned __int128>(r) << 8) | byte) % m);
    }
    return r;
}

std::string hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xf]);
    }
    return out;
}

} // namespace simjoin::hashing
