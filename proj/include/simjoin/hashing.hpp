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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace simjoin::hashing {

std::array<std::uint8_t, 20> hmac_sha1(std::string_view key, std::string_view message);
std::array<std::uint8_t, 16> hmac_md5(std::string_view key, std::string_view message);
std::array<std::uint8_t, 32> sha256(std::string_view data);

/// The digest read as one big-endian unsigned integer, reduced mod m.
std::uint64_t digest_mod(std::span<const std::uint8_t> digest, std::uint64_t m);

std::string hex(std::span<const std::uint8_t> bytes);

} // namespace simjoin::hashing
