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

#include "simjoin/attacks.hpp"

#include <algorithm>

#include "simjoin/csv.hpp"

namespace simjoin::attacks {

std::vector<std::string> default_universe(int gram_size) {
    static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789_ ";
    const std::size_t n = sizeof(kAlphabet) - 1;
    if (gram_size < 1) throw ConfigError("gram size must be >= 1");

    std::vector<std::string> universe;
    std::size_t total = 1;
    for (int i = 0; i < gram_size; ++i) total *= n;
    universe.reserve(total);

    std::string token(static_cast<std::size_t>(gram_size), kAlphabet[0]);
    std::vector<std::size_t> odometer(static_cast<std::size_t>(gram_size), 0);
    for (std::size_t count = 0; count < total; ++count) {
        for (int i = 0; i < gram_size; ++i) token[i] = kAlphabet[odometer[i]];
        universe.push_back(token);
        for (int i = gram_size - 1; i >= 0; --i) {
            if (++odometer[i] < n) break;
            odometer[i] = 0;
        }
    }
    return universe;
}

std::vector<std::uint32_t> SensitivityReport::ranking() const {
    std::vector<std::uint32_t> order;
    order.reserve(bits.size());
    for (const auto& b : bits) order.push_back(b.position);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const auto& sa = bits[a].sensitivity;
        const auto& sb = bits[b].sensitivity;
        if (sa.has_value() != sb.has_value()) return sa.has_value();
        if (sa && sb && *sa != *sb) return *sa > *sb;
        return a < b;
    });
    return order;
}

SensitivityReport bit_sensitivity(const FingerprintFile& corpus,
                                  std::span<const std::string> universe,
                                  const FingerprintParams& params) {
    corpus.check_params(params);

    SensitivityReport report;
    report.bits.resize(params.l);
    for (std::uint32_t b = 0; b < params.l; ++b) report.bits[b].position = b;

    for (const auto& token : universe) {
        // A token with colliding h_i still counts once per position.
        auto positions = token_bit_positions(token, params);
        std::sort(positions.begin(), positions.end());
        positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
        for (std::uint32_t pos : positions) report.bits[pos].dist += 1;
    }
    for (const auto& fp : corpus.fingerprints) {
        for (std::uint32_t bit : fp.set_bits()) report.bits[bit].freq += 1;
    }
    for (auto& bit : report.bits) {
        const std::uint32_t low = std::min(bit.dist, bit.freq);
        if (low > 0) bit.sensitivity = 1.0 / static_cast<double>(low);
    }
    return report;
}

void write_sensitivity_csv(const std::filesystem::path& path, const SensitivityReport& report) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(report.bits.size());
    for (const auto& bit : report.bits) {
        rows.push_back({std::to_string(bit.position), std::to_string(bit.dist),
                        std::to_string(bit.freq),
                        bit.sensitivity ? std::to_string(*bit.sensitivity) : ""});
    }
    csv::write_file(path, {"position", "dist", "freq", "sensitivity"}, rows);
}

RecoveryResult enumeration_attack(const Fingerprint& target,
                                  std::span<const std::string> universe,
                                  const FingerprintParams& params, std::size_t budget,
                                  const TokenSet* truth) {
    params.validate();
    if (target.length_bits != params.l) {
        throw ParamError("target fingerprint length does not match params");
    }

    RecoveryResult result;
    result.fingerprint_id = target.record_id;

    std::vector<std::uint64_t> covered(target.words.size(), 0);
    for (const auto& token : universe) {
        bool all_set = true;
        for (std::uint32_t pos : token_bit_positions(token, params)) {
            if (!target.test(pos)) {
                all_set = false;
                break;
            }
        }
        if (!all_set) continue;
        if (result.candidates.size() == budget) {
            result.truncated = true;
            break;
        }
        result.candidates.push_back(token);
        for (std::uint32_t pos : token_bit_positions(token, params)) {
            covered[pos >> 6] |= std::uint64_t{1} << (pos & 63);
        }
    }

    result.covers_target = true;
    for (std::size_t w = 0; w < target.words.size(); ++w) {
        if ((target.words[w] & ~covered[w]) != 0) {
            result.covers_target = false;
            break;
        }
    }

    if (truth) {
        std::vector<std::string> expected = truth->tokens;
        std::vector<std::string> got = result.candidates;
        std::sort(expected.begin(), expected.end());
        std::sort(got.begin(), got.end());
        result.exact_recovery = !result.truncated && got == expected;
    }
    return result;
}

RainbowTable RainbowTable::build(std::span<const std::string> cleartexts,
                                 const FingerprintParams& params, int gram_size) {
    params.validate();
    RainbowTable table;
    RecordId id = 0;
    for (const auto& text : cleartexts) {
        RawRecord record{id++, 0, text};
        const Fingerprint fp = fingerprint(tokenize(record, gram_size), params);
        table.table_[fp.to_hex()].push_back(text);
    }
    return table;
}

std::vector<std::string> RainbowTable::lookup(const Fingerprint& fp) const {
    auto it = table_.find(fp.to_hex());
    return it == table_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<MisconfigWarning> lint_params(std::uint64_t universe_size,
                                          const FingerprintParams& params) {
    params.validate();
    std::vector<MisconfigWarning> warnings;
    const double f = false_positive_rate(universe_size, params.k, params.l);
    if (f < 1e-3) {
        warnings.push_back({"near-unique-fingerprints",
                            "false-positive rate " + std::to_string(f) +
                                " < 1e-3: fingerprints are almost surely unique, so a passive "
                                "eavesdropper can map bits to tokens by cross-checking"});
    }
    if (params.k > params.l) {
        warnings.push_back({"k-exceeds-l",
                            "k=" + std::to_string(params.k) + " > l=" + std::to_string(params.l) +
                                ": every token saturates the array and accuracy collapses"});
    }
    return warnings;
}

} // namespace simjoin::attacks
