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

#include "simjoin/p4join.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "simjoin/hashing.hpp"

namespace simjoin {

void FingerprintParams::validate() const {
    if (k < 1) throw ParamError("fingerprint k must be >= 1");
    if (l < 1) throw ParamError("fingerprint l must be >= 1");
    if (key_f.empty() || key_g.empty()) throw ParamError("fingerprint keys must be non-empty");
}

std::string FingerprintParams::key_f_digest() const {
    return hashing::hex(hashing::sha256(key_f));
}

std::string FingerprintParams::key_g_digest() const {
    return hashing::hex(hashing::sha256(key_g));
}

std::vector<std::uint32_t> Fingerprint::set_bits() const {
    std::vector<std::uint32_t> bits;
    bits.reserve(cardinality);
    for (std::uint32_t w = 0; w < words.size(); ++w) {
        std::uint64_t word = words[w];
        while (word) {
            const int b = std::countr_zero(word);
            bits.push_back(w * 64 + static_cast<std::uint32_t>(b));
            word &= word - 1;
        }
    }
    return bits;
}

std::string Fingerprint::to_hex() const {
    const std::uint32_t n_bytes = (length_bits + 7) / 8;
    std::string out;
    out.reserve(n_bytes * 2);
    static constexpr char kDigits[] = "0123456789abcdef";
    for (std::uint32_t byte = 0; byte < n_bytes; ++byte) {
        const auto value = static_cast<std::uint8_t>(
            (words[byte / 8] >> ((byte % 8) * 8)) & 0xff);
        out.push_back(kDigits[value >> 4]);
        out.push_back(kDigits[value & 0xf]);
    }
    return out;
}

std::vector<std::uint32_t> token_bit_positions(std::string_view token,
                                               const FingerprintParams& params) {
    const std::uint64_t f = hashing::digest_mod(hashing::hmac_sha1(params.key_f, token), params.l);
    const std::uint64_t g = hashing::digest_mod(hashing::hmac_md5(params.key_g, token), params.l);
    std::vector<std::uint32_t> positions;
    positions.reserve(params.k);
    for (std::uint32_t i = 1; i <= params.k; ++i) {
        positions.push_back(static_cast<std::uint32_t>((f + i * g) % params.l));
    }
    return positions;
}

Fingerprint fingerprint(const TokenSet& tokens, const FingerprintParams& params) {
    params.validate();
    Fingerprint fp;
    fp.record_id = tokens.record_id;
    fp.owner_id = tokens.owner_id;
    fp.length_bits = params.l;
    fp.words.assign((params.l + 63) / 64, 0);
    for (const auto& token : tokens.tokens) {
        for (std::uint32_t bit : token_bit_positions(token, params)) fp.set(bit);
    }
    return fp;
}

std::vector<Fingerprint> fingerprint_all(std::span<const TokenSet> token_sets,
                                         const FingerprintParams& params) {
    std::vector<Fingerprint> out;
    out.reserve(token_sets.size());
    for (const auto& set : token_sets) out.push_back(fingerprint(set, params));
    return out;
}

namespace {

std::uint64_t and_popcount(const Fingerprint& a, const Fingerprint& b) {
    std::uint64_t count = 0;
    for (std::size_t w = 0; w < a.words.size(); ++w) {
        count += static_cast<std::uint64_t>(std::popcount(a.words[w] & b.words[w]));
    }
    return count;
}

} // namespace

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
    if (a.length_bits != b.length_bits) {
        throw ParamError("tanimoto over fingerprints of different length");
    }
    const std::uint64_t inter = and_popcount(a, b);
    const std::uint64_t uni = a.cardinality + b.cardinality - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BitOrdering build_bit_ordering(std::span<const Fingerprint> fingerprints) {
    if (fingerprints.empty()) throw PreconditionError("bit ordering over empty corpus");
    const std::uint32_t l = fingerprints.front().length_bits;
    std::vector<std::uint32_t> freq(l, 0);
    for (const auto& fp : fingerprints) {
        if (fp.length_bits != l) throw ParamError("mixed fingerprint lengths");
        for (std::uint32_t bit : fp.set_bits()) freq[bit] += 1;
    }
    BitOrdering ordering;
    ordering.bit_of_rank.resize(l);
    for (std::uint32_t b = 0; b < l; ++b) ordering.bit_of_rank[b] = b;
    std::stable_sort(ordering.bit_of_rank.begin(), ordering.bit_of_rank.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return freq[a] < freq[b]; });
    ordering.rank_of_bit.resize(l);
    for (std::uint32_t r = 0; r < l; ++r) ordering.rank_of_bit[ordering.bit_of_rank[r]] = r;
    return ordering;
}

std::map<std::string, std::uint64_t> P4Counters::as_map() const {
    return {
        {"pairs_considered", pairs_considered},
        {"length_filter_prunes", length_filter_prunes},
        {"prefix_filter_prunes", prefix_filter_prunes},
        {"position_filter_prunes", position_filter_prunes},
        {"tanimoto_comparisons", tanimoto_comparisons},
        {"pairs_emitted", pairs_emitted},
    };
}

void sort_by_cardinality(std::vector<Fingerprint>& fingerprints) {
    std::sort(fingerprints.begin(), fingerprints.end(),
              [](const Fingerprint& a, const Fingerprint& b) {
                  if (a.cardinality != b.cardinality) return a.cardinality < b.cardinality;
                  if (a.owner_id != b.owner_id) return a.owner_id < b.owner_id;
                  return a.record_id < b.record_id;
              });
}

P4JoinResult p4join(std::span<const Fingerprint> fingerprints, Threshold t, P4Filters filters,
                    bool cross_dataset_only) {
    if (!t.positive() || t.num > t.den) throw ConfigError("p4join threshold must be in (0,1]");
    for (std::size_t i = 1; i < fingerprints.size(); ++i) {
        if (fingerprints[i - 1].cardinality > fingerprints[i].cardinality) {
            throw PreconditionError("p4join input must be sorted ascending by cardinality");
        }
    }

    const bool need_bit_order = filters.prefix || filters.position;
    BitOrdering ordering;
    std::vector<std::vector<std::uint32_t>> ranked_bits(fingerprints.size());
    if (need_bit_order && !fingerprints.empty()) {
        ordering = build_bit_ordering(fingerprints);
        for (std::size_t i = 0; i < fingerprints.size(); ++i) {
            auto bits = fingerprints[i].set_bits();
            for (auto& b : bits) b = ordering.rank_of_bit[b];
            std::sort(bits.begin(), bits.end());
            ranked_bits[i] = std::move(bits);
        }
    }

    P4JoinResult result;
    for (std::size_t j = 0; j < fingerprints.size(); ++j) {
        const Fingerprint& y = fingerprints[j]; // the larger-cardinality side
        const auto card_y = static_cast<std::int64_t>(y.cardinality);
        for (std::size_t i = 0; i < j; ++i) {
            const Fingerprint& x = fingerprints[i];
            if (cross_dataset_only && x.owner_id == y.owner_id) continue;
            result.counters.pairs_considered += 1;

            const auto card_x = static_cast<std::int64_t>(x.cardinality);
            if (filters.length && !t.length_compatible(card_y, card_x)) {
                result.counters.length_filter_prunes += 1;
                continue;
            }

            if (need_bit_order) {
                // One merge over the rank-ordered bit lists yields the first
                // shared position for both remaining filters.
                const auto& bx = ranked_bits[i];
                const auto& by = ranked_bits[j];
                std::size_t px = 0, py = 0;
                bool common = false;
                while (px < bx.size() && py < by.size()) {
                    if (bx[px] == by[py]) {
                        common = true;
                        break;
                    }
                    (bx[px] < by[py] ? px : py) += 1;
                }
                if (filters.prefix) {
                    const auto pref_x =
                        static_cast<std::size_t>(probe_prefix_len(t, card_x));
                    const auto pref_y =
                        static_cast<std::size_t>(probe_prefix_len(t, card_y));
                    if (!common || px >= pref_x || py >= pref_y) {
                        result.counters.prefix_filter_prunes += 1;
                        continue;
                    }
                }
                if (filters.position) {
                    const std::int64_t required = alpha(t, card_x, card_y);
                    const std::int64_t best = common
                        ? 1 + std::min(card_x - static_cast<std::int64_t>(px) - 1,
                                       card_y - static_cast<std::int64_t>(py) - 1)
                        : 0;
                    if (best < required) {
                        result.counters.position_filter_prunes += 1;
                        continue;
                    }
                }
            }

            result.counters.tanimoto_comparisons += 1;
            const std::uint64_t inter = and_popcount(x, y);
            const std::uint64_t uni = x.cardinality + y.cardinality - inter;
            if (static_cast<std::int64_t>(inter) * t.den >=
                t.num * static_cast<std::int64_t>(uni)) {
                result.pairs.emplace(x.record_id, y.record_id);
                result.counters.pairs_emitted += 1;
            }
        }
    }
    return result;
}

OptimalK optimal_k(std::uint64_t l, std::uint64_t U) {
    if (l < 1 || U < 1) throw ParamError("optimal_k needs l, U >= 1");
    OptimalK out;
    out.value = (static_cast<double>(l) / static_cast<double>(U)) * std::numbers::ln2;
    out.rounded = static_cast<std::uint32_t>(std::max<std::int64_t>(1, std::llround(out.value)));
    return out;
}

double optimal_l(std::uint32_t k, std::uint64_t U) {
    if (k < 1 || U < 1) throw ParamError("optimal_l needs k, U >= 1");
    return static_cast<double>(k) * static_cast<double>(U) / std::numbers::ln2;
}

double false_positive_rate(std::uint64_t U, std::uint32_t k, std::uint64_t l) {
    if (U < 1 || k < 1 || l < 1) throw ParamError("false_positive_rate needs U, k, l >= 1");
    const double exponent = -static_cast<double>(U) * static_cast<double>(k) /
                            static_cast<double>(l);
    return std::pow(1.0 - std::exp(exponent), static_cast<double>(k));
}

void FingerprintFile::check_params(const FingerprintParams& params) const {
    if (params.k != k || params.l != l) {
        throw ParamError("fingerprint header (k=" + std::to_string(k) + ",l=" + std::to_string(l) +
                         ") does not match params (k=" + std::to_string(params.k) +
                         ",l=" + std::to_string(params.l) + ")");
    }
    if (params.key_f_digest() != key_f_digest || params.key_g_digest() != key_g_digest) {
        throw ParamError("fingerprint header key digests do not match supplied keys");
    }
}

void write_fingerprints(const std::filesystem::path& path, const FingerprintParams& params,
                        std::span<const Fingerprint> fingerprints) {
    params.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    nlohmann::json header = {
        {"format", "simjoin-fingerprints"},
        {"version", 1},
        {"k", params.k},
        {"l", params.l},
        {"key_f_sha256", params.key_f_digest()},
        {"key_g_sha256", params.key_g_digest()},
    };
    out << header.dump() << '\n';
    for (const auto& fp : fingerprints) {
        out << fp.record_id << ',' << fp.owner_id << ',' << fp.to_hex() << '\n';
    }
}

Fingerprint fingerprint_from_hex(RecordId record_id, int owner_id, std::uint32_t l,
                                 const std::string& hex) {
    const std::uint32_t n_bytes = (l + 7) / 8;
    if (hex.size() != static_cast<std::size_t>(n_bytes) * 2) {
        throw ParamError("fingerprint hex has wrong length");
    }
    auto nibble = [](char c) -> std::uint64_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<std::uint64_t>(c - 'A' + 10);
        throw ParamError("bad hex digit in fingerprint");
    };
    Fingerprint fp;
    fp.record_id = record_id;
    fp.owner_id = owner_id;
    fp.length_bits = l;
    fp.words.assign((l + 63) / 64, 0);
    for (std::uint32_t byte = 0; byte < n_bytes; ++byte) {
        const std::uint64_t value = (nibble(hex[byte * 2]) << 4) | nibble(hex[byte * 2 + 1]);
        fp.words[byte / 8] |= value << ((byte % 8) * 8);
    }
    fp.cardinality = 0;
    for (std::uint64_t word : fp.words) {
        fp.cardinality += static_cast<std::uint32_t>(std::popcount(word));
    }
    return fp;
}

FingerprintFile read_fingerprints(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParamError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParamError("empty fingerprint file");

    FingerprintFile file;
    try {
        const auto header = nlohmann::json::parse(line);
        if (header.at("format") != "simjoin-fingerprints") {
            throw ParamError("not a fingerprint file: " + path.string());
        }
        file.k = header.at("k").get<std::uint32_t>();
        file.l = header.at("l").get<std::uint32_t>();
        file.key_f_digest = header.at("key_f_sha256").get<std::string>();
        file.key_g_digest = header.at("key_g_sha256").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParamError("bad fingerprint header: " + std::string(e.what()));
    }

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string id_str, owner_str, hex;
        if (!std::getline(fields, id_str, ',') || !std::getline(fields, owner_str, ',') ||
            !std::getline(fields, hex)) {
            throw ParamError("bad fingerprint row: " + line);
        }
        file.fingerprints.push_back(
            fingerprint_from_hex(std::stoll(id_str), std::stoi(owner_str), file.l, hex));
    }
    return file;
}

} // namespace simjoin
