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

#include "simjoin/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <unordered_set>

#include "simjoin/csv.hpp"

namespace simjoin {

bool TokenSet::contains(std::string_view token) const {
    return std::find(tokens.begin(), tokens.end(), token) != tokens.end();
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

TokenSet tokenize(const RawRecord& record, int gram_size, char pad) {
    if (gram_size < 1) throw ConfigError("gram size must be >= 1");
    const std::string text = normalize_text(record.text);
    if (text.empty()) {
        throw EmptyRecordError("record " + std::to_string(record.record_id) +
                               ": empty text after normalization");
    }

    std::string padded;
    padded.reserve(text.size() + 2);
    padded.push_back(pad);
    padded += text;
    padded.push_back(pad);
    if (padded.size() < static_cast<std::size_t>(gram_size)) {
        throw EmptyRecordError("record " + std::to_string(record.record_id) +
                               ": padded text shorter than gram size");
    }

    TokenSet set;
    set.record_id = record.record_id;
    set.owner_id = record.owner_id;
    std::unordered_set<std::string_view> seen;
    const std::size_t count = padded.size() - gram_size + 1;
    set.tokens.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::string_view gram(padded.data() + i, static_cast<std::size_t>(gram_size));
        if (seen.insert(gram).second) set.tokens.emplace_back(gram);
    }
    return set;
}

std::vector<TokenSet> tokenize_all(const Dataset& dataset, int gram_size, char pad) {
    std::vector<TokenSet> out;
    out.reserve(dataset.records.size());
    for (const auto& r : dataset.records) out.push_back(tokenize(r, gram_size, pad));
    return out;
}

std::vector<TokenSet> tokenize_all(std::span<const Dataset> datasets, int gram_size, char pad) {
    std::vector<TokenSet> out;
    for (const auto& d : datasets) {
        for (const auto& r : d.records) out.push_back(tokenize(r, gram_size, pad));
    }
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& id_column,
                 const std::vector<std::string>& text_columns, int owner_id) {
    const csv::Table table = csv::read_file(path);

    const int id_col = table.column(id_column);
    if (id_col < 0) throw SchemaError("missing id column '" + id_column + "' in " + path.string());
    std::vector<int> text_cols;
    for (const auto& name : text_columns) {
        const int col = table.column(name);
        if (col < 0) throw SchemaError("missing column '" + name + "' in " + path.string());
        text_cols.push_back(col);
    }
    if (text_cols.empty()) throw SchemaError("no text columns requested");

    Dataset dataset;
    dataset.owner_id = owner_id;
    dataset.records.reserve(table.rows.size());
    std::unordered_set<RecordId> seen;
    for (const auto& row : table.rows) {
        RawRecord record;
        try {
            record.record_id = std::stoll(row[id_col]);
        } catch (const std::exception&) {
            throw SchemaError("non-integer id '" + row[id_col] + "' in " + path.string());
        }
        if (!seen.insert(record.record_id).second) {
            throw DuplicateIdError("duplicate id " + std::to_string(record.record_id) + " in " +
                                   path.string());
        }
        record.owner_id = owner_id;
        for (std::size_t i = 0; i < text_cols.size(); ++i) {
            if (i) record.text.push_back(' ');
            record.text += row[text_cols[i]];
        }
        dataset.records.push_back(std::move(record));
    }
    return dataset;
}

std::vector<std::pair<RecordId, RecordId>> load_truth_csv(const std::filesystem::path& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header.size() != 2) throw SchemaError("truth file must have two columns");
    std::vector<std::pair<RecordId, RecordId>> pairs;
    pairs.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        pairs.emplace_back(std::stoll(row[0]), std::stoll(row[1]));
    }
    return pairs;
}

void write_truth_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<RecordId, RecordId>>& pairs) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        rows.push_back({std::to_string(a), std::to_string(b)});
    }
    csv::write_file(path, {"id_a", "id_b"}, rows);
}

namespace {

// Bounded sampling that does not depend on std::uniform_int_distribution,
// whose output differs across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

constexpr const char* kFirstNames[] = {
    "james", "mary", "robert", "patricia", "john", "jennifer", "michael", "linda",
    "david", "elizabeth", "william", "barbara", "richard", "susan", "joseph", "jessica",
    "thomas", "sarah", "charles", "karen", "tony", "stephen", "wanda", "natasha",
    "bruce", "carol", "peter", "gwen", "scott", "hope", "sam", "maria",
};
constexpr const char* kLastNames[] = {
    "smith", "johnson", "williams", "brown", "jones", "garcia", "miller", "davis",
    "rodriguez", "martinez", "hernandez", "lopez", "gonzales", "wilson", "anderson", "thomas",
    "stark", "strange", "rogers", "banner", "romanoff", "barton", "maximoff", "parker",
    "lang", "pym", "danvers", "rambeau", "walker", "proctor", "quill", "drax",
};
constexpr const char* kStreets[] = {
    "main street", "oak avenue", "maple drive", "cedar lane", "park road", "elm street",
    "washington avenue", "lake view", "hill crest", "river bend", "sunset boulevard",
    "highland way", "forest glen", "meadow park", "station road", "church street",
};
constexpr const char* kCities[] = {
    "springfield", "riverside", "franklin", "greenville", "bristol", "clinton",
    "fairview", "salem", "madison", "georgetown", "arlington", "ashland",
};

constexpr char kEditAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";

std::string make_text(std::mt19937_64& rng) {
    std::string text;
    text += kFirstNames[bounded(rng, std::size(kFirstNames))];
    text += ' ';
    text += kLastNames[bounded(rng, std::size(kLastNames))];
    text += ' ';
    text += std::to_string(1 + bounded(rng, 999));
    text += ' ';
    text += kStreets[bounded(rng, std::size(kStreets))];
    text += ' ';
    text += kCities[bounded(rng, std::size(kCities))];
    return text;
}

std::string corrupt_text(std::mt19937_64& rng, const std::string& original, double rate) {
    // One Bernoulli(rate) draw per character decides the edit count; then
    // edits are applied at random positions.
    std::size_t edits = 0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < rate) ++edits;
    }
    std::string text = original;
    for (std::size_t e = 0; e < edits; ++e) {
        if (text.empty()) break;
        const std::uint64_t op = bounded(rng, 4);
        const std::size_t pos = bounded(rng, text.size());
        switch (op) {
        case 0: // substitution
            text[pos] = kEditAlphabet[bounded(rng, std::size(kEditAlphabet) - 1)];
            break;
        case 1: // deletion (keep at least one character)
            if (text.size() > 1) text.erase(pos, 1);
            break;
        case 2: // insertion
            text.insert(text.begin() + pos, kEditAlphabet[bounded(rng, std::size(kEditAlphabet) - 1)]);
            break;
        default: // transposition
            if (pos + 1 < text.size()) std::swap(text[pos], text[pos + 1]);
            break;
        }
    }
    return text;
}

} // namespace

SyntheticData generate_synthetic(std::uint64_t seed, std::size_t n_originals,
                                 std::size_t n_duplicates, double corruption_rate) {
    if (corruption_rate < 0.0 || corruption_rate > 1.0) {
        throw ConfigError("corruption_rate must be in [0,1]");
    }
    if (n_duplicates > n_originals) {
        throw ConfigError("each duplicate derives from a distinct original: "
                          "n_duplicates must be <= n_originals");
    }
    if (n_originals == 0) throw ConfigError("n_originals must be positive");

    std::mt19937_64 rng(seed);
    SyntheticData data;
    data.dataset.owner_id = 0;
    data.dataset.records.reserve(n_originals + n_duplicates);

    for (std::size_t i = 0; i < n_originals; ++i) {
        RawRecord record;
        record.record_id = static_cast<RecordId>(i);
        record.owner_id = 0;
        record.text = make_text(rng);
        data.dataset.records.push_back(std::move(record));
    }

    // Pick n_duplicates distinct originals via a partial Fisher-Yates pass.
    std::vector<std::size_t> pool(n_originals);
    for (std::size_t i = 0; i < n_originals; ++i) pool[i] = i;
    for (std::size_t i = 0; i < n_duplicates; ++i) {
        const std::size_t j = i + bounded(rng, n_originals - i);
        std::swap(pool[i], pool[j]);
    }

    for (std::size_t i = 0; i < n_duplicates; ++i) {
        const std::size_t source = pool[i];
        RawRecord record;
        record.record_id = static_cast<RecordId>(n_originals + i);
        record.owner_id = 0;
        record.text = corrupt_text(rng, data.dataset.records[source].text, corruption_rate);
        data.truth.emplace_back(static_cast<RecordId>(source), record.record_id);
        data.dataset.records.push_back(std::move(record));
    }
    return data;
}

std::vector<Dataset> split_dataset(const Dataset& dataset, const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 2) throw ConfigError("split needs at least two parts");
    std::size_t total = 0;
    for (std::size_t s : sizes) {
        if (s == 0) throw ConfigError("split parts must be non-empty");
        total += s;
    }
    if (total != dataset.records.size()) {
        throw ConfigError("split sizes sum to " + std::to_string(total) + ", dataset has " +
                          std::to_string(dataset.records.size()) + " records");
    }

    std::vector<Dataset> parts;
    parts.reserve(sizes.size());
    std::size_t offset = 0;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
        Dataset part;
        part.owner_id = static_cast<int>(p);
        part.records.assign(dataset.records.begin() + offset,
                            dataset.records.begin() + offset + sizes[p]);
        for (auto& r : part.records) r.owner_id = part.owner_id;
        offset += sizes[p];
        parts.push_back(std::move(part));
    }
    return parts;
}

} // namespace simjoin
