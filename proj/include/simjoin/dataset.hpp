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
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "simjoin/errors.hpp"

namespace simjoin {

using RecordId = std::int64_t;

struct RawRecord {
    RecordId record_id = 0;
    int owner_id = 0;
    std::string text; // concatenated attribute string
};

struct Dataset {
    int owner_id = 0;
    std::vector<RawRecord> records;

    std::size_t size() const { return records.size(); }
};

/// A record as a token set. Tokens are unique; first occurrence order is
/// kept so downstream structures are deterministic.
struct TokenSet {
    RecordId record_id = 0;
    int owner_id = 0;
    std::vector<std::string> tokens;

    std::size_t size() const { return tokens.size(); }
    bool contains(std::string_view token) const;
};

/// Lowercase, collapse whitespace runs to a single space, trim.
std::string normalize_text(std::string_view text);

/// Sliding-window n-grams over pad + normalize(text) + pad, duplicates
/// dropped (first occurrence kept). Throws EmptyRecordError when the text
/// normalizes to nothing or the padded string is shorter than n.
TokenSet tokenize(const RawRecord& record, int gram_size = 2, char pad = '_');

std::vector<TokenSet> tokenize_all(const Dataset& dataset, int gram_size = 2, char pad = '_');
std::vector<TokenSet> tokenize_all(std::span<const Dataset> datasets, int gram_size = 2,
                                   char pad = '_');

/// UTF-8 CSV with a header row; text columns joined by one space, row order
/// preserved. Throws DuplicateIdError / SchemaError.
Dataset load_csv(const std::filesystem::path& path, const std::string& id_column,
                 const std::vector<std::string>& text_columns, int owner_id);

/// Unordered ground-truth pairs, two columns (id_a, id_b).
std::vector<std::pair<RecordId, RecordId>> load_truth_csv(const std::filesystem::path& path);
void write_truth_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<RecordId, RecordId>>& pairs);

struct SyntheticData {
    Dataset dataset; // originals first (ids 0..n_originals-1), then duplicates
    std::vector<std::pair<RecordId, RecordId>> truth; // (original, duplicate)
};

/// Seeded generator: person-like records plus duplicates derived by
/// character edits (substitute / delete / insert / transpose) at the given
/// per-character rate. Each duplicate derives from a distinct original.
SyntheticData generate_synthetic(std::uint64_t seed, std::size_t n_originals,
                                 std::size_t n_duplicates, double corruption_rate);

/// Disjoint order-preserving partition; sizes must be positive and sum to
/// the dataset size. Owner ids are reassigned 0..n-1.
std::vector<Dataset> split_dataset(const Dataset& dataset, const std::vector<std::size_t>& sizes);

} // namespace simjoin
