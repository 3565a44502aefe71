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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simjoin/he_protocol.hpp"
#include "simjoin/p4join.hpp"
#include "simjoin/ppjoin.hpp"

namespace simjoin::eval {

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    std::uint64_t true_pairs = 0;
    std::uint64_t found_pairs = 0;
    std::uint64_t correct_pairs = 0;
    bool precision_defined = false; // found_pairs > 0
    bool recall_defined = false;    // true_pairs > 0
};

/// Precision = |M∩P|/|P|, recall = |M∩P|/|M|, F their harmonic mean.
/// Undefined ratios are reported as 0 with the matching flag cleared.
Metrics score(const MatchSet& found, const MatchSet& truth);

struct PhaseTimes {
    double local_preprocess_ms = 0.0;
    double global_preprocess_ms = 0.0;
    double join_ms = 0.0;
};

struct BenchReport {
    std::string engine;
    std::string dataset_descriptor;
    std::string threshold;
    std::uint64_t seed = 0;
    PhaseTimes phases;
    std::map<std::string, std::uint64_t> counters;
    Metrics metrics;

    /// Flat key/value form with stable (sorted) keys. Wall-clock fields are
    /// zeroed when include_timing is false so reports become byte-identical
    /// across runs with the same seed.
    nlohmann::json to_json(bool include_timing = true) const;
};

BenchReport report_from_json(const nlohmann::json& j);

enum class Engine { kFullCompare, kPpjoin, kP4join, kHePpjoin, kHeJaccard };

Engine engine_from_name(const std::string& name);
std::string engine_name(Engine engine);

struct ExperimentConfig {
    Engine engine = Engine::kPpjoin;
    Threshold t{8, 10};
    std::uint64_t seed = 42;
    int gram_size = 2;

    // Synthetic corpus (used unless csv inputs are given).
    std::size_t n_originals = 80;
    std::size_t n_duplicates = 20;
    double corruption_rate = 0.1;
    std::vector<std::size_t> split = {80, 20};

    // Optional file inputs: one csv per party.
    std::vector<std::string> input_csvs;
    std::string id_column = "id";
    std::vector<std::string> text_columns = {"text"};
    std::string truth_csv;

    // p4join.
    FingerprintParams fingerprint{2, 1000, "key-f", "key-g"};
    P4Filters filters = P4Filters::all();

    // he-ppjoin / he-jaccard.
    he::HeRunConfig he;

    bool include_timing = true;
    bool cross_dataset_only = true;
};

/// Flat key=value file ('#' comments); unknown keys are rejected.
ExperimentConfig parse_config_file(const std::filesystem::path& path);
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

struct ExperimentResult {
    BenchReport report;
    MatchSet pairs;
    MatchSet truth;
};

/// Loads or generates the corpus, runs the selected engine, scores it
/// against the truth pairs (generator truth, the truth csv, or the
/// brute-force Jaccard oracle when neither exists).
ExperimentResult run_experiment(const ExperimentConfig& config);

struct Comparison {
    std::string table; // aligned, human-readable
    nlohmann::json flags;
};

/// Side-by-side table for reports over the same corpus descriptor, plus
/// flags for the headline claims: the private join must beat its full
/// comparison baseline in queries, and filtered P4Join must compare fewer
/// pairs than the unfiltered scan.
Comparison compare_engines(std::span<const BenchReport> reports);

} // namespace simjoin::eval
