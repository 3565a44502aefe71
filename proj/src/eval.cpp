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

#include "simjoin/eval.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace simjoin::eval {

Metrics score(const MatchSet& found, const MatchSet& truth) {
    Metrics m;
    m.true_pairs = truth.size();
    m.found_pairs = found.size();
    for (const auto& pair : found) {
        if (truth.contains(pair)) ++m.correct_pairs;
    }
    m.precision_defined = m.found_pairs > 0;
    m.recall_defined = m.true_pairs > 0;
    m.precision = m.precision_defined
                      ? static_cast<double>(m.correct_pairs) / static_cast<double>(m.found_pairs)
                      : 0.0;
    m.recall = m.recall_defined
                   ? static_cast<double>(m.correct_pairs) / static_cast<double>(m.true_pairs)
                   : 0.0;
    const double pr_re = m.precision + m.recall;
    m.f_score = pr_re > 0.0 ? 2.0 * m.precision * m.recall / pr_re : 0.0;
    return m;
}

nlohmann::json BenchReport::to_json(bool include_timing) const {
    nlohmann::json j;
    j["engine"] = engine;
    j["dataset"] = dataset_descriptor;
    j["threshold"] = threshold;
    j["seed"] = seed;
    j["phase_ms"] = {
        {"local_preprocess", include_timing ? phases.local_preprocess_ms : 0.0},
        {"global_preprocess", include_timing ? phases.global_preprocess_ms : 0.0},
        {"join", include_timing ? phases.join_ms : 0.0},
    };
    j["counters"] = counters;
    j["metrics"] = {
        {"precision", metrics.precision},
        {"recall", metrics.recall},
        {"f_score", metrics.f_score},
        {"true_pairs", metrics.true_pairs},
        {"found_pairs", metrics.found_pairs},
        {"correct_pairs", metrics.correct_pairs},
        {"precision_defined", metrics.precision_defined},
        {"recall_defined", metrics.recall_defined},
    };
    return j;
}

BenchReport report_from_json(const nlohmann::json& j) {
    BenchReport r;
    r.engine = j.at("engine").get<std::string>();
    r.dataset_descriptor = j.at("dataset").get<std::string>();
    r.threshold = j.at("threshold").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& phases = j.at("phase_ms");
    r.phases.local_preprocess_ms = phases.at("local_preprocess").get<double>();
    r.phases.global_preprocess_ms = phases.at("global_preprocess").get<double>();
    r.phases.join_ms = phases.at("join").get<double>();
    r.counters = j.at("counters").get<std::map<std::string, std::uint64_t>>();
    const auto& metrics = j.at("metrics");
    r.metrics.precision = metrics.at("precision").get<double>();
    r.metrics.recall = metrics.at("recall").get<double>();
    r.metrics.f_score = metrics.at("f_score").get<double>();
    r.metrics.true_pairs = metrics.at("true_pairs").get<std::uint64_t>();
    r.metrics.found_pairs = metrics.at("found_pairs").get<std::uint64_t>();
    r.metrics.correct_pairs = metrics.at("correct_pairs").get<std::uint64_t>();
    r.metrics.precision_defined = metrics.at("precision_defined").get<bool>();
    r.metrics.recall_defined = metrics.at("recall_defined").get<bool>();
    return r;
}

Engine engine_from_name(const std::string& name) {
    if (name == "full") return Engine::kFullCompare;
    if (name == "ppjoin") return Engine::kPpjoin;
    if (name == "p4join") return Engine::kP4join;
    if (name == "heppjoin") return Engine::kHePpjoin;
    if (name == "hejaccard") return Engine::kHeJaccard;
    throw ConfigError("unknown engine '" + name + "'");
}

std::string engine_name(Engine engine) {
    switch (engine) {
    case Engine::kFullCompare: return "full";
    case Engine::kPpjoin: return "ppjoin";
    case Engine::kP4join: return "p4join";
    case Engine::kHePpjoin: return "heppjoin";
    case Engine::kHeJaccard: return "hejaccard";
    }
    return "unknown";
}

namespace {

std::vector<std::size_t> parse_split(const std::string& value) {
    std::vector<std::size_t> sizes;
    std::istringstream in(value);
    std::string part;
    while (std::getline(in, part, ',')) sizes.push_back(std::stoull(part));
    if (sizes.size() < 2) throw ConfigError("split needs at least two sizes");
    return sizes;
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> items;
    std::istringstream in(value);
    std::string part;
    while (std::getline(in, part, ',')) {
        if (!part.empty()) items.push_back(part);
    }
    return items;
}

P4Filters parse_filters(const std::string& value) {
    P4Filters filters = P4Filters::none();
    if (value == "none") return filters;
    for (const auto& name : parse_list(value)) {
        if (name == "length") {
            filters.length = true;
        } else if (name == "prefix") {
            filters.prefix = true;
        } else if (name == "position") {
            filters.position = true;
        } else if (name == "all") {
            filters = P4Filters::all();
        } else {
            throw ConfigError("unknown filter '" + name + "'");
        }
    }
    return filters;
}

bool parse_bool(const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("bad boolean '" + value + "'");
}

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "engine") {
        config.engine = engine_from_name(value);
    } else if (key == "t" || key == "threshold") {
        config.t = Threshold::parse(value);
        config.he.t = config.t;
    } else if (key == "seed") {
        config.seed = std::stoull(value);
        config.he.seed = config.seed;
    } else if (key == "gram_size") {
        config.gram_size = std::stoi(value);
        config.he.gram_size = config.gram_size;
    } else if (key == "n_originals") {
        config.n_originals = std::stoull(value);
    } else if (key == "n_duplicates") {
        config.n_duplicates = std::stoull(value);
    } else if (key == "corruption_rate") {
        config.corruption_rate = std::stod(value);
    } else if (key == "split") {
        config.split = parse_split(value);
    } else if (key == "input_csvs") {
        config.input_csvs = parse_list(value);
    } else if (key == "id_column") {
        config.id_column = value;
    } else if (key == "text_columns") {
        config.text_columns = parse_list(value);
    } else if (key == "truth_csv") {
        config.truth_csv = value;
    } else if (key == "p4.k") {
        config.fingerprint.k = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "p4.l") {
        config.fingerprint.l = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "p4.key_f") {
        config.fingerprint.key_f = value;
    } else if (key == "p4.key_g") {
        config.fingerprint.key_g = value;
    } else if (key == "p4.filters") {
        config.filters = parse_filters(value);
    } else if (key == "he.n") {
        config.he.n_parties = std::stoi(value);
    } else if (key == "he.d") {
        config.he.threshold_shares = std::stoi(value);
    } else if (key == "he.backend") {
        config.he.backend = value;
    } else if (key == "he.in_flight") {
        config.he.in_flight_limit = std::stoi(value);
    } else if (key == "he.plaintext_modulus") {
        config.he.plaintext_modulus = std::stoull(value);
        config.he.real.plaintext_modulus = config.he.plaintext_modulus;
    } else if (key == "he.mult_depth") {
        config.he.real.mult_depth = std::stoi(value);
    } else if (key == "he.sigma") {
        config.he.real.sigma = std::stod(value);
    } else if (key == "he.security_bits") {
        config.he.real.security_bits = std::stoi(value);
    } else if (key == "include_timing") {
        config.include_timing = parse_bool(value);
    } else if (key == "cross_dataset_only") {
        config.cross_dataset_only = parse_bool(value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    ExperimentConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trimmed(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key=value");
        }
        apply_config_entry(config, trimmed(stripped.substr(0, eq)),
                           trimmed(stripped.substr(eq + 1)));
    }
    return config;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Corpus {
    std::vector<Dataset> datasets;
    MatchSet truth;
    std::string descriptor;
};

Corpus load_corpus(const ExperimentConfig& config) {
    Corpus corpus;
    if (!config.input_csvs.empty()) {
        int owner = 0;
        for (const auto& path : config.input_csvs) {
            corpus.datasets.push_back(
                load_csv(path, config.id_column, config.text_columns, owner++));
        }
        std::string descriptor = "csv:";
        for (const auto& d : corpus.datasets) {
            descriptor += std::to_string(d.size()) + "/";
        }
        descriptor.pop_back();
        corpus.descriptor = descriptor;
        if (!config.truth_csv.empty()) {
            for (const auto& [a, b] : load_truth_csv(config.truth_csv)) {
                corpus.truth.emplace(a, b);
            }
        }
    } else {
        SyntheticData data = generate_synthetic(config.seed, config.n_originals,
                                                config.n_duplicates, config.corruption_rate);
        corpus.datasets = split_dataset(data.dataset, config.split);
        for (const auto& [a, b] : data.truth) corpus.truth.emplace(a, b);
        std::string descriptor = "synthetic:seed=" + std::to_string(config.seed) + ":";
        for (std::size_t s : config.split) descriptor += std::to_string(s) + "/";
        descriptor.pop_back();
        corpus.descriptor = descriptor;
    }
    return corpus;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    // Surface configuration problems before any work.
    if (config.engine == Engine::kP4join) config.fingerprint.validate();
    if ((config.engine == Engine::kHePpjoin || config.engine == Engine::kHeJaccard) &&
        config.he.backend != "simulation") {
        throw ConfigError("unknown backend '" + config.he.backend + "'");
    }

    Corpus corpus = load_corpus(config);
    // A single dataset means de-duplication: every pair inside it counts.
    const bool cross_only = config.cross_dataset_only && corpus.datasets.size() > 1;

    ExperimentResult result;
    result.report.engine = engine_name(config.engine);
    result.report.dataset_descriptor = corpus.descriptor;
    result.report.threshold = config.t.str();
    result.report.seed = config.seed;

    switch (config.engine) {
    case Engine::kFullCompare: {
        const auto start = Clock::now();
        result.pairs = full_compare(corpus.datasets, config.t, config.gram_size);
        result.report.phases.join_ms = ms_since(start);
        result.report.counters["pairs_emitted"] = result.pairs.size();
        break;
    }
    case Engine::kPpjoin: {
        const auto local_start = Clock::now();
        const auto token_sets = tokenize_all(std::span(corpus.datasets), config.gram_size);
        result.report.phases.local_preprocess_ms = ms_since(local_start);

        const auto global_start = Clock::now();
        const auto ordering = build_ordering(token_sets);
        const auto records = order_corpus(token_sets, ordering, config.t);
        result.report.phases.global_preprocess_ms = ms_since(global_start);

        const auto join_start = Clock::now();
        JoinResult join = ppjoin(records, config.t, cross_only);
        result.report.phases.join_ms = ms_since(join_start);
        result.pairs = std::move(join.pairs);
        result.report.counters = join.counters.as_map();
        break;
    }
    case Engine::kP4join: {
        const auto local_start = Clock::now();
        const auto token_sets = tokenize_all(std::span(corpus.datasets), config.gram_size);
        auto fingerprints = fingerprint_all(token_sets, config.fingerprint);
        result.report.phases.local_preprocess_ms = ms_since(local_start);

        const auto global_start = Clock::now();
        sort_by_cardinality(fingerprints);
        result.report.phases.global_preprocess_ms = ms_since(global_start);

        const auto join_start = Clock::now();
        P4JoinResult join =
            p4join(fingerprints, config.t, config.filters, cross_only);
        result.report.phases.join_ms = ms_since(join_start);
        result.pairs = std::move(join.pairs);
        result.report.counters = join.counters.as_map();
        break;
    }
    case Engine::kHePpjoin: {
        he::HeRunConfig he_config = config.he;
        he_config.t = config.t;
        he_config.seed = config.seed;
        he_config.gram_size = config.gram_size;
        he_config.n_parties = static_cast<int>(corpus.datasets.size());
        he::HeRunResult run = he::run_he_ppjoin(corpus.datasets, he_config);
        result.pairs = std::move(run.pairs);
        result.report.counters = std::move(run.counters);
        result.report.phases.local_preprocess_ms = run.times.local_preprocess_ms;
        result.report.phases.global_preprocess_ms = run.times.global_preprocess_ms;
        result.report.phases.join_ms = run.times.join_ms;
        break;
    }
    case Engine::kHeJaccard: {
        he::HeRunConfig he_config = config.he;
        he_config.t = config.t;
        he_config.seed = config.seed;
        he_config.gram_size = config.gram_size;
        he_config.n_parties = static_cast<int>(corpus.datasets.size());
        he::HeRunResult run = he::run_he_jaccard_full(corpus.datasets, he_config);
        result.pairs = std::move(run.pairs);
        result.report.counters = std::move(run.counters);
        result.report.phases.local_preprocess_ms = run.times.local_preprocess_ms;
        result.report.phases.join_ms = run.times.join_ms;
        break;
    }
    }

    result.truth = corpus.truth;
    if (result.truth.empty()) {
        // No labelled truth: score against the brute-force Jaccard oracle.
        result.truth = full_compare(corpus.datasets, config.t, config.gram_size);
    }
    result.report.metrics = score(result.pairs, result.truth);
    if (!config.include_timing) {
        result.report.phases = PhaseTimes{};
    }
    return result;
}

Comparison compare_engines(std::span<const BenchReport> reports) {
    if (reports.size() < 2) throw ConfigError("compare needs at least two reports");
    for (const auto& report : reports) {
        if (report.dataset_descriptor != reports.front().dataset_descriptor) {
            throw ConfigError("reports cover different corpora: '" +
                              report.dataset_descriptor + "' vs '" +
                              reports.front().dataset_descriptor + "'");
        }
    }

    auto counter = [](const BenchReport& r, const char* key) -> std::optional<std::uint64_t> {
        auto it = r.counters.find(key);
        if (it == r.counters.end()) return std::nullopt;
        return it->second;
    };

    std::ostringstream table;
    table << "dataset: " << reports.front().dataset_descriptor << "\n";
    table << std::left;
    table << std::setw(12) << "engine" << std::setw(8) << "t" << std::setw(10) << "f_score"
          << std::setw(12) << "found" << std::setw(14) << "comparisons" << std::setw(14)
          << "is_match" << std::setw(12) << "join_ms" << "\n";
    for (const auto& r : reports) {
        const auto comparisons = counter(r, "tanimoto_comparisons");
        const auto queries = counter(r, "is_match_queries");
        table << std::setw(12) << r.engine << std::setw(8) << r.threshold << std::setw(10)
              << std::fixed << std::setprecision(4) << r.metrics.f_score << std::setw(12)
              << r.metrics.found_pairs << std::setw(14)
              << (comparisons ? std::to_string(*comparisons) : "-") << std::setw(14)
              << (queries ? std::to_string(*queries) : "-") << std::setw(12)
              << std::setprecision(1) << r.phases.join_ms << "\n";
    }

    Comparison out;
    nlohmann::json flags;

    const BenchReport* he_join = nullptr;
    const BenchReport* he_baseline = nullptr;
    const BenchReport* p4_filtered = nullptr;
    const BenchReport* p4_unfiltered = nullptr;
    for (const auto& r : reports) {
        if (r.engine == "heppjoin") he_join = &r;
        if (r.engine == "hejaccard") he_baseline = &r;
        if (r.engine == "p4join") {
            const auto prunes = counter(r, "length_filter_prunes").value_or(0) +
                                counter(r, "prefix_filter_prunes").value_or(0) +
                                counter(r, "position_filter_prunes").value_or(0);
            (prunes > 0 ? p4_filtered : p4_unfiltered) = &r;
        }
    }
    if (he_join && he_baseline) {
        const auto a = counter(*he_join, "is_match_queries").value_or(0);
        const auto b = counter(*he_baseline, "is_match_queries").value_or(0);
        flags["heppjoin_saves_queries_vs_baseline"] = a < b;
        flags["heppjoin_is_match"] = a;
        flags["hejaccard_is_match"] = b;
    }
    if (p4_filtered && p4_unfiltered) {
        const auto a = counter(*p4_filtered, "tanimoto_comparisons").value_or(0);
        const auto b = counter(*p4_unfiltered, "tanimoto_comparisons").value_or(0);
        flags["p4join_filters_reduce_comparisons"] = a < b;
        flags["p4join_outputs_equal"] =
            p4_filtered->metrics.found_pairs == p4_unfiltered->metrics.found_pairs &&
            p4_filtered->metrics.correct_pairs == p4_unfiltered->metrics.correct_pairs;
    }
    out.flags = std::move(flags);
    out.table = table.str();
    return out;
}

} // namespace simjoin::eval
