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

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "simjoin/attacks.hpp"
#include "simjoin/csv.hpp"
#include "simjoin/eval.hpp"
#include "simjoin/he_protocol.hpp"
#include "simjoin/p4join.hpp"
#include "simjoin/ppjoin.hpp"

namespace {

using namespace simjoin;

struct CommonFlags {
    std::string t = "0.8";
    std::uint64_t seed = 42;
    std::string config;
    std::string out;
    std::string report;
    bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--t", flags.t, "similarity threshold (decimal or a/b)");
    cmd->add_option("--seed", flags.seed, "rng seed");
    cmd->add_option("--config", flags.config, "key=value config file");
    cmd->add_option("--out", flags.out, "output csv path");
    cmd->add_option("--report", flags.report, "report json path");
    cmd->add_flag("--no-timing", flags.no_timing,
                  "zero wall-clock fields so reports are byte-reproducible");
}

struct CorpusFlags {
    std::vector<std::string> inputs;
    std::string id_column = "id";
    std::vector<std::string> text_columns = {"text"};
    std::string truth;
    std::size_t n_originals = 80;
    std::size_t n_duplicates = 20;
    double corruption = 0.1;
    std::vector<std::size_t> split = {80, 20};
};

void add_corpus(CLI::App* cmd, CorpusFlags& flags) {
    cmd->add_option("--input", flags.inputs, "input csv, one per party (repeatable)");
    cmd->add_option("--id-col", flags.id_column, "id column name");
    cmd->add_option("--text-cols", flags.text_columns, "text column names")->delimiter(',');
    cmd->add_option("--truth", flags.truth, "ground-truth pair csv");
    cmd->add_option("--n-originals", flags.n_originals, "synthetic originals");
    cmd->add_option("--n-duplicates", flags.n_duplicates, "synthetic duplicates");
    cmd->add_option("--corruption", flags.corruption, "synthetic corruption rate");
    cmd->add_option("--split", flags.split, "synthetic split sizes")->delimiter(',');
}

eval::ExperimentConfig build_config(const CommonFlags& common, const CorpusFlags& corpus) {
    eval::ExperimentConfig config;
    if (!common.config.empty()) config = eval::parse_config_file(common.config);
    config.t = Threshold::parse(common.t);
    config.he.t = config.t;
    config.seed = common.seed;
    config.he.seed = common.seed;
    config.include_timing = !common.no_timing;
    if (!corpus.inputs.empty()) config.input_csvs = corpus.inputs;
    config.id_column = corpus.id_column;
    config.text_columns = corpus.text_columns;
    if (!corpus.truth.empty()) config.truth_csv = corpus.truth;
    config.n_originals = corpus.n_originals;
    config.n_duplicates = corpus.n_duplicates;
    config.corruption_rate = corpus.corruption;
    config.split = corpus.split;
    return config;
}

int emit_experiment(const eval::ExperimentConfig& config, const CommonFlags& common) {
    const eval::ExperimentResult result = eval::run_experiment(config);
    if (!common.out.empty()) write_pairs_csv(common.out, result.pairs);
    const nlohmann::json report = result.report.to_json(config.include_timing);
    if (!common.report.empty()) {
        std::ofstream out(common.report, std::ios::binary);
        out << report.dump(2) << '\n';
    }
    std::cout << report.dump(2) << std::endl;
    return 0;
}

void add_fingerprint_flags(CLI::App* cmd, FingerprintParams& params) {
    cmd->add_option("--k", params.k, "hash count per token");
    cmd->add_option("--l", params.l, "fingerprint bits");
    cmd->add_option("--key-f", params.key_f, "HMAC-SHA1 key");
    cmd->add_option("--key-g", params.key_g, "HMAC-MD5 key");
}

std::vector<Dataset> load_or_generate(const eval::ExperimentConfig& config) {
    if (!config.input_csvs.empty()) {
        std::vector<Dataset> datasets;
        int owner = 0;
        for (const auto& path : config.input_csvs) {
            datasets.push_back(load_csv(path, config.id_column, config.text_columns, owner++));
        }
        return datasets;
    }
    const SyntheticData data = generate_synthetic(config.seed, config.n_originals,
                                                  config.n_duplicates, config.corruption_rate);
    return split_dataset(data.dataset, config.split);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"similarity-join toolkit: exact, fingerprint and encrypted joins"};
    app.require_subcommand(1);

    // --- gen ---------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic corpus + truth pairs");
    struct {
        std::uint64_t seed = 42;
        std::size_t n_originals = 80;
        std::size_t n_duplicates = 20;
        double corruption = 0.1;
        std::string out = "corpus.csv";
        std::string truth = "truth.csv";
    } gen_flags;
    gen->add_option("--seed", gen_flags.seed, "rng seed");
    gen->add_option("--n-originals", gen_flags.n_originals, "original records");
    gen->add_option("--n-duplicates", gen_flags.n_duplicates, "derived duplicates");
    gen->add_option("--corruption", gen_flags.corruption, "per-character edit rate");
    gen->add_option("--out", gen_flags.out, "corpus csv path");
    gen->add_option("--truth", gen_flags.truth, "truth csv path");
    gen->callback([&] {
        const SyntheticData data =
            generate_synthetic(gen_flags.seed, gen_flags.n_originals, gen_flags.n_duplicates,
                               gen_flags.corruption);
        std::vector<std::vector<std::string>> rows;
        rows.reserve(data.dataset.size());
        for (const auto& r : data.dataset.records) {
            rows.push_back({std::to_string(r.record_id), r.text});
        }
        csv::write_file(gen_flags.out, {"id", "text"}, rows);
        write_truth_csv(gen_flags.truth, data.truth);
        std::cout << "wrote " << data.dataset.size() << " records to " << gen_flags.out << " and "
                  << data.truth.size() << " truth pairs to " << gen_flags.truth << std::endl;
    });

    // --- ppjoin / full -----------------------------------------------------
    auto* ppjoin_cmd = app.add_subcommand("ppjoin", "exact prefix-position join");
    static CommonFlags pp_common;
    static CorpusFlags pp_corpus;
    add_common(ppjoin_cmd, pp_common);
    add_corpus(ppjoin_cmd, pp_corpus);
    static bool pp_dedup = false;
    ppjoin_cmd->add_flag("--dedup", pp_dedup, "also pair records of the same owner");
    ppjoin_cmd->callback([&] {
        eval::ExperimentConfig config = build_config(pp_common, pp_corpus);
        config.engine = eval::Engine::kPpjoin;
        config.cross_dataset_only = !pp_dedup;
        std::exit(emit_experiment(config, pp_common));
    });

    // --- p4join ------------------------------------------------------------
    auto* p4_cmd = app.add_subcommand("p4join", "Bloom-fingerprint join");
    static CommonFlags p4_common;
    static CorpusFlags p4_corpus;
    add_common(p4_cmd, p4_common);
    add_corpus(p4_cmd, p4_corpus);
    static FingerprintParams p4_params{2, 1000, "key-f", "key-g"};
    add_fingerprint_flags(p4_cmd, p4_params);
    static std::string p4_filters = "all";
    static std::string p4_fingerprints_out;
    p4_cmd->add_option("--filters", p4_filters, "none | all | comma list of length,prefix,position");
    p4_cmd->add_option("--fingerprints-out", p4_fingerprints_out,
                       "also write the fingerprint corpus for the attack tools");
    p4_cmd->callback([&] {
        eval::ExperimentConfig config = build_config(p4_common, p4_corpus);
        config.engine = eval::Engine::kP4join;
        config.fingerprint = p4_params;
        eval::apply_config_entry(config, "p4.filters", p4_filters);
        if (!p4_fingerprints_out.empty()) {
            // Reproduce the engine's corpus and emit its fingerprints.
            const std::vector<Dataset> datasets = load_or_generate(config);
            const auto token_sets = tokenize_all(std::span(datasets), config.gram_size);
            const auto fingerprints = fingerprint_all(token_sets, config.fingerprint);
            write_fingerprints(p4_fingerprints_out, config.fingerprint, fingerprints);
        }
        std::exit(emit_experiment(config, p4_common));
    });

    // --- heppjoin ----------------------------------------------------------
    auto* he_cmd = app.add_subcommand("heppjoin", "threshold-encrypted join (simulation backend)");
    static CommonFlags he_common;
    static CorpusFlags he_corpus;
    add_common(he_cmd, he_common);
    add_corpus(he_cmd, he_corpus);
    static int he_n = 2, he_d = 2, he_inflight = 1;
    static std::string he_backend = "simulation";
    static std::string he_transcript_out;
    static bool he_baseline = false;
    static bool he_audit = false;
    he_cmd->add_option("--n", he_n, "parties");
    he_cmd->add_option("--d", he_d, "decryption threshold");
    he_cmd->add_option("--backend", he_backend, "crypto backend name");
    he_cmd->add_option("--in-flight", he_inflight, "max concurrent is_match queries");
    he_cmd->add_option("--transcript", he_transcript_out, "write host transcript (ndjson)");
    he_cmd->add_flag("--baseline", he_baseline, "run the HE-Jaccard full comparison instead");
    he_cmd->add_flag("--audit", he_audit, "audit the host transcript after the run");
    he_cmd->callback([&] {
        eval::ExperimentConfig config = build_config(he_common, he_corpus);
        config.engine = he_baseline ? eval::Engine::kHeJaccard : eval::Engine::kHePpjoin;
        config.he.threshold_shares = he_d;
        config.he.n_parties = he_n;
        config.he.backend = he_backend;
        config.he.in_flight_limit = he_inflight;

        if (he_transcript_out.empty() && !he_audit) {
            std::exit(emit_experiment(config, he_common));
        }
        // Need the transcript: run the protocol directly.
        const std::vector<Dataset> datasets = load_or_generate(config);
        he::HeRunConfig run_config = config.he;
        run_config.n_parties = static_cast<int>(datasets.size());
        const he::HeRunResult run = he_baseline ? he::run_he_jaccard_full(datasets, run_config)
                                                : he::run_he_ppjoin(datasets, run_config);
        if (!he_common.out.empty()) write_pairs_csv(he_common.out, run.pairs);
        if (!he_transcript_out.empty()) {
            std::ofstream out(he_transcript_out, std::ios::binary);
            run.transcript.write_ndjson(out);
        }
        if (he_audit) {
            const he::AuditReport audit = he::audit_transcript(run.transcript);
            std::cout << "audit passed; stats:" << std::endl;
            for (const auto& [key, value] : audit.stats) {
                std::cout << "  " << key << "=" << value << std::endl;
            }
        }
        nlohmann::json summary = {{"pairs", run.pairs.size()}, {"counters", run.counters}};
        std::cout << summary.dump(2) << std::endl;
        std::exit(0);
    });

    // --- attack ------------------------------------------------------------
    auto* attack = app.add_subcommand("attack", "attacks against fingerprint corpora");
    attack->require_subcommand(1);

    auto* sens = attack->add_subcommand("sensitivity", "per-bit sensitivity report");
    static std::string sens_fps, sens_out = "sensitivity.csv";
    static FingerprintParams sens_params{2, 1000, "key-f", "key-g"};
    add_fingerprint_flags(sens, sens_params);
    sens->add_option("--fingerprints", sens_fps, "fingerprint corpus file")->required();
    sens->add_option("--out", sens_out, "csv report path");
    sens->callback([&] {
        const FingerprintFile corpus = read_fingerprints(sens_fps);
        sens_params.k = corpus.k;
        sens_params.l = corpus.l;
        const auto universe = attacks::default_universe();
        const auto report = attacks::bit_sensitivity(corpus, universe, sens_params);
        attacks::write_sensitivity_csv(sens_out, report);
        const auto ranking = report.ranking();
        std::cout << "wrote " << report.bits.size() << " positions to " << sens_out
                  << "; most sensitive bits:";
        for (std::size_t i = 0; i < std::min<std::size_t>(5, ranking.size()); ++i) {
            std::cout << ' ' << ranking[i];
        }
        std::cout << std::endl;
    });

    auto* enumerate = attack->add_subcommand("enumerate", "brute-force token recovery");
    static std::string enum_fps;
    static std::size_t enum_budget = 10000;
    static FingerprintParams enum_params{2, 1000, "key-f", "key-g"};
    add_fingerprint_flags(enumerate, enum_params);
    enumerate->add_option("--fingerprints", enum_fps, "fingerprint corpus file")->required();
    enumerate->add_option("--budget", enum_budget, "max candidates per record");
    enumerate->callback([&] {
        const FingerprintFile corpus = read_fingerprints(enum_fps);
        corpus.check_params(enum_params);
        const auto universe = attacks::default_universe();
        std::size_t covered = 0, truncated = 0;
        std::uint64_t total_candidates = 0;
        for (const auto& fp : corpus.fingerprints) {
            const auto recovery = attacks::enumeration_attack(fp, universe, enum_params, enum_budget);
            covered += recovery.covers_target ? 1 : 0;
            truncated += recovery.truncated ? 1 : 0;
            total_candidates += recovery.candidates.size();
        }
        nlohmann::json summary = {
            {"records", corpus.fingerprints.size()},
            {"covered_targets", covered},
            {"truncated", truncated},
            {"mean_candidates",
             corpus.fingerprints.empty()
                 ? 0.0
                 : static_cast<double>(total_candidates) /
                       static_cast<double>(corpus.fingerprints.size())},
        };
        std::cout << summary.dump(2) << std::endl;
    });

    auto* rainbow = attack->add_subcommand("rainbow", "rainbow-table lookup");
    static std::string rb_dict, rb_fps;
    static std::string rb_dict_id = "id";
    static std::vector<std::string> rb_dict_cols = {"text"};
    static FingerprintParams rb_params{2, 1000, "key-f", "key-g"};
    add_fingerprint_flags(rainbow, rb_params);
    rainbow->add_option("--dictionary", rb_dict, "csv of candidate cleartexts")->required();
    rainbow->add_option("--id-col", rb_dict_id, "dictionary id column");
    rainbow->add_option("--text-cols", rb_dict_cols, "dictionary text columns")->delimiter(',');
    rainbow->add_option("--fingerprints", rb_fps, "fingerprint corpus to look up")->required();
    rainbow->callback([&] {
        const Dataset dict = load_csv(rb_dict, rb_dict_id, rb_dict_cols, 0);
        std::vector<std::string> cleartexts;
        cleartexts.reserve(dict.size());
        for (const auto& r : dict.records) cleartexts.push_back(r.text);
        const auto table = attacks::RainbowTable::build(cleartexts, rb_params);
        const FingerprintFile corpus = read_fingerprints(rb_fps);
        corpus.check_params(rb_params);
        std::size_t hits = 0;
        for (const auto& fp : corpus.fingerprints) {
            const auto matches = table.lookup(fp);
            if (matches.empty()) continue;
            ++hits;
            std::cout << fp.record_id << ": ";
            for (std::size_t i = 0; i < matches.size(); ++i) {
                std::cout << (i ? " | " : "") << matches[i];
            }
            std::cout << '\n';
        }
        std::cout << hits << "/" << corpus.fingerprints.size() << " fingerprints resolved"
                  << std::endl;
    });

    // --- bench -------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "run one experiment from flags/config");
    static CommonFlags bench_common;
    static CorpusFlags bench_corpus;
    static std::string bench_engine = "ppjoin";
    add_common(bench, bench_common);
    add_corpus(bench, bench_corpus);
    bench->add_option("--engine", bench_engine, "full | ppjoin | p4join | heppjoin | hejaccard");
    bench->callback([&] {
        eval::ExperimentConfig config = build_config(bench_common, bench_corpus);
        config.engine = eval::engine_from_name(bench_engine);
        std::exit(emit_experiment(config, bench_common));
    });

    // --- compare -----------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "compare saved reports side by side");
    static std::vector<std::string> compare_reports;
    compare->add_option("reports", compare_reports, "report json files")->required();
    compare->callback([&] {
        std::vector<eval::BenchReport> reports;
        for (const auto& path : compare_reports) {
            std::ifstream in(path);
            if (!in) throw ConfigError("cannot open report " + path);
            reports.push_back(eval::report_from_json(nlohmann::json::parse(in)));
        }
        const eval::Comparison comparison = eval::compare_engines(reports);
        std::cout << comparison.table;
        std::cout << comparison.flags.dump(2) << std::endl;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const simjoin::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
