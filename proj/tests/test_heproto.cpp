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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "simjoin/he_protocol.hpp"

#include "leaky_backend.hpp"
#include "oracles.hpp"

using namespace simjoin;
using namespace simjoin::he;

namespace {

const std::vector<int> kBothShares = {0, 1};

Dataset tiny_dataset(int owner, std::vector<std::string> texts, RecordId first_id) {
    Dataset dataset;
    dataset.owner_id = owner;
    RecordId id = first_id;
    for (auto& text : texts) {
        dataset.records.push_back({id++, owner, std::move(text)});
    }
    return dataset;
}

HeRunConfig config_for(Threshold t, std::uint64_t seed = 7) {
    HeRunConfig config;
    config.t = t;
    config.seed = seed;
    return config;
}

} // namespace

TEST_CASE("keygen enforces the threshold bounds") {
    SimulationBackend backend;
    CHECK_THROWS_AS(backend.keygen(2, 3), ConfigError);
    CHECK_THROWS_AS(backend.keygen(2, 0), ConfigError);
    const MultipartyKeyPair kp = backend.keygen(5, 3);
    CHECK(kp.n_parties == 5);
    CHECK(kp.threshold == 3);
    CHECK(kp.share_ids.size() == 5);
}

TEST_CASE("threshold semantics: d shares decrypt, d-1 reveal nothing") {
    SimulationBackend backend;
    backend.keygen(5, 3);
    const auto c1 = backend.encrypt("to");
    const auto c2 = backend.encrypt("to");

    const std::vector<int> three = {0, 2, 4};
    const std::vector<int> another_three = {1, 2, 3};
    const std::vector<int> two = {0, 1};
    const std::vector<int> duplicated = {0, 0, 0}; // one distinct share
    CHECK(backend.is_zero_after_sub_mul_random(c1, c2, three).is_zero);
    CHECK(backend.is_zero_after_sub_mul_random(c1, c2, another_three).is_zero);
    CHECK_THROWS_AS(backend.is_zero_after_sub_mul_random(c1, c2, two), ThresholdUnmetError);
    CHECK_THROWS_AS(backend.is_zero_after_sub_mul_random(c1, c2, duplicated), ThresholdUnmetError);
    CHECK_THROWS_AS(backend.decrypt(c1, two), ThresholdUnmetError);
    CHECK(backend.decrypt(c1, three) == "to");

    // Degenerate single-party case.
    SimulationBackend solo;
    solo.keygen(1, 1);
    const auto c = solo.encrypt("x");
    const std::vector<int> one = {0};
    CHECK(solo.decrypt(c, one) == "x");
}

TEST_CASE("equal plaintexts encrypt to unlinkable handles") {
    SimulationBackend backend;
    backend.keygen(2, 2);
    const auto a = backend.encrypt("to");
    const auto b = backend.encrypt("to");
    CHECK(a.id != b.id); // bitwise comparison never links them
    CHECK(backend.is_zero_after_sub_mul_random(a, b, kBothShares).is_zero);
}

TEST_CASE("local pre-processing encrypts records and the frequency map") {
    SimulationBackend backend;
    backend.keygen(2, 2);
    const Dataset dataset = tiny_dataset(0, {"tony stark", "tony stark", "bruce banner"}, 0);
    const LocalPreprocessResult local = local_preprocess(dataset, backend, 2, 99);

    REQUIRE(local.records.size() == 3);
    // Entry count equals the number of distinct local tokens.
    std::set<std::string> distinct;
    for (const auto& set : tokenize_all(dataset)) {
        distinct.insert(set.tokens.begin(), set.tokens.end());
    }
    CHECK(local.ordering.entries.size() == distinct.size());

    // Decrypt round trip recovers each record's token multiset.
    const auto token_sets = tokenize_all(dataset);
    for (std::size_t r = 0; r < local.records.size(); ++r) {
        std::multiset<std::string> decrypted;
        for (const auto& handle : local.records[r].token_handles) {
            decrypted.insert(backend.decrypt(handle, kBothShares));
        }
        const std::multiset<std::string> expected(token_sets[r].tokens.begin(),
                                                  token_sets[r].tokens.end());
        CHECK(decrypted == expected);
        CHECK(local.records[r].length() == token_sets[r].size());
    }

    // Re-encrypting yields entirely fresh handles.
    const LocalPreprocessResult again = local_preprocess(dataset, backend, 2, 99);
    std::set<std::uint64_t> first_ids, second_ids;
    for (const auto& rec : local.records) {
        for (const auto& h : rec.token_handles) first_ids.insert(h.id);
    }
    for (const auto& rec : again.records) {
        for (const auto& h : rec.token_handles) second_ids.insert(h.id);
    }
    for (auto id : second_ids) CHECK(!first_ids.contains(id));
}

TEST_CASE("is_match reproduces the plaintext equality matrix") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);

    const std::vector<std::string> tokens = {"to", "on", "ny", "st", "ta",
                                             "to", "on", "ar", "rk", "ny"};
    std::vector<CiphertextHandle> handles;
    handles.reserve(tokens.size());
    for (const auto& token : tokens) handles.push_back(backend.encrypt(token));

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (std::size_t j = 0; j < tokens.size(); ++j) {
            CHECK(host.is_match(handles[i], handles[j]) == (tokens[i] == tokens[j]));
        }
    }
}

TEST_CASE("is_match is symmetric and transitive over handle classes") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);
    const auto a = backend.encrypt("ny");
    const auto b = backend.encrypt("ny");
    const auto c = backend.encrypt("ny");
    const auto d = backend.encrypt("on");
    CHECK(host.is_match(a, b));
    CHECK(host.is_match(b, a));
    CHECK(host.is_match(b, c));
    CHECK(host.is_match(a, c)); // transitivity across the class
    CHECK(!host.is_match(a, d));
    CHECK(!host.is_match(d, b));
}

TEST_CASE("mismatch masks are fresh randomness, match masks are zero") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);
    const auto a = backend.encrypt("to");
    const auto b = backend.encrypt("ny");
    const auto c = backend.encrypt("to");

    std::set<std::uint64_t> masks;
    for (int i = 0; i < 20; ++i) {
        CHECK(!host.is_match(a, b));
        masks.insert(host.transcript().events().back().mask);
    }
    CHECK(masks.size() >= 2); // repeated queries decrypt to different values
    for (auto mask : masks) CHECK(mask != 0);

    CHECK(host.is_match(a, c));
    CHECK(host.transcript().events().back().mask == 0);
}

TEST_CASE("a session with d-1 shares raises ThresholdUnmet and logs nothing") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);
    host.set_participating_shares({0});
    const auto a = backend.encrypt("to");
    const auto b = backend.encrypt("ny");
    CHECK_THROWS_AS(host.is_match(a, b), ThresholdUnmetError);
    CHECK(host.transcript().is_match_count() == 0); // no partial information
}

TEST_CASE("doc_freq_join accumulates matched tokens and inserts fresh ones") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);

    SUBCASE("identical maps double every frequency") {
        HostSession host(backend, kp);
        LocalEncryptedOrdering o1{0, {}};
        LocalEncryptedOrdering o2{1, {}};
        for (const auto& token : {"to", "on", "ny"}) {
            o1.entries.push_back({backend.encrypt(token), 1});
            o2.entries.push_back({backend.encrypt(token), 1});
        }
        const std::vector<LocalEncryptedOrdering> locals = {o1, o2};
        const EncryptedOrdering ordering = host.doc_freq_join(locals);
        REQUIRE(ordering.entries.size() == 3);
        for (const auto& entry : ordering.entries) CHECK(entry.doc_freq == 2);
    }

    SUBCASE("disjoint maps concatenate") {
        HostSession host(backend, kp);
        LocalEncryptedOrdering o1{0, {}};
        LocalEncryptedOrdering o2{1, {}};
        for (const auto& token : {"aa", "bb"}) o1.entries.push_back({backend.encrypt(token), 1});
        for (const auto& token : {"cc", "dd", "ee"}) {
            o2.entries.push_back({backend.encrypt(token), 1});
        }
        const std::vector<LocalEncryptedOrdering> locals = {o1, o2};
        const EncryptedOrdering ordering = host.doc_freq_join(locals);
        CHECK(ordering.entries.size() == 5);
        for (const auto& entry : ordering.entries) CHECK(entry.doc_freq == 1);
    }
}

TEST_CASE("the decrypted global ordering equals the plaintext frequency join") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);

    const auto datasets = oracles::two_party_corpus(71, 24);
    std::vector<LocalEncryptedOrdering> locals;
    std::vector<LocalPreprocessResult> results;
    for (const auto& dataset : datasets) {
        results.push_back(local_preprocess(dataset, backend, 2, 5));
        locals.push_back(results.back().ordering);
    }
    const EncryptedOrdering ordering = host.doc_freq_join(locals);

    // Plaintext oracle: document frequency over the merged corpus.
    std::map<std::string, std::uint32_t> expected;
    for (const auto& dataset : datasets) {
        for (const auto& set : tokenize_all(dataset)) {
            for (const auto& token : std::set<std::string>(set.tokens.begin(), set.tokens.end())) {
                expected[token] += 1;
            }
        }
    }
    REQUIRE(ordering.entries.size() == expected.size());
    std::uint32_t prev_freq = 0;
    const std::vector<int> shares = {0, 1};
    for (const auto& entry : ordering.entries) {
        const std::string token = backend.decrypt(entry.token, shares);
        REQUIRE(expected.contains(token));
        CHECK(entry.doc_freq == expected[token]);
        CHECK(entry.doc_freq >= prev_freq); // ranks ascend by frequency
        prev_freq = entry.doc_freq;
    }
}

TEST_CASE("private_set_intersection counts matches through the contract") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);

    std::vector<CiphertextHandle> x, y;
    for (const auto& token : {"a1", "b2", "c3", "d4", "e5", "f6", "g7"}) {
        x.push_back(backend.encrypt(token));
        y.push_back(backend.encrypt(token));
    }
    CHECK(host.private_set_intersection(x, y) == 7);

    std::vector<CiphertextHandle> z;
    for (const auto& token : {"q1", "q2"}) z.push_back(backend.encrypt(token));
    CHECK(host.private_set_intersection(x, z) == 0);
}

TEST_CASE("suffix-slice intersection matches the plaintext verify count") {
    // The worked example pair, sliced exactly as the verification step
    // does: x from its prefix end, y from its accumulated overlap.
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);

    const std::vector<std::string> x_tokens = {"-s", "$t", "st", "ar", "rk",
                                               "ta", "to", "on", "ny", "y-"};
    const std::vector<std::string> y_tokens = {"-$", "ar", "rk", "ta", "to",
                                               "on", "ny", "y-", "st"};
    const std::size_t p_x = 3, a_y = 1;

    std::vector<CiphertextHandle> x, y;
    for (const auto& t : x_tokens) x.push_back(backend.encrypt(t));
    for (const auto& t : y_tokens) y.push_back(backend.encrypt(t));

    std::size_t expected = 0;
    for (std::size_t i = p_x; i < x_tokens.size(); ++i) {
        for (std::size_t j = a_y; j < y_tokens.size(); ++j) {
            expected += x_tokens[i] == y_tokens[j] ? 1 : 0;
        }
    }
    CHECK(host.private_set_intersection(std::span(x).subspan(p_x), std::span(y).subspan(a_y)) ==
          expected);
}

TEST_CASE("he_ppjoin output equals plaintext ppjoin restricted to cross pairs") {
    for (const auto t : {Threshold::make(2, 10), Threshold::make(1, 2), Threshold::make(8, 10)}) {
        const auto datasets = oracles::two_party_corpus(81, 40);
        const HeRunResult he_run = run_he_ppjoin(datasets, config_for(t));
        const JoinResult plain = ppjoin_datasets(datasets, t, /*cross_dataset_only=*/true);
        CHECK(he_run.pairs == plain.pairs);
    }
}

TEST_CASE("same-owner duplicates are never emitted by the protocol") {
    const Dataset a = tiny_dataset(0, {"tony stark", "tony stark", "carol danvers"}, 0);
    const Dataset b = tiny_dataset(1, {"tony starke", "hope pym"}, 10);
    const std::vector<Dataset> datasets = {a, b};
    const HeRunResult run = run_he_ppjoin(datasets, config_for(Threshold::make(1, 2)));
    CHECK(!run.pairs.contains(MatchPair(0, 1))); // same owner, identical text
    CHECK(run.pairs.contains(MatchPair(0, 10)));
    CHECK(run.pairs.contains(MatchPair(1, 10)));
}

TEST_CASE("a higher threshold issues fewer is_match queries") {
    const auto datasets = oracles::two_party_corpus(83, 30);
    const HeRunResult low = run_he_ppjoin(datasets, config_for(Threshold::make(2, 10)));
    const HeRunResult high = run_he_ppjoin(datasets, config_for(Threshold::make(8, 10)));
    CHECK(high.counters.at("is_match_queries") < low.counters.at("is_match_queries"));
}

TEST_CASE("the emitted pair set is independent of the host's rng seed") {
    const auto datasets = oracles::two_party_corpus(87, 26);
    const Threshold t = Threshold::make(1, 2);
    const HeRunResult a = run_he_ppjoin(datasets, config_for(t, 1));
    const HeRunResult b = run_he_ppjoin(datasets, config_for(t, 999));
    CHECK(a.pairs == b.pairs);
}

TEST_CASE("he_verify leaves zeroed candidates untouched") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);

    const Dataset a = tiny_dataset(0, {"tony stark"}, 0);
    const Dataset b = tiny_dataset(1, {"tony stark"}, 1);
    auto la = local_preprocess(a, backend, 2, 1);
    auto lb = local_preprocess(b, backend, 2, 2);
    std::vector<EncryptedRecord> records = la.records;
    records.insert(records.end(), lb.records.begin(), lb.records.end());
    host.register_records(records);
    const std::vector<LocalEncryptedOrdering> locals = {la.ordering, lb.ordering};
    const EncryptedOrdering ordering = host.doc_freq_join(locals);

    const Threshold t = Threshold::make(1, 2);
    const auto ordered = he_order_records(host, records, ordering, t);

    OverlapMap overlaps;
    overlaps.set(0, 0); // pruned
    const std::uint64_t before = host.transcript().is_match_count();
    std::map<std::string, std::uint64_t> counters;
    CHECK(he_verify(host, ordered[1], ordered, overlaps, t, &counters).empty());
    CHECK(host.transcript().is_match_count() == before); // not a single query
    CHECK(counters["verify_psi_calls"] == 0);
}

TEST_CASE("he_verify skips the intersection when the ubound falls short") {
    // Mirror of the plaintext adversarial case: records sharing exactly the
    // rarest token at t=0.9 cannot reach alpha, so no PSI call may appear.
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);

    std::vector<std::string> x_texts, y_texts;
    Dataset a(0, {});
    Dataset b(1, {});
    a.records.push_back({0, 0, "abcdefghij"});
    b.records.push_back({1, 1, "abzyxwvuts"});
    auto la = local_preprocess(a, backend, 2, 1);
    auto lb = local_preprocess(b, backend, 2, 2);
    std::vector<EncryptedRecord> records = la.records;
    records.insert(records.end(), lb.records.begin(), lb.records.end());
    host.register_records(records);
    const std::vector<LocalEncryptedOrdering> locals = {la.ordering, lb.ordering};
    const EncryptedOrdering ordering = host.doc_freq_join(locals);

    const Threshold t = Threshold::make(9, 10);
    const auto ordered = he_order_records(host, records, ordering, t);
    REQUIRE(ordered[0].size() == ordered[1].size()); // both 11 bigrams

    OverlapMap overlaps;
    overlaps.bump(0); // one shared prefix token accumulated
    const std::uint64_t before = host.transcript().is_match_count();
    std::map<std::string, std::uint64_t> counters;
    CHECK(he_verify(host, ordered[1], ordered, overlaps, t, &counters).empty());
    CHECK(counters["verify_psi_calls"] == 0);
    CHECK(host.transcript().is_match_count() == before);
}

TEST_CASE("rank_of raises ProtocolError for a token outside the ordering") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);

    LocalEncryptedOrdering local{0, {{backend.encrypt("aa"), 1}, {backend.encrypt("bb"), 1}}};
    const std::vector<LocalEncryptedOrdering> locals = {local};
    const EncryptedOrdering ordering = host.doc_freq_join(locals);
    const auto stray = backend.encrypt("zz");
    CHECK_THROWS_AS(host.rank_of(stray, ordering), ProtocolError);
}

TEST_CASE("honest transcripts pass the audit") {
    const auto datasets = oracles::two_party_corpus(91, 30);
    const HeRunResult run = run_he_ppjoin(datasets, config_for(Threshold::make(1, 2)));
    const AuditReport report = audit_transcript(run.transcript);
    CHECK(report.passed);
    CHECK(report.stats.at("emitted_pairs") == run.pairs.size());
    // The protocol never completes a similarity score for a non-match.
    CHECK(report.stats.at("worst_nonmatch_coverage_pct") < 100);
}

TEST_CASE("the leaky backend negative control fails the audit") {
    simjoin_tests::LeakyBackend leaky;
    const auto datasets = oracles::two_party_corpus(93, 16);
    const HeRunResult run =
        run_he_ppjoin(datasets, config_for(Threshold::make(1, 2)), &leaky);
    CHECK_THROWS_AS(audit_transcript(run.transcript), AuditFailure);
}

TEST_CASE("the baseline full comparison leaks complete scores by design") {
    const auto datasets = oracles::two_party_corpus(95, 14);
    const HeRunResult run = run_he_jaccard_full(datasets, config_for(Threshold::make(8, 10)));
    // Its transcript covers every token pair of non-matching records, which
    // is exactly what the audit exists to flag.
    CHECK_THROWS_AS(audit_transcript(run.transcript), AuditFailure);
}

TEST_CASE("the protocol beats its baseline on query count") {
    const auto datasets = oracles::two_party_corpus(97, 30);
    const Threshold t = Threshold::make(8, 10);
    const HeRunResult join = run_he_ppjoin(datasets, config_for(t));
    const HeRunResult baseline = run_he_jaccard_full(datasets, config_for(t));
    CHECK(join.pairs == baseline.pairs); // same answer
    CHECK(join.counters.at("is_match_queries") < baseline.counters.at("is_match_queries"));
}

TEST_CASE("transcripts export as ndjson") {
    SimulationBackend backend;
    const MultipartyKeyPair kp = backend.keygen(2, 2);
    HostSession host(backend, kp);
    const auto a = backend.encrypt("to");
    const auto b = backend.encrypt("ny");
    host.is_match(a, b);
    std::ostringstream out;
    host.transcript().write_ndjson(out);
    const std::string text = out.str();
    CHECK(text.find("\"kind\":\"is_match\"") != std::string::npos);
    CHECK(text.find("\"kind\":\"counters\"") != std::string::npos);
}
