#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "ragkit/corpus.hpp"

using namespace ragkit;

namespace {
const std::string kFixtures = RAGKIT_FIXTURE_DIR;
}

TEST_CASE("load_cqa reads records in file order") {
    auto triplets = corpus::load_cqa(kFixtures + "/cqa_small.json");
    REQUIRE(triplets.size() == 3);
    CHECK(triplets[0].id == "C1");
    CHECK(triplets[1].context == "fire exit stairs");
    CHECK(triplets[2].answer == "the the door");
}

TEST_CASE("load_cqa assigns sequential ids when absent") {
    std::string path = "tmp_noid.json";
    {
        std::ofstream out(path);
        out << R"([{"Context":"c0","Question":"x","Answer":"y"},
                   {"Context":"c1","Question":"x","Answer":"y"}])";
    }
    auto triplets = corpus::load_cqa(path);
    std::remove(path.c_str());
    REQUIRE(triplets.size() == 2);
    CHECK(triplets[0].id == "q0");
    CHECK(triplets[1].id == "q1");
}

TEST_CASE("load_cqa reports missing files, bad JSON and bad schema distinctly") {
    CHECK_THROWS_AS(corpus::load_cqa(kFixtures + "/does_not_exist.json"), std::runtime_error);
    CHECK_THROWS_AS(corpus::load_cqa(kFixtures + "/cqa_malformed.json"), corpus::ParseError);
    try {
        corpus::load_cqa(kFixtures + "/cqa_missing_answer.json");
        FAIL("expected SchemaError");
    } catch (const corpus::SchemaError& e) {
        // names the offending record and field
        CHECK(std::string(e.what()).find("record 1") != std::string::npos);
        CHECK(std::string(e.what()).find("Answer") != std::string::npos);
    }
}

TEST_CASE("a real building-code record loads intact") {
    auto triplets = corpus::load_cqa(kFixtures + "/nbcc_sample.json");
    REQUIRE(triplets.size() == 1);
    CHECK(triplets[0].answer.rfind("If more than 50 parking spaces", 0) == 0);
}

TEST_CASE("clean drops incomplete triplets with reasons") {
    std::vector<corpus::CqaTriplet> all = {
        {"a", "ctx", "q", "ans"},
        {"b", "ctx", "  ", "ans"},
        {"c", "ctx", "q", "ans"},
    };
    auto [kept, dropped] = corpus::clean(all);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "a");
    CHECK(kept[1].id == "c");
    REQUIRE(dropped.size() == 1);
    CHECK(dropped[0] == std::pair<std::string, std::string>{"b", "empty question"});

    auto [kept2, dropped2] = corpus::clean(kept);
    CHECK(kept2.size() == kept.size());  // idempotent
    CHECK(dropped2.empty());

    auto [kept3, dropped3] = corpus::clean({});
    CHECK(kept3.empty());
    CHECK(dropped3.empty());
}

TEST_CASE("classify_answer measures distinct-token containment") {
    auto verbatim = corpus::classify_answer("fire doors close", "all fire doors close slowly");
    CHECK(verbatim.kind == corpus::AnswerKind::Extractive);
    CHECK(verbatim.overlap_ratio == doctest::Approx(1.0));

    auto disjoint = corpus::classify_answer("purple elephants", "all fire doors close slowly");
    CHECK(disjoint.kind == corpus::AnswerKind::Abstractive);
    CHECK(disjoint.overlap_ratio == doctest::Approx(0.0));

    // exactly half in context: not strictly greater than 0.5, so abstractive
    auto half = corpus::classify_answer("fire doors purple elephants",
                                        "all fire doors close slowly");
    CHECK(half.kind == corpus::AnswerKind::Abstractive);
    CHECK(half.overlap_ratio == doctest::Approx(0.5));

    CHECK_THROWS_AS(corpus::classify_answer("...", "context"), std::invalid_argument);

    for (const char* x : {"door", "fire exit stairs", "Article 3.8"}) {
        auto self = corpus::classify_answer(x, x);
        CHECK(self.kind == corpus::AnswerKind::Extractive);
        CHECK(self.overlap_ratio == doctest::Approx(1.0));
    }
}

TEST_CASE("dataset_stats aggregates lengths, labels and trigrams") {
    std::vector<corpus::CqaTriplet> triplets = {
        {"a", "fire doors shall resist fire", "what is the minimum width", "fire doors shall resist"},
        {"b", "guards shall be high", "what is the minimum width", "guards shall be high"},
        {"c", "stairs have rails", "what is the minimum width", "walls are uninvolved here"},
    };
    auto stats = corpus::dataset_stats(triplets);
    CHECK(stats.triplet_count == 3);
    CHECK(stats.extractive_count == 2);
    CHECK(stats.abstractive_count == 1);
    CHECK(stats.extractive_count + stats.abstractive_count == stats.triplet_count);

    // histogram mass equals the triplet count
    for (const auto* hist : {&stats.context_length_hist, &stats.question_length_hist,
                             &stats.answer_length_hist}) {
        std::size_t mass = 0;
        for (const auto& [len, count] : *hist) mass += count;
        CHECK(mass == 3);
    }

    // the three question trigrams tie at frequency 3; lexicographic order
    // breaks the tie
    REQUIRE(stats.top_trigrams.size() == 3);
    CHECK(stats.top_trigrams[0] == std::pair<std::string, std::size_t>{"is the minimum", 3});
    bool found = false;
    for (const auto& [gram, freq] : stats.top_trigrams) {
        found |= gram == "what is the" && freq == 3;
    }
    CHECK(found);

    CHECK_THROWS_AS(corpus::dataset_stats({}), std::invalid_argument);
}

TEST_CASE("dataset_stats ranks trigrams by frequency then lexicographically") {
    std::vector<corpus::CqaTriplet> triplets = {
        {"a", "c", "b a c", "x"},
        {"b", "c", "a b c", "x"},
    };
    auto stats = corpus::dataset_stats(triplets);
    REQUIRE(stats.top_trigrams.size() == 2);
    CHECK(stats.top_trigrams[0] == std::pair<std::string, std::size_t>{"a b c", 1});
    CHECK(stats.top_trigrams[1] == std::pair<std::string, std::size_t>{"b a c", 1});
}

TEST_CASE("corpus_from_contexts pools contexts") {
    std::vector<corpus::CqaTriplet> triplets = {
        {"a", "ctx one", "q", "x"},
        {"b", "ctx two", "q", "x"},
        {"c", "ctx three", "q", "x"},
    };
    CHECK(corpus::corpus_from_contexts(triplets, true).size() == 3);

    triplets[2].context = "ctx one";
    auto deduped = corpus::corpus_from_contexts(triplets, true);
    CHECK(deduped.size() == 2);
    CHECK(deduped.chunks[0].id == "a+c");  // id records both sources
    CHECK(corpus::corpus_from_contexts(triplets, false).size() == 3);

    CHECK_THROWS_AS(corpus::corpus_from_contexts({}, true), std::invalid_argument);
}

TEST_CASE("pooled corpus size is bounded by the triplet count") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<corpus::CqaTriplet> triplets;
        std::size_t n = rng() % 20 + 1;
        for (std::size_t i = 0; i < n; ++i) {
            // draw contexts from a small pool so duplicates are common
            std::string ctx = "context " + std::to_string(rng() % 5);
            triplets.push_back({"t" + std::to_string(i), ctx, "q", "a"});
        }
        CHECK(corpus::corpus_from_contexts(triplets, true).size() <= n);
        CHECK(corpus::corpus_from_contexts(triplets, false).size() == n);
    }
}

TEST_CASE("corpus_from_text slides a word window") {
    std::string path = kFixtures + "/words10.txt";
    auto no_overlap = corpus::corpus_from_text(path, 5, 0);
    REQUIRE(no_overlap.size() == 2);
    CHECK(no_overlap.chunks[0].text == "one two three four five");
    CHECK(no_overlap.chunks[1].text == "six seven eight nine ten");
    CHECK(no_overlap.chunks[0].id == "words10:0");
    CHECK(no_overlap.chunks[1].id == "words10:5");

    auto with_overlap = corpus::corpus_from_text(path, 5, 2);
    REQUIRE(with_overlap.size() == 4);  // starts at words 0, 3, 6, 9
    CHECK(with_overlap.chunks[1].text == "four five six seven eight");
    CHECK(with_overlap.chunks[3].text == "ten");  // short tail retained
    CHECK(with_overlap.chunks[3].id == "words10:9");

    std::string short_path = "tmp_three_words.txt";
    {
        std::ofstream out(short_path);
        out << "alpha beta gamma";
    }
    auto short_corpus = corpus::corpus_from_text(short_path, 5, 0);
    REQUIRE(short_corpus.size() == 1);
    CHECK(short_corpus.chunks[0].text == "alpha beta gamma");
    std::remove(short_path.c_str());

    std::string empty_path = "tmp_empty.txt";
    { std::ofstream out(empty_path); }
    CHECK_THROWS_AS(corpus::corpus_from_text(empty_path, 5, 0), std::invalid_argument);
    std::remove(empty_path.c_str());

    CHECK_THROWS_AS(corpus::corpus_from_text(path, 5, 5), std::invalid_argument);
    CHECK_THROWS_AS(corpus::corpus_from_text(path, 0, 0), std::invalid_argument);
}
