/*
 * Copyright (c) 2026 The gattcrypt Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gattcrypt/corpus_bench.hpp"
#include "table3.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace gattcrypt::bench {
namespace {

using taint::Confidence;
using taint::Direction;

const std::vector<CaseResult> &corpus_results()
{
    static const auto results = run_benchmark(load_corpus(testing::source_dir() / "corpus"), default_ruleset());
    return results;
}

TEST(Corpus, LoadsWithoutFailures)
{
    const auto cases = load_corpus(testing::source_dir() / "corpus");
    EXPECT_GE(std::count_if(cases.begin(), cases.end(), [](const auto &c) { return c.direction == Direction::ForwardFromRead; }), 24);
    EXPECT_GE(std::count_if(cases.begin(), cases.end(), [](const auto &c) { return c.direction == Direction::BackwardFromWrite; }), 24);
}

TEST(Corpus, CategoriesCoveredInBothDirections)
{
    const auto cases = load_corpus(testing::source_dir() / "corpus");
    for (auto dir : {Direction::ForwardFromRead, Direction::BackwardFromWrite}) {
        for (auto cat : all_categories()) {
            int n = 0, pos = 0, neg = 0;
            for (const auto &c : cases) {
                if (c.direction != dir || c.category != cat) continue;
                ++n;
                (c.expected_found ? pos : neg)++;
            }
            EXPECT_GE(n, 2) << to_string(cat);
            EXPECT_GE(neg, 1) << to_string(cat);
            // CryptoElsewhere and NoCrypto are negative by construction.
            if (cat != Category::CryptoElsewhere && cat != Category::NoCrypto) EXPECT_GE(pos, 1) << to_string(cat);
        }
    }
}

TEST(Corpus, EveryCaseMatchesItsLabel)
{
    for (const auto &r : corpus_results()) {
        EXPECT_TRUE(r.matches()) << r.spec.case_id << ": expected " << taint::to_string(r.spec.expected_confidence)
                                 << " got " << (r.verdict.crypto_found ? taint::to_string(r.verdict.confidence) : "None");
    }
}

TEST(Corpus, NamedExamples)
{
    for (const auto &r : corpus_results()) {
        if (r.spec.case_id == "no_crypto_const_write") EXPECT_FALSE(r.verdict.crypto_found);
        if (r.spec.case_id == "intent_relay") {
            EXPECT_EQ(r.verdict.confidence, Confidence::High);
            EXPECT_TRUE(std::any_of(r.verdict.witness.begin(), r.verdict.witness.end(),
                                    [](const auto &f) { return f.origin == taint::FrameOrigin::IntentExtra; }));
        }
    }
}

TEST(Labels, RejectsInconsistentDocuments)
{
    const std::filesystem::path root = "x";
    EXPECT_NO_THROW(parse_label("case_id: a\ndirection: writes\ncategory: NoCrypto\nexpected_found: false\n"
                                "expected_confidence: None\n",
                                root));
    EXPECT_THROW(parse_label("case_id: a\ndirection: writes\ncategory: NoCrypto\nexpected_found: false\n"
                             "expected_confidence: High\n",
                             root),
                 CorpusError);
    EXPECT_THROW(parse_label("case_id: a\ndirection: sideways\ncategory: NoCrypto\nexpected_found: false\n"
                             "expected_confidence: None\n",
                             root),
                 CorpusError);
    EXPECT_THROW(parse_label("case_id: a\ndirection: writes\ncategory: Nope\nexpected_found: false\n"
                             "expected_confidence: None\n",
                             root),
                 CorpusError);
    EXPECT_THROW(parse_label("[1, 2]", root), CorpusError);
}

double pct(const std::optional<double> &v) { return *v * 100.0; }

TEST(Score, PublishedRowsFromRawCounts)
{
    for (const auto &row : testing::table3::rows()) {
        const auto r = ratios(row.counts);
        EXPECT_NEAR(pct(r.precision), row.precision, 0.5) << row.name;
        EXPECT_NEAR(pct(r.recall), row.recall, 0.5) << row.name;
        EXPECT_NEAR(pct(r.f_measure), row.f_measure, 0.5) << row.name;
        EXPECT_NEAR(pct(r.fpr), row.fpr, 0.5) << row.name;
    }
}

TEST(Score, ReadHighExample)
{
    const auto r = ratios({58, 4, 11, 19});
    EXPECT_NEAR(*r.precision, 0.935, 0.0005);
    EXPECT_NEAR(*r.recall, 0.753, 0.0005);
    EXPECT_NEAR(*r.f_measure, 0.8345, 0.0005);
    EXPECT_NEAR(*r.fpr, 0.267, 0.0005);
}

TEST(Score, DegenerateRatiosAreAbsent)
{
    const auto r = ratios({0, 0, 5, 0});
    EXPECT_FALSE(r.precision.has_value());
    EXPECT_FALSE(r.recall.has_value());
    EXPECT_FALSE(r.f_measure.has_value());
    EXPECT_EQ(r.fpr, 0.0);
    EXPECT_FALSE(ratios({}).fpr.has_value());
}

TEST(Score, CascadeReproducesPublishedLevels)
{
    for (bool reads : {true, false}) {
        const auto m = score(testing::table3::cases(reads), LevelPolicy::Cascade);
        const std::size_t base = reads ? 1 : 5;
        const Confidence levels[] = {Confidence::High, Confidence::Medium, Confidence::Low};
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_EQ(m.per_confidence.at(levels[i]), testing::table3::rows()[base + i].counts) << reads << i;
    }
}

TEST(Score, CumulativePolicyCountsEveryCase)
{
    const auto m = score(testing::table3::cases(true), LevelPolicy::Cumulative);
    for (const auto &[level, c] : m.per_confidence) EXPECT_EQ(c.total(), 92u);
    EXPECT_EQ(m.per_confidence.at(Confidence::Low), m.overall);
}

// Recount by peeling detected cases level by level.
std::map<Confidence, ConfusionCounts> brute_force(const std::vector<ScoreInput> &in)
{
    std::map<Confidence, ConfusionCounts> out;
    std::vector<ScoreInput> remaining = in;
    for (auto level : {Confidence::High, Confidence::Medium, Confidence::Low}) {
        ConfusionCounts c;
        std::vector<ScoreInput> next;
        for (const auto &r : remaining) {
            const bool hit = r.detected == level;
            if (hit && r.expected_found) c.tp++;
            if (hit && !r.expected_found) c.fp++;
            if (!hit && r.expected_found) c.fn++;
            if (!hit && !r.expected_found) c.tn++;
            if (!hit) next.push_back(r);
        }
        out[level] = c;
        remaining = next;
    }
    return out;
}

TEST(Property, ScoreEqualsBruteForceRecount)
{
    std::mt19937 rng(3);
    const Confidence all[] = {Confidence::High, Confidence::Medium, Confidence::Low, Confidence::None};
    for (int round = 0; round < 1000; ++round) {
        std::vector<ScoreInput> in(rng() % 120);
        for (auto &r : in) r = {rng() % 2 == 0, all[rng() % 4]};
        const auto m = score(in, LevelPolicy::Cascade);
        ASSERT_EQ(m.per_confidence, brute_force(in)) << round;
        // No case is counted at two levels: the evaluated set shrinks by
        // exactly the detections of the level above.
        const auto high = std::count_if(in.begin(), in.end(), [](auto r) { return r.detected == Confidence::High; });
        const auto med = std::count_if(in.begin(), in.end(), [](auto r) { return r.detected == Confidence::Medium; });
        ASSERT_EQ(m.per_confidence.at(Confidence::Medium).total(), in.size() - high);
        ASSERT_EQ(m.per_confidence.at(Confidence::Low).total(), in.size() - high - med);
    }
}

TEST(Report, RendersEveryCase)
{
    const auto text = render_report(corpus_results());
    for (const auto &r : corpus_results()) EXPECT_NE(text.find(r.spec.case_id), std::string::npos);
    EXPECT_NE(text.find("matched 54/54"), std::string::npos);
}

} // namespace
} // namespace gattcrypt::bench
