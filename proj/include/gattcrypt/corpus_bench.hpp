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

#ifndef GATTCRYPT_CORPUS_BENCH_HPP
#define GATTCRYPT_CORPUS_BENCH_HPP

#include "gattcrypt/ruleset.hpp"
#include "gattcrypt/taint_engine.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gattcrypt::bench {

enum class Category {
    DirectFlow,
    FieldFlow,
    IntentFlow,
    ThreadFlow,
    InterfaceFlow,
    SiblingArg,
    LenientOnly,
    CryptoElsewhere,
    NoCrypto,
    KillRedefinition,
    RecursiveCalls,
    StaticSeed,
};

inline constexpr std::size_t kCategoryCount = 12;

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);
const std::vector<Category> &all_categories();

struct CorpusCase {
    std::string case_id;
    taint::Direction direction = taint::Direction::BackwardFromWrite;
    Category category = Category::DirectFlow;
    bool expected_found = false;
    taint::Confidence expected_confidence = taint::Confidence::None;
    std::string note;
    std::filesystem::path root;
};

// Bad label document or a case whose smali does not parse.
class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

CorpusCase parse_label(const std::string &document, const std::filesystem::path &root);
// Every subdirectory holding a label.yaml, sorted by case_id.
std::vector<CorpusCase> load_corpus(const std::filesystem::path &corpus_root);

struct CaseResult {
    CorpusCase spec;
    taint::TaintVerdict verdict;
    double seconds = 0;

    bool matches() const
    {
        return verdict.crypto_found == spec.expected_found && verdict.confidence == spec.expected_confidence;
    }
};

// Runs each case in its declared direction. Results come back in input order
// whatever `jobs` is.
std::vector<CaseResult> run_benchmark(const std::vector<CorpusCase> &cases, const RuleSet &rules,
                                      const taint::TraceBudget &budget = {}, unsigned jobs = 1);

struct ConfusionCounts {
    std::uint32_t tp = 0;
    std::uint32_t fp = 0;
    std::uint32_t tn = 0;
    std::uint32_t fn = 0;

    std::uint32_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts &) const = default;
};

struct Ratios {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f_measure;
    std::optional<double> fpr;
};

Ratios ratios(const ConfusionCounts &c);

enum class LevelPolicy {
    // Level L sees only cases not detected above L; detections below L are
    // negatives.
    Cascade,
    // Every level sees every case; a detection at L or above is positive.
    Cumulative,
};

// Ground truth of a case for scoring is expected_found.
struct ScoreInput {
    bool expected_found = false;
    taint::Confidence detected = taint::Confidence::None;
};

struct MetricsReport {
    std::map<taint::Confidence, ConfusionCounts> per_confidence;
    std::map<taint::Confidence, Ratios> per_confidence_ratios;
    // Any detection at any level counts as positive.
    ConfusionCounts overall;
    Ratios overall_ratios;
};

MetricsReport score(const std::vector<ScoreInput> &results, LevelPolicy policy = LevelPolicy::Cascade);
std::vector<ScoreInput> score_inputs(const std::vector<CaseResult> &results, taint::Direction direction);

// Fixed-width text table: one row per case then metrics per direction.
std::string render_report(const std::vector<CaseResult> &results);

} // namespace gattcrypt::bench

#endif // GATTCRYPT_CORPUS_BENCH_HPP
