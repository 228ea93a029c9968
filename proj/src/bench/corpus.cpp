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

#include <yaml-cpp/yaml.h>

#include <array>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace gattcrypt::bench {

namespace {

constexpr std::array<std::pair<Category, std::string_view>, kCategoryCount> kCategories{{
    {Category::DirectFlow, "DirectFlow"},
    {Category::FieldFlow, "FieldFlow"},
    {Category::IntentFlow, "IntentFlow"},
    {Category::ThreadFlow, "ThreadFlow"},
    {Category::InterfaceFlow, "InterfaceFlow"},
    {Category::SiblingArg, "SiblingArg"},
    {Category::LenientOnly, "LenientOnly"},
    {Category::CryptoElsewhere, "CryptoElsewhere"},
    {Category::NoCrypto, "NoCrypto"},
    {Category::KillRedefinition, "KillRedefinition"},
    {Category::RecursiveCalls, "RecursiveCalls"},
    {Category::StaticSeed, "StaticSeed"},
}};

std::string required(const YAML::Node &doc, const char *key, const std::string &where)
{
    const auto n = doc[key];
    if (!n || !n.IsScalar()) throw CorpusError(where + ": missing scalar '" + key + "'");
    return n.as<std::string>();
}

taint::TaintVerdict run_case(const CorpusCase &c, const RuleSet &rules, const taint::TraceBudget &budget)
{
    smali::SmaliProgram program;
    try {
        program = smali::parse_program(c.root / "smali");
    } catch (const std::exception &e) {
        throw CorpusError(c.case_id + ": " + e.what());
    }
    if (!program.diagnostics().errors.empty()) {
        const auto &err = program.diagnostics().errors.front();
        throw CorpusError(c.case_id + ": " + err.file + ":" + std::to_string(err.line) + ": " + err.reason);
    }
    return taint::analyze_app(program, rules, c.direction, budget);
}

} // namespace

std::string_view to_string(Category c)
{
    for (const auto &[v, s] : kCategories) {
        if (v == c) return s;
    }
    return "DirectFlow";
}

std::optional<Category> parse_category(std::string_view s)
{
    for (const auto &[v, name] : kCategories) {
        if (name == s) return v;
    }
    return std::nullopt;
}

const std::vector<Category> &all_categories()
{
    static const std::vector<Category> all = [] {
        std::vector<Category> v;
        for (const auto &[c, _] : kCategories) v.push_back(c);
        return v;
    }();
    return all;
}

CorpusCase parse_label(const std::string &document, const std::filesystem::path &root)
{
    const std::string where = (root / "label.yaml").string();
    YAML::Node doc;
    try {
        doc = YAML::Load(document);
    } catch (const YAML::Exception &e) {
        throw CorpusError(where + ": " + e.what());
    }
    if (!doc.IsMap()) throw CorpusError(where + ": expected a mapping");

    CorpusCase c;
    c.root = root;
    c.case_id = required(doc, "case_id", where);
    const auto dir = taint::parse_direction(required(doc, "direction", where));
    if (!dir) throw CorpusError(where + ": bad direction");
    c.direction = *dir;
    const auto cat = parse_category(required(doc, "category", where));
    if (!cat) throw CorpusError(where + ": unknown category");
    c.category = *cat;
    const auto found = required(doc, "expected_found", where);
    if (found != "true" && found != "false") throw CorpusError(where + ": expected_found must be true or false");
    c.expected_found = found == "true";
    const auto conf = taint::parse_confidence(required(doc, "expected_confidence", where));
    if (!conf) throw CorpusError(where + ": bad expected_confidence");
    c.expected_confidence = *conf;
    if ((c.expected_confidence == taint::Confidence::None) == c.expected_found)
        throw CorpusError(where + ": expected_found disagrees with expected_confidence");
    if (doc["note"]) c.note = doc["note"].as<std::string>();
    return c;
}

std::vector<CorpusCase> load_corpus(const std::filesystem::path &corpus_root)
{
    if (!std::filesystem::is_directory(corpus_root))
        throw CorpusError(corpus_root.string() + ": not a directory");
    std::vector<CorpusCase> cases;
    for (const auto &entry : std::filesystem::directory_iterator(corpus_root)) {
        const auto label = entry.path() / "label.yaml";
        if (!entry.is_directory() || !std::filesystem::exists(label)) continue;
        std::ifstream in(label);
        std::stringstream ss;
        ss << in.rdbuf();
        cases.push_back(parse_label(ss.str(), entry.path()));
    }
    std::sort(cases.begin(), cases.end(), [](const auto &a, const auto &b) { return a.case_id < b.case_id; });
    for (std::size_t i = 1; i < cases.size(); ++i) {
        if (cases[i].case_id == cases[i - 1].case_id) throw CorpusError("duplicate case_id " + cases[i].case_id);
    }
    return cases;
}

std::vector<CaseResult> run_benchmark(const std::vector<CorpusCase> &cases, const RuleSet &rules,
                                      const taint::TraceBudget &budget, unsigned jobs)
{
    std::vector<CaseResult> results(cases.size());
    std::vector<std::exception_ptr> errors(cases.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) {
            const auto start = std::chrono::steady_clock::now();
            try {
                results[i].spec = cases[i];
                results[i].verdict = run_case(cases[i], rules, budget);
            } catch (...) {
                errors[i] = std::current_exception();
            }
            results[i].seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cases.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto &t : pool) t.join();
    }
    for (const auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

} // namespace gattcrypt::bench
