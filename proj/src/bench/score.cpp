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

#include <array>
#include <cstdio>
#include <sstream>

namespace gattcrypt::bench {

using taint::Confidence;

namespace {

constexpr std::array kLevels{Confidence::High, Confidence::Medium, Confidence::Low};

int rank(Confidence c)
{
    switch (c) {
    case Confidence::High: return 3;
    case Confidence::Medium: return 2;
    case Confidence::Low: return 1;
    case Confidence::None: break;
    }
    return 0;
}

void tally(ConfusionCounts &c, bool truth, bool predicted)
{
    if (predicted) {
        ++(truth ? c.tp : c.fp);
    } else {
        ++(truth ? c.fn : c.tn);
    }
}

std::string pct(const std::optional<double> &v)
{
    if (!v) return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
    return buf;
}

} // namespace

Ratios ratios(const ConfusionCounts &c)
{
    Ratios r;
    if (c.tp + c.fp > 0) r.precision = double(c.tp) / (c.tp + c.fp);
    if (c.tp + c.fn > 0) r.recall = double(c.tp) / (c.tp + c.fn);
    if (r.precision && r.recall && *r.precision + *r.recall > 0)
        r.f_measure = 2 * *r.precision * *r.recall / (*r.precision + *r.recall);
    if (c.fp + c.tn > 0) r.fpr = double(c.fp) / (c.fp + c.tn);
    return r;
}

MetricsReport score(const std::vector<ScoreInput> &results, LevelPolicy policy)
{
    MetricsReport m;
    for (auto level : kLevels) {
        auto &counts = m.per_confidence[level];
        for (const auto &r : results) {
            if (policy == LevelPolicy::Cascade) {
                if (rank(r.detected) > rank(level)) continue;
                tally(counts, r.expected_found, r.detected == level);
            } else {
                tally(counts, r.expected_found, rank(r.detected) >= rank(level));
            }
        }
        m.per_confidence_ratios[level] = ratios(counts);
    }
    for (const auto &r : results) tally(m.overall, r.expected_found, r.detected != Confidence::None);
    m.overall_ratios = ratios(m.overall);
    return m;
}

std::vector<ScoreInput> score_inputs(const std::vector<CaseResult> &results, taint::Direction direction)
{
    std::vector<ScoreInput> out;
    for (const auto &r : results) {
        if (r.spec.direction != direction) continue;
        out.push_back({r.spec.expected_found, r.verdict.crypto_found ? r.verdict.confidence : Confidence::None});
    }
    return out;
}

std::string render_report(const std::vector<CaseResult> &results)
{
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-32s %-7s %-16s %-8s %-8s %-5s %8s\n", "case", "dir", "category", "expected",
                  "got", "ok", "seconds");
    os << line;
    std::size_t matched = 0;
    for (const auto &r : results) {
        const auto got = r.verdict.crypto_found ? r.verdict.confidence : Confidence::None;
        std::snprintf(line, sizeof line, "%-32s %-7s %-16s %-8s %-8s %-5s %8.3f\n", r.spec.case_id.c_str(),
                      std::string(taint::to_string(r.spec.direction)).c_str(),
                      std::string(to_string(r.spec.category)).c_str(),
                      std::string(taint::to_string(r.spec.expected_confidence)).c_str(),
                      std::string(taint::to_string(got)).c_str(), r.matches() ? "yes" : "NO", r.seconds);
        os << line;
        matched += r.matches();
    }
    os << "\nmatched " << matched << "/" << results.size() << "\n";
    for (auto dir : {taint::Direction::ForwardFromRead, taint::Direction::BackwardFromWrite}) {
        const auto m = score(score_inputs(results, dir));
        os << "\n" << taint::to_string(dir) << "\n";
        std::snprintf(line, sizeof line, "  %-7s %4s %4s %4s %4s %9s %7s %7s %7s\n", "level", "TP", "FP", "TN",
                      "FN", "precision", "recall", "F", "FPR");
        os << line;
        auto row = [&](std::string_view name, const ConfusionCounts &c, const Ratios &r) {
            std::snprintf(line, sizeof line, "  %-7s %4u %4u %4u %4u %9s %7s %7s %7s\n", std::string(name).c_str(),
                          c.tp, c.fp, c.tn, c.fn, pct(r.precision).c_str(), pct(r.recall).c_str(),
                          pct(r.f_measure).c_str(), pct(r.fpr).c_str());
            os << line;
        };
        for (auto level : kLevels) row(taint::to_string(level), m.per_confidence.at(level), m.per_confidence_ratios.at(level));
        row("any", m.overall, m.overall_ratios);
    }
    return os.str();
}

} // namespace gattcrypt::bench
