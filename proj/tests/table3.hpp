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

// Raw confusion counts and printed percentages of the published benchmark
// table, plus synthesized per-case results that reproduce them.

#ifndef GATTCRYPT_TESTS_TABLE3_HPP
#define GATTCRYPT_TESTS_TABLE3_HPP

#include "gattcrypt/corpus_bench.hpp"

#include <vector>

namespace gattcrypt::testing::table3 {

struct Row {
    const char *name;
    bench::ConfusionCounts counts;
    // Printed precision, recall, F-measure, and the FPR quoted in the text
    // (negative when the text quotes none).
    double precision, recall, f_measure, fpr;
};

inline const std::vector<Row> &rows()
{
    static const std::vector<Row> r{
        {"Read/Amandroid", {44, 5, 10, 33}, 90, 57, 70, 33},
        {"Read/High", {58, 4, 11, 19}, 94, 75, 83, 27},
        {"Read/Medium", {7, 4, 7, 12}, 64, 37, 47, 36},
        {"Read/Low", {8, 4, 3, 4}, 67, 67, 67, 57},
        {"Write/Amandroid", {49, 7, 8, 28}, 88, 64, 74, 47},
        {"Write/High", {46, 4, 11, 31}, 92, 60, 72, 27},
        {"Write/Medium", {19, 3, 8, 12}, 86, 61, 72, 27},
        {"Write/Low", {5, 5, 3, 7}, 50, 42, 45, 63},
    };
    return r;
}

// 92 cases (77 with crypto) whose cascade reproduces the High/Medium/Low rows
// of one direction: rows 1..3 for reads, 5..7 for writes.
inline std::vector<bench::ScoreInput> cases(bool reads)
{
    const auto &r = rows();
    const std::size_t base = reads ? 1 : 5;
    const taint::Confidence levels[] = {taint::Confidence::High, taint::Confidence::Medium, taint::Confidence::Low};
    std::vector<bench::ScoreInput> out;
    std::uint32_t pos_left = 77, neg_left = 15;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto &c = r[base + i].counts;
        for (std::uint32_t k = 0; k < c.tp; ++k) out.push_back({true, levels[i]});
        for (std::uint32_t k = 0; k < c.fp; ++k) out.push_back({false, levels[i]});
        pos_left -= c.tp;
        neg_left -= c.fp;
    }
    for (std::uint32_t k = 0; k < pos_left; ++k) out.push_back({true, taint::Confidence::None});
    for (std::uint32_t k = 0; k < neg_left; ++k) out.push_back({false, taint::Confidence::None});
    return out;
}

} // namespace gattcrypt::testing::table3

#endif // GATTCRYPT_TESTS_TABLE3_HPP
