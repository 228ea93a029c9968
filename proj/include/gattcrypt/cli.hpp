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

#ifndef GATTCRYPT_CLI_HPP
#define GATTCRYPT_CLI_HPP

#include "gattcrypt/report_agg.hpp"
#include "gattcrypt/taint_engine.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gattcrypt::cli {

enum class Mode { AnalyzeApp, AnalyzeCorpus, Benchmark, Aggregate, Lint };
enum class DirectionChoice { Reads, Writes, Both };

struct RunConfig {
    Mode mode = Mode::AnalyzeApp;
    DirectionChoice direction = DirectionChoice::Both;
    taint::TraceBudget budget;
    std::optional<std::filesystem::path> ruleset_path;
    // Empty: machine output goes to stdout.
    std::filesystem::path output_path;
    // Timings and timestamps; defaults to <output_path>.runinfo.json.
    std::filesystem::path run_info_path;
    unsigned parallelism = 1;
    report::AggregatePolicy policy = report::AggregatePolicy::Headline;
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path results_path;
    std::optional<std::filesystem::path> metadata_path;
};

enum ExitCode { kOk = 0, kInputError = 1, kInternalError = 2, kBenchMismatch = 3 };

// Parses argv and runs one subcommand. Machine-readable output goes to the
// --out file or `out`; tables, warnings and usage go to `err` unless --out
// is given, in which case tables go to `out`.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace gattcrypt::cli

#endif // GATTCRYPT_CLI_HPP
