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

#ifndef GATTCRYPT_TESTS_TEST_SUPPORT_HPP
#define GATTCRYPT_TESTS_TEST_SUPPORT_HPP

#include "gattcrypt/smali_ir.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gattcrypt::testing {

inline std::filesystem::path source_dir() { return GATTCRYPT_SOURCE_DIR; }

// Parses in-memory smali, throwing on any parse error so fixtures stay honest.
inline smali::SmaliProgram program_of(const std::vector<std::string> &files)
{
    std::vector<std::pair<std::string, std::string>> sources;
    for (std::size_t i = 0; i < files.size(); ++i) sources.emplace_back("F" + std::to_string(i) + ".smali", files[i]);
    auto program = smali::parse_program_sources(sources);
    if (!program.diagnostics().errors.empty()) {
        const auto &e = program.diagnostics().errors.front();
        throw std::runtime_error(e.file + ":" + std::to_string(e.line) + ": " + e.reason);
    }
    return program;
}

inline smali::SmaliProgram program_of(const std::string &file) { return program_of(std::vector<std::string>{file}); }

} // namespace gattcrypt::testing

#endif // GATTCRYPT_TESTS_TEST_SUPPORT_HPP
