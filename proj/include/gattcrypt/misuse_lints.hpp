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

#ifndef GATTCRYPT_MISUSE_LINTS_HPP
#define GATTCRYPT_MISUSE_LINTS_HPP

#include "gattcrypt/ruleset.hpp"
#include "gattcrypt/smali_ir.hpp"
#include "gattcrypt/taint_engine.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gattcrypt::lints {

enum class MisuseKind {
    BadCipherMode,
    DefaultModeAES,
    NonRandomKey,
    NonRandomIV,
    HardcodedKeyBytes,
    HardcodedIVBytes,
    DeadCryptoCode,
};

std::string_view to_string(MisuseKind k);
std::optional<MisuseKind> parse_kind(std::string_view s);

struct MisuseFinding {
    MisuseKind kind = MisuseKind::BadCipherMode;
    smali::MethodSignature method;
    std::uint32_t offset = 0;
    std::string detail;

    auto operator<=>(const MisuseFinding &) const = default;
};

struct LintDiagnostics {
    // getInstance calls whose transformation is not a constant string.
    std::uint32_t unresolved_transformations = 0;

    bool operator==(const LintDiagnostics &) const = default;
};

// Witness methods plus every method they call directly that has a body.
std::set<smali::MethodSignature> lint_scope(const smali::SmaliProgram &program,
                                            const std::set<smali::MethodSignature> &witness_methods);

// Findings over lint_scope(witness_methods), sorted, one per (kind, site).
// Empty when witness_methods is empty.
std::vector<MisuseFinding> lint_crypto(const smali::SmaliProgram &program,
                                       const std::set<smali::MethodSignature> &witness_methods,
                                       LintDiagnostics *diagnostics = nullptr);

// Methods named by a verdict: its witness frames and the crypto call's caller.
std::set<smali::MethodSignature> witness_methods(const taint::TaintVerdict &verdict);

// lint_crypto over a verdict's witness; nothing for negative verdicts.
std::vector<MisuseFinding> lint_verdict(const smali::SmaliProgram &program, const taint::TaintVerdict &verdict,
                                        LintDiagnostics *diagnostics = nullptr);

} // namespace gattcrypt::lints

#endif // GATTCRYPT_MISUSE_LINTS_HPP
