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

// Per-application caches shared by the tracer passes and the misuse lints.
// Not thread-safe; one context per analysed program.

#ifndef GATTCRYPT_SRC_TAINT_CONTEXT_HPP
#define GATTCRYPT_SRC_TAINT_CONTEXT_HPP

#include "gattcrypt/ruleset.hpp"
#include "gattcrypt/smali_ir.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace gattcrypt::taint {

struct ReachingDefs {
    // Instructions that overwrite the register.
    std::vector<std::uint32_t> defs;
    // Instructions that read the register without redefining it, and could
    // have changed what it refers to: aput or fill-array-data into it, invoke
    // taking it.
    std::vector<std::uint32_t> touches;
    // Some path reaches method entry without a definition.
    bool reaches_entry = false;
};

// Backward walk over `cfg` from the predecessors of `at`. check-cast is
// transparent.
ReachingDefs reaching_defs(const smali::SmaliMethod &method, const smali::ControlFlow &cfg,
                           const std::vector<smali::DefUse> &du, smali::Register reg, std::uint32_t at);

// Canonical register(s) named by operand `pos`, both halves for wide values.
std::vector<smali::Register> operand_regs(const smali::SmaliMethod &method, std::uint32_t offset, std::size_t pos);

// Canonical registers of the invoke operands, in order.
std::vector<smali::Register> invoke_args(const smali::SmaliMethod &method, std::uint32_t offset);

bool is_constructor_call(const smali::Instruction &insn);
bool is_intent_getter(const smali::MethodSignature &sig);
bool is_intent_putter(const smali::MethodSignature &sig);

class AnalysisContext {
public:
    AnalysisContext(const smali::SmaliProgram &program, const RuleSet &rules);

    const smali::SmaliProgram &program() const { return program_; }
    const RuleSet &rules() const { return rules_; }

    const smali::ControlFlow &cfg(const smali::SmaliMethod &method);
    const std::vector<smali::DefUse> &defuse(const smali::SmaliMethod &method);
    ReachingDefs reaching(const smali::SmaliMethod &method, smali::Register reg, std::uint32_t at);

    // Declared target of an invoke, following the superclass chain; null for
    // interface calls, abstract/native targets and classes outside the program.
    const smali::SmaliMethod *resolve_exact(const smali::Instruction &insn) const;
    // Concrete overrides/implementations reachable by virtual or interface
    // dispatch, excluding resolve_exact(insn). Signature order.
    const std::vector<const smali::SmaliMethod *> &dispatch_targets(const smali::Instruction &insn);

    const std::vector<smali::CallSite> &direct_callers(const smali::SmaliMethod *method);
    const std::vector<smali::CallSite> &dispatch_callers(const smali::SmaliMethod *method);

    // `descriptor` or one of its superclasses (program classes only) is `ancestor`.
    bool inherits_from(std::string_view descriptor, std::string_view ancestor) const;

private:
    void build_caller_maps();
    std::vector<std::string> descendants(const std::string &descriptor);

    const smali::SmaliProgram &program_;
    const RuleSet &rules_;
    std::map<const smali::SmaliMethod *, smali::ControlFlow> cfg_;
    std::map<const smali::SmaliMethod *, std::vector<smali::DefUse>> du_;
    std::map<smali::MethodSignature, std::vector<const smali::SmaliMethod *>> dispatch_;
    std::map<std::string, std::vector<std::string>> descendants_;
    bool callers_built_ = false;
    std::map<const smali::SmaliMethod *, std::vector<smali::CallSite>> direct_;
    std::map<const smali::SmaliMethod *, std::vector<smali::CallSite>> via_dispatch_;
};

} // namespace gattcrypt::taint

#endif // GATTCRYPT_SRC_TAINT_CONTEXT_HPP
