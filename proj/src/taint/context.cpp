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

#include "taint/context.hpp"

#include <algorithm>
#include <deque>

namespace gattcrypt::taint {

using smali::CallSite;
using smali::InvokeKind;
using smali::OpFamily;
using smali::Register;
using smali::SmaliMethod;

namespace {

bool has(const std::vector<Register> &regs, Register r) { return std::find(regs.begin(), regs.end(), r) != regs.end(); }

const std::vector<const SmaliMethod *> kNoMethods;
const std::vector<CallSite> kNoSites;

} // namespace

ReachingDefs reaching_defs(const SmaliMethod &method, const smali::ControlFlow &cfg,
                           const std::vector<smali::DefUse> &du, Register reg, std::uint32_t at)
{
    ReachingDefs out;
    const auto n = method.instructions.size();
    if (at >= n) return out;
    if (at == 0) out.reaches_entry = true;

    std::vector<char> seen(n, 0);
    std::vector<std::uint32_t> stack(cfg.predecessors[at].begin(), cfg.predecessors[at].end());
    while (!stack.empty()) {
        std::uint32_t p = stack.back();
        stack.pop_back();
        if (seen[p]) continue;
        seen[p] = 1;

        const auto &insn = method.instructions[p];
        if (insn.family != OpFamily::CheckCast) {
            if (has(du[p].defs, reg)) {
                out.defs.push_back(p);
                continue;
            }
            if (has(du[p].uses, reg)) {
                bool touch = insn.family == OpFamily::Invoke || insn.family == OpFamily::FillArrayData ||
                             (insn.family == OpFamily::ArrayPut && insn.operands.size() > 1 &&
                              method.canonical(insn.operands[1]) == reg);
                if (touch) out.touches.push_back(p);
            }
        }
        if (p == 0) out.reaches_entry = true;
        for (auto q : cfg.predecessors[p]) {
            if (!seen[q]) stack.push_back(q);
        }
    }
    std::sort(out.defs.begin(), out.defs.end());
    std::sort(out.touches.begin(), out.touches.end());
    return out;
}

std::vector<Register> operand_regs(const SmaliMethod &method, std::uint32_t offset, std::size_t pos)
{
    return smali::operand_registers(method, method.instructions.at(offset), pos);
}

std::vector<Register> invoke_args(const SmaliMethod &method, std::uint32_t offset)
{
    std::vector<Register> out;
    for (const auto &r : method.instructions.at(offset).operands) out.push_back(method.canonical(r));
    return out;
}

bool is_constructor_call(const smali::Instruction &insn)
{
    return insn.is_invoke() && insn.method_ref && insn.method_ref->name == "<init>" && !insn.operands.empty();
}

bool is_intent_getter(const smali::MethodSignature &sig)
{
    const auto &n = sig.name;
    return sig.class_descriptor == "Landroid/content/Intent;" && n.size() > 8 && n.rfind("get", 0) == 0 &&
           n.compare(n.size() - 5, 5, "Extra") == 0 && !sig.param_descriptors.empty() &&
           sig.param_descriptors.front() == "Ljava/lang/String;";
}

bool is_intent_putter(const smali::MethodSignature &sig)
{
    return sig.class_descriptor == "Landroid/content/Intent;" && sig.name == "putExtra" &&
           sig.param_descriptors.size() == 2 && sig.param_descriptors.front() == "Ljava/lang/String;";
}

AnalysisContext::AnalysisContext(const smali::SmaliProgram &program, const RuleSet &rules)
    : program_(program), rules_(rules)
{
}

const smali::ControlFlow &AnalysisContext::cfg(const SmaliMethod &method)
{
    auto it = cfg_.find(&method);
    if (it == cfg_.end()) it = cfg_.emplace(&method, smali::control_flow(method)).first;
    return it->second;
}

const std::vector<smali::DefUse> &AnalysisContext::defuse(const SmaliMethod &method)
{
    auto it = du_.find(&method);
    if (it == du_.end()) it = du_.emplace(&method, smali::def_use(method)).first;
    return it->second;
}

ReachingDefs AnalysisContext::reaching(const SmaliMethod &method, Register reg, std::uint32_t at)
{
    return reaching_defs(method, cfg(method), defuse(method), reg, at);
}

const SmaliMethod *AnalysisContext::resolve_exact(const smali::Instruction &insn) const
{
    if (!insn.is_invoke() || !insn.method_ref) return nullptr;
    const SmaliMethod *m = program_.resolve_method(*insn.method_ref);
    if (!m || m->is_abstract() || m->instructions.empty()) return nullptr;
    return m;
}

std::vector<std::string> AnalysisContext::descendants(const std::string &descriptor)
{
    if (auto it = descendants_.find(descriptor); it != descendants_.end()) return it->second;
    std::set<std::string> seen;
    std::deque<std::string> work{descriptor};
    const auto &subs = program_.subclass_index();
    const auto &impls = program_.interface_impl_index();
    while (!work.empty()) {
        std::string d = work.front();
        work.pop_front();
        for (const auto *index : {&subs, &impls}) {
            auto it = index->find(d);
            if (it == index->end()) continue;
            for (const auto &c : it->second) {
                if (seen.insert(c).second) work.push_back(c);
            }
        }
    }
    seen.erase(descriptor);
    std::vector<std::string> out(seen.begin(), seen.end());
    descendants_.emplace(descriptor, out);
    return out;
}

const std::vector<const SmaliMethod *> &AnalysisContext::dispatch_targets(const smali::Instruction &insn)
{
    if (!insn.is_invoke() || !insn.method_ref) return kNoMethods;
    auto kind = insn.invoke_kind();
    if (kind != InvokeKind::Virtual && kind != InvokeKind::Interface) return kNoMethods;
    const auto &sig = *insn.method_ref;
    if (auto it = dispatch_.find(sig); it != dispatch_.end()) return it->second;

    const SmaliMethod *exact = resolve_exact(insn);
    const std::string proto = sig.proto();
    std::vector<const SmaliMethod *> out;
    for (const auto &d : descendants(sig.class_descriptor)) {
        const auto *cls = program_.find_class(d);
        if (!cls) continue;
        const auto *m = cls->find_method(sig.name, proto);
        if (!m || m == exact || m->is_abstract() || m->instructions.empty() || m->is_static()) continue;
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    std::sort(out.begin(), out.end(),
              [](const SmaliMethod *a, const SmaliMethod *b) { return a->signature < b->signature; });
    return dispatch_.emplace(sig, std::move(out)).first->second;
}

void AnalysisContext::build_caller_maps()
{
    if (callers_built_) return;
    callers_built_ = true;
    for (const auto &[sig, sites] : program_.callers_index()) {
        for (const auto &site : sites) {
            const auto &insn = site.instruction();
            if (const auto *t = resolve_exact(insn)) direct_[t].push_back(site);
            for (const auto *t : dispatch_targets(insn)) via_dispatch_[t].push_back(site);
        }
    }
    for (auto *m : {&direct_, &via_dispatch_}) {
        for (auto &[_, v] : *m) std::sort(v.begin(), v.end(), smali::site_less);
    }
}

const std::vector<CallSite> &AnalysisContext::direct_callers(const SmaliMethod *method)
{
    build_caller_maps();
    auto it = direct_.find(method);
    return it == direct_.end() ? kNoSites : it->second;
}

const std::vector<CallSite> &AnalysisContext::dispatch_callers(const SmaliMethod *method)
{
    build_caller_maps();
    auto it = via_dispatch_.find(method);
    return it == via_dispatch_.end() ? kNoSites : it->second;
}

bool AnalysisContext::inherits_from(std::string_view descriptor, std::string_view ancestor) const
{
    std::set<std::string> guard;
    std::string cur(descriptor);
    while (!cur.empty() && guard.insert(cur).second) {
        if (cur == ancestor) return true;
        const auto *cls = program_.find_class(cur);
        if (!cls) return false;
        cur = cls->super_descriptor;
    }
    return false;
}

} // namespace gattcrypt::taint
