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

// Intent extras (matched by constant key) and AsyncTask handoff.

#include "gattcrypt/taint_engine.hpp"
#include "taint/context.hpp"

#include <algorithm>

namespace gattcrypt::taint {

using smali::CallSite;
using smali::OpFamily;
using smali::Register;
using smali::SmaliMethod;

namespace {

constexpr std::string_view kAsyncTask = "Landroid/os/AsyncTask;";

bool is_execute(const smali::MethodSignature &sig)
{
    if (sig.name == "execute") return sig.param_descriptors == std::vector<std::string>{"[Ljava/lang/Object;"};
    if (sig.name == "executeOnExecutor") {
        return sig.param_descriptors ==
               std::vector<std::string>{"Ljava/util/concurrent/Executor;", "[Ljava/lang/Object;"};
    }
    return false;
}

std::size_t execute_array_operand(const smali::MethodSignature &sig) { return sig.name == "execute" ? 1 : 2; }

// Methods named `name` with one parameter, declared along the superclass
// chain of `descriptor` below AsyncTask. Nearest declaration of each proto.
std::vector<const SmaliMethod *> task_methods(const smali::SmaliProgram &program, const std::string &descriptor,
                                              std::string_view name)
{
    std::vector<const SmaliMethod *> out;
    std::set<std::string> protos;
    std::set<std::string> guard;
    for (const auto *cls = program.find_class(descriptor); cls && guard.insert(cls->descriptor).second;
         cls = program.find_class(cls->super_descriptor)) {
        for (const auto &m : cls->methods) {
            if (m.signature.name != name || m.signature.param_descriptors.size() != 1 || m.is_static()) continue;
            if (!protos.insert(m.signature.proto()).second) continue;
            if (!m.is_abstract() && !m.instructions.empty()) out.push_back(&m);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const SmaliMethod *a, const SmaliMethod *b) { return a->signature < b->signature; });
    return out;
}

std::vector<CallSite> sites_matching(const smali::SmaliProgram &program,
                                     bool (*pred)(const smali::MethodSignature &))
{
    std::vector<CallSite> out;
    for (const auto &[sig, sites] : program.callers_index()) {
        if (pred(sig)) out.insert(out.end(), sites.begin(), sites.end());
    }
    std::sort(out.begin(), out.end(), smali::site_less);
    return out;
}

std::vector<Register> putter_value_regs(const CallSite &site)
{
    const auto &insn = site.instruction();
    std::vector<Register> out;
    if (insn.operands.size() < 3) return out;
    out.push_back(site.method->canonical(insn.operands[2]));
    const auto &param = insn.method_ref->param_descriptors[1];
    if (smali::descriptor_width(param) == 2 && insn.operands.size() > 3) {
        out.push_back(site.method->canonical(insn.operands[3]));
    }
    return out;
}

std::optional<std::string> key_at(const CallSite &site)
{
    const auto &insn = site.instruction();
    if (insn.operands.size() < 2) return std::nullopt;
    return resolve_string_constant(*site.method, insn.operands[1], site.offset);
}

std::vector<Register> return_regs(const SmaliMethod &m, std::uint32_t offset)
{
    return smali::operand_registers(m, m.instructions[offset], 0);
}

HopTarget make_target(const SmaliMethod *m, std::vector<Register> regs, FrameOrigin origin,
                      std::optional<std::uint32_t> anchor)
{
    HopTarget t;
    t.frame = TraceFrame{m->signature, std::move(regs), origin};
    t.method = m;
    t.anchor = anchor;
    return t;
}

} // namespace

std::optional<std::string> resolve_string_constant(const SmaliMethod &method, Register reg, std::uint32_t offset)
{
    const auto cfg = smali::control_flow(method);
    const auto du = smali::def_use(method);
    reg = method.canonical(reg);
    for (int hops = 0; hops < 16; ++hops) {
        auto rd = reaching_defs(method, cfg, du, reg, offset);
        if (rd.reaches_entry || rd.defs.size() != 1) return std::nullopt;
        const auto &insn = method.instructions[rd.defs.front()];
        if (insn.family == OpFamily::ConstString && insn.literal) return insn.literal->text;
        if (insn.family != OpFamily::Move || du[rd.defs.front()].uses.empty()) return std::nullopt;
        reg = du[rd.defs.front()].uses.front();
        offset = rd.defs.front();
    }
    return std::nullopt;
}

std::vector<HopTarget> cross_component_hop(const HopPoint &point, const smali::SmaliProgram &program,
                                           TraceDiagnostics *diagnostics)
{
    std::vector<HopTarget> out;
    if (!point.method) return out;
    const SmaliMethod &m = *point.method;
    RuleSet no_rules;
    AnalysisContext ctx(program, no_rules);
    const bool backward = point.direction == Direction::BackwardFromWrite;

    if (!point.offset) {
        // Entry of a task callback: only meaningful backward.
        if (!backward || m.signature.param_descriptors.size() != 1 || m.is_static()) return out;
        const auto &cls = m.signature.class_descriptor;
        if (!ctx.inherits_from(cls, kAsyncTask)) return out;
        if (m.signature.name == "doInBackground") {
            for (const auto &site : sites_matching(program, is_execute)) {
                const auto &insn = site.instruction();
                if (!ctx.inherits_from(insn.method_ref->class_descriptor, cls)) continue;
                auto regs = smali::operand_registers(*site.method, insn, execute_array_operand(*insn.method_ref));
                if (regs.empty()) continue;
                out.push_back(make_target(site.method, std::move(regs), FrameOrigin::ThreadHandoff, site.offset));
            }
        } else if (m.signature.name == "onPostExecute") {
            for (const auto *dib : task_methods(program, cls, "doInBackground")) {
                for (std::uint32_t i = 0; i < dib->instructions.size(); ++i) {
                    if (dib->instructions[i].family != OpFamily::Return) continue;
                    out.push_back(make_target(dib, return_regs(*dib, i), FrameOrigin::ThreadHandoff, i));
                }
            }
        }
        return out;
    }

    const std::uint32_t at = *point.offset;
    if (at >= m.instructions.size()) return out;
    const auto &insn = m.instructions[at];
    const CallSite here{&m, at};

    if (insn.family == OpFamily::Return) {
        if (backward || m.signature.name != "doInBackground") return out;
        const auto &cls = m.signature.class_descriptor;
        if (!ctx.inherits_from(cls, kAsyncTask)) return out;
        for (const auto *ope : task_methods(program, cls, "onPostExecute")) {
            out.push_back(make_target(ope, {Register::param(1)}, FrameOrigin::ThreadHandoff, std::nullopt));
        }
        return out;
    }
    if (!insn.is_invoke() || !insn.method_ref) return out;
    const auto &sig = *insn.method_ref;

    if (backward && is_intent_getter(sig)) {
        auto key = key_at(here);
        if (!key) {
            if (diagnostics) ++diagnostics->unresolved_extras;
            return out;
        }
        for (const auto &site : sites_matching(program, is_intent_putter)) {
            if (key_at(site) != key) continue;
            auto regs = putter_value_regs(site);
            if (!regs.empty()) out.push_back(make_target(site.method, std::move(regs), FrameOrigin::IntentExtra, site.offset));
        }
    } else if (!backward && is_intent_putter(sig)) {
        auto key = key_at(here);
        if (!key) {
            if (diagnostics) ++diagnostics->unresolved_extras;
            return out;
        }
        for (const auto &site : sites_matching(program, is_intent_getter)) {
            if (key_at(site) != key) continue;
            const auto next = site.offset + 1;
            if (next >= site.method->instructions.size()) continue;
            const auto &mr = site.method->instructions[next];
            if (mr.family != OpFamily::MoveResult) continue;
            out.push_back(make_target(site.method, smali::operand_registers(*site.method, mr, 0),
                                      FrameOrigin::IntentExtra, next));
        }
    } else if (!backward && is_execute(sig)) {
        if (!ctx.inherits_from(sig.class_descriptor, kAsyncTask)) return out;
        for (const auto *dib : task_methods(program, sig.class_descriptor, "doInBackground")) {
            out.push_back(make_target(dib, {Register::param(1)}, FrameOrigin::ThreadHandoff, std::nullopt));
        }
    }
    return out;
}

} // namespace gattcrypt::taint
