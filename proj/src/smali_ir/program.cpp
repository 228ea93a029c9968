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

#include "gattcrypt/smali_ir.hpp"

#include <algorithm>
#include <set>

namespace gattcrypt::smali {

SmaliProgram SmaliProgram::build(std::vector<SmaliClass> classes, ParseDiagnostics diagnostics)
{
    SmaliProgram p;
    p.diagnostics_ = std::move(diagnostics);
    for (auto &cls : classes) {
        if (p.classes_.count(cls.descriptor)) {
            p.diagnostics_.errors.push_back({cls.source_path, 0, "duplicate class " + cls.descriptor});
            continue;
        }
        std::string key = cls.descriptor;
        p.classes_.emplace(std::move(key), std::move(cls));
    }

    for (const auto &[desc, cls] : p.classes_) {
        for (const auto &m : cls.methods) {
            for (const auto &insn : m.instructions) {
                CallSite site{&m, insn.offset};
                if (insn.family == OpFamily::Invoke && insn.method_ref) {
                    p.callers_[*insn.method_ref].push_back(site);
                } else if ((insn.family == OpFamily::InstancePut || insn.family == OpFamily::StaticPut) &&
                           insn.field_ref) {
                    p.field_writes_[*insn.field_ref].push_back(site);
                } else if ((insn.family == OpFamily::InstanceGet || insn.family == OpFamily::StaticGet) &&
                           insn.field_ref) {
                    p.field_reads_[*insn.field_ref].push_back(site);
                }
            }
        }
        if (!cls.super_descriptor.empty()) p.subclasses_[cls.super_descriptor].push_back(desc);
    }

    // Every interface a class implements, through its own declarations,
    // super-interfaces and superclasses known to the program.
    for (const auto &[desc, cls] : p.classes_) {
        if (cls.is_interface()) continue;
        std::set<std::string> seen;
        std::vector<std::string> pending;
        for (const SmaliClass *c = &cls; c;) {
            pending.insert(pending.end(), c->interfaces.begin(), c->interfaces.end());
            if (c->super_descriptor.empty() || c->super_descriptor == c->descriptor) break;
            c = p.find_class(c->super_descriptor);
            if (c == &cls) break;
        }
        while (!pending.empty()) {
            std::string iface = pending.back();
            pending.pop_back();
            if (!seen.insert(iface).second) continue;
            if (const auto *ic = p.find_class(iface)) {
                pending.insert(pending.end(), ic->interfaces.begin(), ic->interfaces.end());
            }
        }
        for (const auto &iface : seen) p.interface_impls_[iface].push_back(desc);
    }
    for (auto &[_, impls] : p.interface_impls_) std::sort(impls.begin(), impls.end());
    return p;
}

const SmaliClass *SmaliProgram::find_class(std::string_view descriptor) const
{
    auto it = classes_.find(std::string(descriptor));
    return it == classes_.end() ? nullptr : &it->second;
}

const SmaliMethod *SmaliProgram::find_method(const MethodSignature &sig) const
{
    const auto *cls = find_class(sig.class_descriptor);
    if (!cls) return nullptr;
    for (const auto &m : cls->methods) {
        if (m.signature == sig) return &m;
    }
    return nullptr;
}

const SmaliMethod *SmaliProgram::resolve_method(const MethodSignature &sig) const
{
    const std::string proto = sig.proto();
    std::set<std::string> guard;
    for (const SmaliClass *cls = find_class(sig.class_descriptor); cls && guard.insert(cls->descriptor).second;
         cls = find_class(cls->super_descriptor)) {
        if (const auto *m = cls->find_method(sig.name, proto)) return m;
    }
    return nullptr;
}

std::size_t SmaliProgram::method_count() const
{
    std::size_t n = 0;
    for (const auto &[_, cls] : classes_) n += cls.methods.size();
    return n;
}

std::vector<CallSite> find_invocations(const SmaliProgram &program, const SignaturePredicate &matcher)
{
    std::vector<CallSite> out;
    for (const auto &[sig, sites] : program.callers_index()) {
        if (matcher(sig)) out.insert(out.end(), sites.begin(), sites.end());
    }
    std::sort(out.begin(), out.end(), site_less);
    return out;
}

} // namespace gattcrypt::smali
