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

#include "gattcrypt/misuse_lints.hpp"
#include "taint/context.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>

namespace gattcrypt::lints {

using smali::CallSite;
using smali::Instruction;
using smali::MethodSignature;
using smali::OpFamily;
using smali::Register;
using smali::SmaliMethod;
using taint::AnalysisContext;

namespace {

constexpr std::array kKinds{
    std::pair{MisuseKind::BadCipherMode, std::string_view("BadCipherMode")},
    std::pair{MisuseKind::DefaultModeAES, std::string_view("DefaultModeAES")},
    std::pair{MisuseKind::NonRandomKey, std::string_view("NonRandomKey")},
    std::pair{MisuseKind::NonRandomIV, std::string_view("NonRandomIV")},
    std::pair{MisuseKind::HardcodedKeyBytes, std::string_view("HardcodedKeyBytes")},
    std::pair{MisuseKind::HardcodedIVBytes, std::string_view("HardcodedIVBytes")},
    std::pair{MisuseKind::DeadCryptoCode, std::string_view("DeadCryptoCode")},
};

constexpr std::string_view kCipher = "Ljavax/crypto/Cipher;";
constexpr std::uint32_t kSliceDepth = 8;

std::string upper(std::string s)
{
    for (auto &c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

enum class Material { Key, Iv };

struct SpecCtor {
    std::string_view cls;
    Material material;
    // Operand holding the bytes, receiver counted.
    std::size_t operand;
};

constexpr std::array kSpecCtors{
    SpecCtor{"Ljavax/crypto/spec/SecretKeySpec;", Material::Key, 1},
    SpecCtor{"Ljavax/crypto/spec/DESKeySpec;", Material::Key, 1},
    SpecCtor{"Ljavax/crypto/spec/DESedeKeySpec;", Material::Key, 1},
    SpecCtor{"Ljavax/crypto/spec/IvParameterSpec;", Material::Iv, 1},
    SpecCtor{"Ljavax/crypto/spec/GCMParameterSpec;", Material::Iv, 2},
};

std::optional<SpecCtor> spec_ctor(const Instruction &insn)
{
    if (!taint::is_constructor_call(insn)) return std::nullopt;
    for (const auto &c : kSpecCtors) {
        if (insn.method_ref->class_descriptor == c.cls && insn.operands.size() > c.operand) return c;
    }
    return std::nullopt;
}

bool is_secure_source(const MethodSignature &s)
{
    return s.class_descriptor == "Ljava/security/SecureRandom;" || s.class_descriptor == "Ljavax/crypto/KeyGenerator;" ||
           s.class_descriptor == "Ljava/security/KeyPairGenerator;" ||
           s.class_descriptor == "Ljavax/crypto/SecretKeyFactory;";
}

// Conversions the key/IV slice looks through: the bytes of a string are as
// constant as the string.
bool is_transparent(const MethodSignature &s)
{
    if (s.class_descriptor == "Ljava/lang/String;")
        return s.name == "getBytes" || s.name == "toCharArray" || s.name == "substring" || s.name == "trim";
    if (s.class_descriptor == "Landroid/util/Base64;" || s.class_descriptor == "Ljava/util/Base64$Decoder;")
        return s.name == "decode";
    if (s.class_descriptor == "Ljava/util/Arrays;") return s.name == "copyOf" || s.name == "copyOfRange";
    if (s.class_descriptor == "Ljava/lang/Object;") return s.name == "clone";
    return s.name == "clone" && s.param_descriptors.empty();
}

bool is_finalizer(const MethodSignature &s)
{
    return s.class_descriptor == kCipher &&
           (s.name == "doFinal" || s.name == "update" || s.name == "wrap" || s.name == "unwrap");
}

struct Origins {
    bool hardcoded = false;  // fill-array-data or const-string
    bool constant = false;   // any compile-time constant, zero-filled arrays included
    bool secure = false;     // SecureRandom / key generator involved
};

// Backward constant-origin slice of the bytes reaching a key or IV parameter.
class Slicer {
public:
    explicit Slicer(AnalysisContext &ctx) : ctx_(ctx) {}

    Origins run(const SmaliMethod &m, Register reg, std::uint32_t at)
    {
        seen_.clear();
        out_ = {};
        visit(m, reg, at, 0);
        return out_;
    }

private:
    void visit(const SmaliMethod &m, Register reg, std::uint32_t at, std::uint32_t depth)
    {
        if (depth > kSliceDepth || !seen_.insert({&m, reg, at}).second) return;
        const auto rd = ctx_.reaching(m, reg, at);
        for (auto t : rd.touches) touch(m, reg, t, depth);
        for (auto d : rd.defs) def(m, d, depth);
        if (!rd.reaches_entry) return;
        const auto slot = m.param_slot(reg);
        if (!slot) return;
        for (const auto &site : ctx_.direct_callers(&m)) {
            const auto args = taint::invoke_args(*site.method, site.offset);
            if (*slot < args.size()) visit(*site.method, args[*slot], site.offset, depth + 1);
        }
    }

    void touch(const SmaliMethod &m, Register reg, std::uint32_t t, std::uint32_t depth)
    {
        const auto &insn = m.instructions[t];
        if (insn.family == OpFamily::FillArrayData) {
            out_.hardcoded = out_.constant = true;
        } else if (insn.family == OpFamily::ArrayPut) {
            for (const auto &r : taint::operand_regs(m, t, 0)) visit(m, r, t, depth);
        } else if (insn.is_invoke() && insn.method_ref && is_secure_source(*insn.method_ref)) {
            out_.secure = true;
        } else if (insn.is_invoke() && insn.method_ref && insn.method_ref->name == "arraycopy") {
            // System.arraycopy(src, srcPos, dest, ...): follow src into dest.
            const auto args = taint::invoke_args(m, t);
            if (args.size() >= 3 && args[2] == reg) visit(m, args[0], t, depth);
        }
    }

    void def(const SmaliMethod &m, std::uint32_t d, std::uint32_t depth)
    {
        const auto &insn = m.instructions[d];
        const auto &du = ctx_.defuse(m)[d];
        switch (insn.family) {
        case OpFamily::ConstString:
            out_.hardcoded = out_.constant = true;
            break;
        case OpFamily::Const:
        case OpFamily::NewArray:
            out_.constant = true;
            break;
        case OpFamily::Move:
            for (const auto &r : du.uses) visit(m, r, d, depth);
            break;
        case OpFamily::FilledNewArray:
            out_.constant = true;
            break;
        case OpFamily::StaticGet:
        case OpFamily::InstanceGet: {
            const auto &writes = ctx_.program().field_writes_index();
            auto it = writes.find(*insn.field_ref);
            if (it == writes.end()) break;
            for (const auto &site : it->second) {
                for (const auto &r : taint::operand_regs(*site.method, site.offset, 0))
                    visit(*site.method, r, site.offset, depth + 1);
            }
            break;
        }
        case OpFamily::MoveResult: {
            if (!du.result_of) break;
            const auto call_at = *du.result_of;
            const auto &call = m.instructions[call_at];
            if (call.family == OpFamily::FilledNewArray) {
                out_.constant = true;
                break;
            }
            if (!call.method_ref) break;
            if (is_secure_source(*call.method_ref)) {
                out_.secure = true;
            } else if (is_transparent(*call.method_ref)) {
                for (const auto &r : taint::invoke_args(m, call_at)) visit(m, r, call_at, depth);
            } else if (const auto *callee = ctx_.resolve_exact(call)) {
                for (std::uint32_t i = 0; i < callee->instructions.size(); ++i) {
                    if (callee->instructions[i].family != OpFamily::Return) continue;
                    for (const auto &r : taint::operand_regs(*callee, i, 0)) visit(*callee, r, i, depth + 1);
                }
            }
            break;
        }
        default:
            break;
        }
    }

    struct Key {
        const SmaliMethod *m;
        Register reg;
        std::uint32_t at;
        auto operator<=>(const Key &) const = default;
    };

    AnalysisContext &ctx_;
    std::set<Key> seen_;
    Origins out_;
};

// The cipher made at `site` is used by a finalizer or escapes the method.
bool cipher_is_used(AnalysisContext &ctx, const SmaliMethod &m, std::uint32_t site)
{
    const auto next = site + 1;
    if (next >= m.instructions.size() || m.instructions[next].family != OpFamily::MoveResult) return false;
    const auto &du = ctx.defuse(m);

    // Does the value of `reg` just before `at` come from the getInstance call?
    std::function<bool(Register, std::uint32_t, int)> from_site = [&](Register reg, std::uint32_t at, int hops) {
        if (hops > 16) return false;
        const auto rd = ctx.reaching(m, reg, at);
        for (auto d : rd.defs) {
            if (d == next) return true;
            if (m.instructions[d].family == OpFamily::Move) {
                for (const auto &u : du[d].uses)
                    if (from_site(u, d, hops + 1)) return true;
            }
        }
        return false;
    };

    for (std::uint32_t i = next + 1; i < m.instructions.size(); ++i) {
        const auto &insn = m.instructions[i];
        if (insn.family == OpFamily::Move || insn.family == OpFamily::CheckCast) continue;
        bool uses_cipher = false;
        for (const auto &u : du[i].uses) {
            if (from_site(u, i, 0)) {
                uses_cipher = true;
                break;
            }
        }
        if (!uses_cipher) continue;
        if (!insn.is_invoke() || !insn.method_ref) return true;  // stored, returned, thrown
        if (is_finalizer(*insn.method_ref)) return true;
        if (insn.method_ref->class_descriptor != kCipher) return true;  // handed to other code
    }
    return false;
}

void lint_method(AnalysisContext &ctx, const SmaliMethod &m, std::set<MisuseFinding> &out, LintDiagnostics &diag)
{
    Slicer slicer(ctx);
    const auto sig = m.signature;
    for (std::uint32_t i = 0; i < m.instructions.size(); ++i) {
        const auto &insn = m.instructions[i];
        if (!insn.is_invoke() || !insn.method_ref) continue;
        const auto &ref = *insn.method_ref;

        if (ref.class_descriptor == kCipher && ref.name == "getInstance" && !insn.operands.empty()) {
            const auto transformation = taint::resolve_string_constant(m, m.canonical(insn.operands[0]), i);
            if (!transformation) {
                ++diag.unresolved_transformations;
            } else {
                const auto t = upper(*transformation);
                const bool ecb = t.find("/ECB/") != std::string::npos ||
                                 (t.size() >= 4 && t.compare(t.size() - 4, 4, "/ECB") == 0);
                if (ecb) out.insert({MisuseKind::BadCipherMode, sig, i, "ECB mode in \"" + *transformation + "\""});
                if (t.find('/') == std::string::npos && t.rfind("AES", 0) == 0)
                    out.insert({MisuseKind::DefaultModeAES, sig, i,
                                "\"" + *transformation + "\" leaves mode and padding to the provider"});
            }
            if (!cipher_is_used(ctx, m, i))
                out.insert({MisuseKind::DeadCryptoCode, sig, i, "cipher never reaches doFinal or update"});
            continue;
        }

        const auto ctor = spec_ctor(insn);
        if (!ctor) continue;
        const auto regs = taint::operand_regs(m, i, ctor->operand);
        if (regs.empty()) continue;
        const auto origins = slicer.run(m, regs.front(), i);
        const bool key = ctor->material == Material::Key;
        const std::string what = std::string(ctor->cls.substr(ctor->cls.rfind('/') + 1));
        const std::string cls = what.substr(0, what.size() - 1);
        if (origins.hardcoded)
            out.insert({key ? MisuseKind::HardcodedKeyBytes : MisuseKind::HardcodedIVBytes, sig, i,
                        "constant bytes passed to " + cls});
        if (origins.constant && !origins.secure)
            out.insert({key ? MisuseKind::NonRandomKey : MisuseKind::NonRandomIV, sig, i,
                        cls + " material has a constant origin"});
    }
}

} // namespace

std::string_view to_string(MisuseKind k)
{
    for (const auto &[v, s] : kKinds) {
        if (v == k) return s;
    }
    return "BadCipherMode";
}

std::optional<MisuseKind> parse_kind(std::string_view s)
{
    for (const auto &[v, name] : kKinds) {
        if (name == s) return v;
    }
    return std::nullopt;
}

std::set<MethodSignature> lint_scope(const smali::SmaliProgram &program, const std::set<MethodSignature> &witness)
{
    std::set<MethodSignature> scope;
    for (const auto &sig : witness) {
        const auto *m = program.find_method(sig);
        if (!m) continue;
        scope.insert(sig);
        for (const auto &insn : m->instructions) {
            if (!insn.is_invoke() || !insn.method_ref) continue;
            const auto *callee = program.resolve_method(*insn.method_ref);
            if (callee && !callee->is_abstract() && !callee->instructions.empty()) scope.insert(callee->signature);
        }
    }
    return scope;
}

std::vector<MisuseFinding> lint_crypto(const smali::SmaliProgram &program, const std::set<MethodSignature> &witness,
                                       LintDiagnostics *diagnostics)
{
    if (witness.empty()) return {};
    const auto rules = default_ruleset();
    AnalysisContext ctx(program, rules);
    std::set<MisuseFinding> found;
    LintDiagnostics diag;
    for (const auto &sig : lint_scope(program, witness)) lint_method(ctx, *program.find_method(sig), found, diag);
    if (diagnostics) *diagnostics = diag;
    return {found.begin(), found.end()};
}

std::set<MethodSignature> witness_methods(const taint::TaintVerdict &verdict)
{
    std::set<MethodSignature> out;
    for (const auto &f : verdict.witness) out.insert(f.method);
    if (verdict.crypto_call) out.insert(verdict.crypto_call->caller);
    return out;
}

std::vector<MisuseFinding> lint_verdict(const smali::SmaliProgram &program, const taint::TaintVerdict &verdict,
                                        LintDiagnostics *diagnostics)
{
    if (!verdict.crypto_found) {
        if (diagnostics) *diagnostics = {};
        return {};
    }
    return lint_crypto(program, witness_methods(verdict), diagnostics);
}

} // namespace gattcrypt::lints
