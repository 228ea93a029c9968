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
#include "smali_ir/text_util.hpp"

#include <charconv>
#include <unordered_map>

namespace gattcrypt::smali {

namespace {

// Length of the first type descriptor in `s`, or 0 if malformed.
std::size_t descriptor_length(std::string_view s)
{
    std::size_t i = 0;
    while (i < s.size() && s[i] == '[') ++i;
    if (i >= s.size()) return 0;
    switch (s[i]) {
    case 'V': case 'Z': case 'B': case 'S': case 'C': case 'I': case 'J': case 'F': case 'D':
        return i + 1;
    case 'L': {
        auto semi = s.find(';', i);
        return semi == std::string_view::npos ? 0 : semi + 1;
    }
    default:
        return 0;
    }
}

} // namespace

std::uint32_t descriptor_width(std::string_view d) { return (d == "J" || d == "D") ? 2 : 1; }

std::string MethodSignature::proto() const
{
    std::string out = "(";
    for (const auto &p : param_descriptors) out += p;
    out += ")";
    out += return_descriptor;
    return out;
}

std::string MethodSignature::to_string() const { return class_descriptor + "->" + name + proto(); }

std::optional<MethodSignature> MethodSignature::parse(std::string_view raw)
{
    std::string text = strip_whitespace(raw);
    std::string_view s = text;
    auto arrow = s.find("->");
    if (arrow == std::string_view::npos) return std::nullopt;
    MethodSignature sig;
    sig.class_descriptor = std::string(s.substr(0, arrow));
    if (descriptor_length(sig.class_descriptor) != sig.class_descriptor.size()) return std::nullopt;
    s.remove_prefix(arrow + 2);
    auto open = s.find('(');
    auto close = s.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open || open == 0) {
        return std::nullopt;
    }
    sig.name = std::string(s.substr(0, open));
    std::string_view params = s.substr(open + 1, close - open - 1);
    while (!params.empty()) {
        auto len = descriptor_length(params);
        if (len == 0 || params[0] == 'V') return std::nullopt;
        sig.param_descriptors.emplace_back(params.substr(0, len));
        params.remove_prefix(len);
    }
    std::string_view ret = s.substr(close + 1);
    if (ret.empty() || descriptor_length(ret) != ret.size()) return std::nullopt;
    sig.return_descriptor = std::string(ret);
    return sig;
}

std::string FieldId::to_string() const { return class_descriptor + "->" + name + ":" + type_descriptor; }

std::optional<FieldId> FieldId::parse(std::string_view raw)
{
    std::string text = strip_whitespace(raw);
    std::string_view s = text;
    auto arrow = s.find("->");
    if (arrow == std::string_view::npos) return std::nullopt;
    FieldId f;
    f.class_descriptor = std::string(s.substr(0, arrow));
    if (descriptor_length(f.class_descriptor) != f.class_descriptor.size()) return std::nullopt;
    s.remove_prefix(arrow + 2);
    auto colon = s.find(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    f.name = std::string(s.substr(0, colon));
    std::string_view type = s.substr(colon + 1);
    if (type.empty() || descriptor_length(type) != type.size()) return std::nullopt;
    f.type_descriptor = std::string(type);
    return f;
}

std::string Register::to_string() const
{
    return (kind == RegisterKind::Local ? "v" : "p") + std::to_string(index);
}

std::optional<Register> Register::parse(std::string_view s)
{
    s = trim(s);
    if (s.size() < 2 || (s[0] != 'v' && s[0] != 'p')) return std::nullopt;
    std::uint32_t idx = 0;
    auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return Register{s[0] == 'v' ? RegisterKind::Local : RegisterKind::Param, idx};
}

std::optional<std::uint32_t> access::parse_flag(std::string_view word)
{
    static const std::unordered_map<std::string_view, std::uint32_t> flags = {
        {"public", kPublic},
        {"private", kPrivate},
        {"protected", kProtected},
        {"static", kStatic},
        {"final", kFinal},
        {"synchronized", kSynchronized},
        {"bridge", kBridge},
        {"varargs", kVarargs},
        {"native", kNative},
        {"interface", kInterface},
        {"abstract", kAbstract},
        {"strictfp", kStrict},
        {"synthetic", kSynthetic},
        {"annotation", kAnnotation},
        {"enum", kEnum},
        {"constructor", kConstructor},
        {"declared-synchronized", kDeclaredSynchronized},
        {"volatile", 0x40},
        {"transient", 0x80},
    };
    if (auto it = flags.find(word); it != flags.end()) return it->second;
    return std::nullopt;
}

std::uint32_t SmaliMethod::ins_count() const
{
    std::uint32_t n = is_static() ? 0 : 1;
    for (const auto &p : signature.param_descriptors) n += descriptor_width(p);
    return n;
}

std::uint32_t SmaliMethod::locals_count() const
{
    auto ins = ins_count();
    return registers_declared > ins ? registers_declared - ins : 0;
}

Register SmaliMethod::canonical(Register reg) const
{
    if (reg.kind == RegisterKind::Local) {
        auto locals = locals_count();
        if (reg.index >= locals && reg.index < registers_declared) {
            return Register::param(reg.index - locals);
        }
    }
    return reg;
}

std::optional<std::uint32_t> SmaliMethod::param_slot(Register reg) const
{
    Register c = canonical(reg);
    if (c.kind == RegisterKind::Param && c.index < ins_count()) return c.index;
    return std::nullopt;
}

const SmaliMethod *SmaliClass::find_method(std::string_view name, std::string_view proto) const
{
    for (const auto &m : methods) {
        if (m.signature.name == name && m.signature.proto() == proto) return &m;
    }
    return nullptr;
}

bool site_less(const CallSite &lhs, const CallSite &rhs)
{
    const auto &a = lhs.method->signature;
    const auto &b = rhs.method->signature;
    if (a.class_descriptor != b.class_descriptor) return a.class_descriptor < b.class_descriptor;
    if (a.name != b.name) return a.name < b.name;
    if (a != b) return a < b;
    return lhs.offset < rhs.offset;
}

} // namespace gattcrypt::smali
