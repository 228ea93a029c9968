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

#include "gattcrypt/ruleset.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gattcrypt {

namespace {

constexpr const char *kCharacteristic = "Landroid/bluetooth/BluetoothGattCharacteristic;";

MethodMatcher exact(std::string cls, std::string name, std::vector<std::string> params, std::string ret)
{
    return MethodMatcher{std::move(cls), std::move(name), std::move(params), std::move(ret)};
}

std::string java_type(std::string_view d)
{
    std::size_t dims = 0;
    while (dims < d.size() && d[dims] == '[') ++dims;
    std::string_view base = d.substr(dims);
    std::string name;
    if (base.size() == 1) {
        switch (base[0]) {
        case 'V': name = "void"; break;
        case 'Z': name = "boolean"; break;
        case 'B': name = "byte"; break;
        case 'S': name = "short"; break;
        case 'C': name = "char"; break;
        case 'I': name = "int"; break;
        case 'J': name = "long"; break;
        case 'F': name = "float"; break;
        case 'D': name = "double"; break;
        default: name = std::string(base);
        }
    } else if (base.size() > 2 && base.front() == 'L' && base.back() == ';') {
        std::string_view full = base.substr(1, base.size() - 2);
        auto slash = full.rfind('/');
        name = std::string(slash == std::string_view::npos ? full : full.substr(slash + 1));
    } else {
        name = std::string(base);
    }
    for (std::size_t i = 0; i < dims; ++i) name += "[]";
    return name;
}

std::vector<MethodMatcher> *section_matchers(RuleSet &rules, const std::string &key)
{
    if (key == "write_sinks") return &rules.write_sinks;
    if (key == "read_sources") return &rules.read_sources;
    if (key == "eligibility") return &rules.eligibility_markers;
    return nullptr;
}

std::vector<std::string> string_list(const YAML::Node &node, const std::string &path)
{
    if (!node.IsSequence()) throw SchemaError(path, "expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        if (!node[i].IsScalar()) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected a string");
        out.push_back(node[i].as<std::string>());
    }
    return out;
}

// A section is either a plain list (entries to add) or a map with optional
// `clear`, `remove` and `add` keys, applied in that order.
template <typename T, typename ParseFn>
void merge_section(std::vector<T> &target, const YAML::Node &node, const std::string &key, ParseFn parse)
{
    auto parse_all = [&](const YAML::Node &list, const std::string &path) {
        std::vector<T> out;
        auto items = string_list(list, path);
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto v = parse(items[i]);
            if (!v) throw SchemaError(path + "[" + std::to_string(i) + "]", "cannot parse '" + items[i] + "'");
            out.push_back(std::move(*v));
        }
        return out;
    };
    auto add_all = [&](const std::vector<T> &items) {
        for (const auto &it : items) {
            if (std::find(target.begin(), target.end(), it) == target.end()) target.push_back(it);
        }
    };

    if (node.IsNull()) return;
    if (node.IsSequence()) {
        add_all(parse_all(node, key));
        return;
    }
    if (!node.IsMap()) throw SchemaError(key, "expected a list or a map with add/remove/clear");
    for (const auto &kv : node) {
        auto k = kv.first.as<std::string>();
        if (k != "add" && k != "remove" && k != "clear") throw SchemaError(key + "." + k, "unknown key");
    }
    if (auto clear = node["clear"]) {
        if (!clear.IsScalar()) throw SchemaError(key + ".clear", "expected a boolean");
        bool yes = false;
        if (!YAML::convert<bool>::decode(clear, yes)) throw SchemaError(key + ".clear", "expected a boolean");
        if (yes) target.clear();
    }
    if (auto rm = node["remove"]) {
        for (const auto &item : parse_all(rm, key + ".remove")) {
            target.erase(std::remove(target.begin(), target.end(), item), target.end());
        }
    }
    if (auto add = node["add"]) add_all(parse_all(add, key + ".add"));
}

} // namespace

bool MethodMatcher::matches(const smali::MethodSignature &sig) const
{
    if (sig.name != name) return false;
    if (!class_pattern.empty() && class_pattern.back() == '*') {
        std::string_view prefix(class_pattern.data(), class_pattern.size() - 1);
        if (sig.class_descriptor.compare(0, prefix.size(), prefix) != 0) return false;
    } else if (sig.class_descriptor != class_pattern) {
        return false;
    }
    if (param_descriptors && *param_descriptors != sig.param_descriptors) return false;
    if (return_descriptor && *return_descriptor != sig.return_descriptor) return false;
    return true;
}

std::string MethodMatcher::to_string() const
{
    std::string out = class_pattern + "->" + name;
    if (!param_descriptors && !return_descriptor) return out;
    out += "(";
    if (param_descriptors) {
        for (const auto &p : *param_descriptors) out += p;
    } else {
        out += "*";
    }
    out += ")";
    if (return_descriptor) out += *return_descriptor;
    return out;
}

std::optional<MethodMatcher> MethodMatcher::parse(std::string_view raw)
{
    std::string text;
    for (char c : raw) {
        if (c != ' ' && c != '\t') text += c;
    }
    auto arrow = text.find("->");
    if (arrow == std::string::npos || arrow == 0) return std::nullopt;
    MethodMatcher m;
    m.class_pattern = text.substr(0, arrow);
    const bool prefix = m.class_pattern.back() == '*';
    if (m.class_pattern.front() != 'L' || (!prefix && m.class_pattern.back() != ';')) return std::nullopt;
    std::string rest = text.substr(arrow + 2);
    auto open = rest.find('(');
    if (open == std::string::npos) {
        if (rest.empty() || rest.find(')') != std::string::npos) return std::nullopt;
        m.name = rest;
        return m;
    }
    m.name = rest.substr(0, open);
    if (m.name.empty()) return std::nullopt;
    auto close = rest.find(')', open);
    if (close == std::string::npos) return std::nullopt;
    std::string params = rest.substr(open + 1, close - open - 1);
    std::string ret = rest.substr(close + 1);
    if (params != "*") {
        // Reuse the signature parser for descriptor validation.
        auto sig = smali::MethodSignature::parse("La;->" + m.name + "(" + params + ")" + (ret.empty() ? "V" : ret));
        if (!sig) return std::nullopt;
        m.param_descriptors = sig->param_descriptors;
    }
    if (!ret.empty()) {
        auto sig = smali::MethodSignature::parse("La;->x()" + ret);
        if (!sig) return std::nullopt;
        m.return_descriptor = ret;
    }
    return m;
}

std::string MethodMatcher::to_java() const
{
    std::string out;
    if (return_descriptor) out += java_type(*return_descriptor) + " ";
    out += name + " (";
    if (param_descriptors) {
        for (std::size_t i = 0; i < param_descriptors->size(); ++i) {
            if (i) out += ", ";
            out += java_type((*param_descriptors)[i]);
        }
    } else {
        out += "...";
    }
    out += ")";
    return out;
}

namespace {
bool any_match(const std::vector<MethodMatcher> &ms, const smali::MethodSignature &sig)
{
    return std::any_of(ms.begin(), ms.end(), [&](const MethodMatcher &m) { return m.matches(sig); });
}
} // namespace

bool RuleSet::is_write_sink(const smali::MethodSignature &sig) const { return any_match(write_sinks, sig); }
bool RuleSet::is_read_source(const smali::MethodSignature &sig) const { return any_match(read_sources, sig); }
bool RuleSet::is_eligibility_marker(const smali::MethodSignature &sig) const
{
    return any_match(eligibility_markers, sig);
}

bool RuleSet::is_crypto_class(std::string_view cls) const
{
    return std::any_of(crypto_prefixes.begin(), crypto_prefixes.end(),
                       [&](const std::string &p) { return cls.substr(0, p.size()) == p; });
}

bool RuleSet::is_crypto(const smali::MethodSignature &sig) const { return is_crypto_class(sig.class_descriptor); }

RuleSet default_ruleset()
{
    RuleSet r;
    r.read_sources = {
        exact(kCharacteristic, "getValue", {}, "[B"),
        exact(kCharacteristic, "getIntValue", {"I", "I"}, "Ljava/lang/Integer;"),
        exact(kCharacteristic, "getStringValue", {"I"}, "Ljava/lang/String;"),
        exact(kCharacteristic, "getFloatValue", {"I", "I"}, "Ljava/lang/Float;"),
    };
    r.write_sinks = {
        exact(kCharacteristic, "setValue", {"[B"}, "Z"),
        exact(kCharacteristic, "setValue", {"I", "I", "I"}, "Z"),
        exact(kCharacteristic, "setValue", {"Ljava/lang/String;"}, "Z"),
        exact(kCharacteristic, "setValue", {"I", "I", "I", "I"}, "Z"),
    };
    r.crypto_prefixes = {"Ljavax/crypto/", "Ljava/security/"};
    r.eligibility_markers = {MethodMatcher{"Landroid/bluetooth/BluetoothDevice;", "connectGatt", std::nullopt,
                                           std::nullopt}};
    return r;
}

std::vector<MethodMatcher> vendor_read_sources()
{
    return {
        MethodMatcher{"Lcom/samsung/android/sdk/bt/gatt/BluetoothGattCharacteristic;", "getValue", std::nullopt,
                      std::nullopt},
        MethodMatcher{"Lcom/broadcom/bt/gatt/BluetoothGattCharacteristic;", "getValue", std::nullopt, std::nullopt},
    };
}

std::vector<MethodMatcher> vendor_write_sinks()
{
    return {
        MethodMatcher{"Lcom/samsung/android/sdk/bt/gatt/BluetoothGattCharacteristic;", "setValue", std::nullopt,
                      std::nullopt},
        MethodMatcher{"Lcom/broadcom/bt/gatt/BluetoothGattCharacteristic;", "setValue", std::nullopt, std::nullopt},
    };
}

RuleSet load_ruleset_text(const std::string &document)
{
    RuleSet rules = default_ruleset();
    YAML::Node root;
    try {
        root = YAML::Load(document);
    } catch (const YAML::Exception &e) {
        throw SchemaError("<document>", e.what());
    }
    if (root.IsNull()) return rules;
    if (!root.IsMap()) throw SchemaError("<document>", "top level must be a map");

    auto parse_matcher = [](const std::string &s) { return MethodMatcher::parse(s); };
    auto parse_prefix = [](const std::string &s) -> std::optional<std::string> {
        if (s.size() < 2 || s.front() != 'L') return std::nullopt;
        return s;
    };

    for (const auto &kv : root) {
        const auto key = kv.first.as<std::string>();
        if (auto *list = section_matchers(rules, key)) {
            merge_section(*list, kv.second, key, parse_matcher);
        } else if (key == "crypto_prefixes") {
            merge_section(rules.crypto_prefixes, kv.second, key, parse_prefix);
        } else if (key == "include_vendor_libraries") {
            bool yes = false;
            if (!kv.second.IsScalar() || !YAML::convert<bool>::decode(kv.second, yes)) {
                throw SchemaError(key, "expected a boolean");
            }
            if (yes) {
                for (auto &m : vendor_read_sources()) rules.read_sources.push_back(std::move(m));
                for (auto &m : vendor_write_sinks()) rules.write_sinks.push_back(std::move(m));
            }
        } else {
            throw SchemaError(key, "unknown section");
        }
    }

    if (rules.write_sinks.empty()) throw SchemaError("write_sinks", "at least one write sink is required");
    if (rules.read_sources.empty()) throw SchemaError("read_sources", "at least one read source is required");
    for (std::size_t i = 0; i < rules.write_sinks.size(); ++i) {
        if (std::find(rules.read_sources.begin(), rules.read_sources.end(), rules.write_sinks[i]) !=
            rules.read_sources.end()) {
            throw SchemaError("write_sinks[" + std::to_string(i) + "]", "matcher is also a read source");
        }
    }
    return rules;
}

RuleSet load_ruleset(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string(), "cannot open ruleset document");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_ruleset_text(ss.str());
}

EligibilityVerdict is_eligible(const smali::SmaliProgram &program, const RuleSet &rules,
                               const std::optional<std::vector<std::string>> &permissions)
{
    EligibilityVerdict v;
    auto sites = smali::find_invocations(
        program, [&](const smali::MethodSignature &sig) { return rules.is_eligibility_marker(sig); });
    if (sites.empty()) {
        v.reason = "no connectGatt";
        return v;
    }
    if (permissions) {
        v.permission_checked = true;
        bool has = std::any_of(permissions->begin(), permissions->end(), [](const std::string &p) {
            return p == "android.permission.BLUETOOTH" || p == "BLUETOOTH";
        });
        if (!has) {
            v.reason = "permission absent";
            return v;
        }
        v.eligible = true;
        v.reason = "connectGatt and BLUETOOTH permission";
        return v;
    }
    v.eligible = true;
    v.reason = "connectGatt (permission not checked)";
    return v;
}

} // namespace gattcrypt
