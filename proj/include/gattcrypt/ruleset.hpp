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

#ifndef GATTCRYPT_RULESET_HPP
#define GATTCRYPT_RULESET_HPP

#include "gattcrypt/smali_ir.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gattcrypt {

// Matches invoked method signatures. A class pattern ending in '*' is a
// descriptor prefix. Absent params/return match every overload.
struct MethodMatcher {
    std::string class_pattern;
    std::string name;
    std::optional<std::vector<std::string>> param_descriptors;
    std::optional<std::string> return_descriptor;

    bool matches(const smali::MethodSignature &sig) const;
    bool operator()(const smali::MethodSignature &sig) const { return matches(sig); }

    // "Lcls;->name", "Lcls;->name(params)ret", "Lpkg/*->name(*)ret" ...
    std::string to_string() const;
    static std::optional<MethodMatcher> parse(std::string_view text);

    // Java-style rendering, e.g. "byte[] getValue ()".
    std::string to_java() const;

    bool operator==(const MethodMatcher &) const = default;
};

struct RuleSet {
    std::vector<MethodMatcher> write_sinks;
    std::vector<MethodMatcher> read_sources;
    std::vector<std::string> crypto_prefixes;
    std::vector<MethodMatcher> eligibility_markers;

    bool is_write_sink(const smali::MethodSignature &sig) const;
    bool is_read_source(const smali::MethodSignature &sig) const;
    bool is_crypto(const smali::MethodSignature &sig) const;
    bool is_crypto_class(std::string_view class_descriptor) const;
    bool is_eligibility_marker(const smali::MethodSignature &sig) const;

    bool operator==(const RuleSet &) const = default;
};

class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, const std::string &reason)
        : std::runtime_error(path + ": " + reason), path_(std::move(path))
    {
    }
    const std::string &path() const { return path_; }

private:
    std::string path_;
};

// The four getValue and four setValue overloads of
// android.bluetooth.BluetoothGattCharacteristic, the javax.crypto and
// java.security prefixes, and BluetoothDevice.connectGatt.
RuleSet default_ruleset();

// Matchers for the obsolete vendor BLE stacks (Samsung, Broadcom). Not part
// of the default rules; enabled with `include_vendor_libraries: true`.
std::vector<MethodMatcher> vendor_read_sources();
std::vector<MethodMatcher> vendor_write_sinks();

// Merges a ruleset document (YAML, see docs/ruleset-format.md) over the
// defaults. Throws SchemaError naming the offending entry.
RuleSet load_ruleset_text(const std::string &document);
RuleSet load_ruleset(const std::filesystem::path &path);

struct EligibilityVerdict {
    bool eligible = false;
    std::string reason;
    // False when no permission list was supplied (connectGatt alone decided).
    bool permission_checked = false;
};

// Eligible iff the program invokes an eligibility marker and, when a
// permission list is supplied, that list declares android.permission.BLUETOOTH.
EligibilityVerdict is_eligible(const smali::SmaliProgram &program, const RuleSet &rules,
                               const std::optional<std::vector<std::string>> &permissions = std::nullopt);

} // namespace gattcrypt

#endif // GATTCRYPT_RULESET_HPP
