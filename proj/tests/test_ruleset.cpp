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
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace gattcrypt {
namespace {

using smali::MethodSignature;
using testing::program_of;
using testing::source_dir;

MethodSignature sig(const std::string &text) { return *MethodSignature::parse(text); }

std::vector<std::string> java(const std::vector<MethodMatcher> &ms)
{
    std::vector<std::string> out;
    for (const auto &m : ms) out.push_back(m.to_java());
    return out;
}

// Golden: the source and sink tables as printed, whitespace normalized.
TEST(DefaultRuleset, MatchesPublishedTable)
{
    const auto r = default_ruleset();
    EXPECT_EQ(java(r.read_sources), (std::vector<std::string>{"byte[] getValue ()", "Integer getIntValue (int, int)",
                                                              "String getStringValue (int)",
                                                              "Float getFloatValue (int, int)"}));
    EXPECT_EQ(java(r.write_sinks),
              (std::vector<std::string>{"boolean setValue (byte[])", "boolean setValue (int, int, int)",
                                        "boolean setValue (String)", "boolean setValue (int, int, int, int)"}));
    EXPECT_EQ(r.crypto_prefixes, (std::vector<std::string>{"Ljavax/crypto/", "Ljava/security/"}));
    ASSERT_EQ(r.eligibility_markers.size(), 1u);
    EXPECT_EQ(r.eligibility_markers[0].name, "connectGatt");
}

TEST(DefaultRuleset, Matches)
{
    const auto r = default_ruleset();
    EXPECT_TRUE(r.is_read_source(sig("Landroid/bluetooth/BluetoothGattCharacteristic;->getValue()[B")));
    EXPECT_TRUE(r.is_write_sink(sig("Landroid/bluetooth/BluetoothGattCharacteristic;->setValue(Ljava/lang/String;)Z")));
    EXPECT_FALSE(r.is_write_sink(sig("Landroid/bluetooth/BluetoothGattDescriptor;->setValue([B)Z")));
    EXPECT_TRUE(r.is_crypto(sig("Ljavax/crypto/Cipher;->doFinal([B)[B")));
    EXPECT_TRUE(r.is_crypto(sig("Ljava/security/MessageDigest;->digest([B)[B")));
    EXPECT_FALSE(r.is_crypto(sig("Ljava/util/Arrays;->toString([B)Ljava/lang/String;")));
    // Prefix match is on the package path, not on a string prefix of the name.
    EXPECT_FALSE(r.is_crypto(sig("Ljavax/cryptox/Foo;->bar()V")));
}

TEST(DefaultRuleset, SourcesAndSinksDisjoint)
{
    const auto r = default_ruleset();
    for (const auto &s : r.write_sinks)
        EXPECT_EQ(std::find(r.read_sources.begin(), r.read_sources.end(), s), r.read_sources.end());
}

TEST(Matcher, AbsentFieldsMatchEveryOverload)
{
    auto m = MethodMatcher::parse("Landroid/bluetooth/BluetoothGattCharacteristic;->setValue");
    ASSERT_TRUE(m.has_value());
    EXPECT_TRUE(m->matches(sig("Landroid/bluetooth/BluetoothGattCharacteristic;->setValue(III)Z")));
    EXPECT_TRUE(m->matches(sig("Landroid/bluetooth/BluetoothGattCharacteristic;->setValue([B)Z")));
    EXPECT_FALSE(m->matches(sig("Landroid/bluetooth/BluetoothGattCharacteristic;->getValue()[B")));
    auto prefix = MethodMatcher::parse("Lcom/samsung/*->setValue");
    ASSERT_TRUE(prefix.has_value());
    EXPECT_TRUE(prefix->matches(sig("Lcom/samsung/android/sdk/bt/gatt/BluetoothGattCharacteristic;->setValue([B)Z")));
}

TEST(Matcher, RoundTrips)
{
    for (const auto &m : default_ruleset().write_sinks) EXPECT_EQ(MethodMatcher::parse(m.to_string()), m);
}

TEST(LoadRuleset, EmptyDocumentIsDefault)
{
    EXPECT_EQ(load_ruleset_text(""), default_ruleset());
    EXPECT_EQ(load_ruleset_text("{}"), default_ruleset());
}

TEST(LoadRuleset, AddingAReadSource)
{
    const auto r = load_ruleset_text(R"(
read_sources:
  - "Lcom/vendor/ble/Characteristic;->getValue()[B"
)");
    EXPECT_EQ(r.read_sources.size(), 5u);
    EXPECT_TRUE(r.is_read_source(sig("Lcom/vendor/ble/Characteristic;->getValue()[B")));
}

TEST(LoadRuleset, DeletingAllSinksIsRejected)
{
    try {
        load_ruleset_text("write_sinks:\n  clear: true\n");
        FAIL() << "no error";
    } catch (const SchemaError &e) {
        EXPECT_EQ(e.path(), "write_sinks");
    }
}

TEST(LoadRuleset, BadEntryNamesItsPath)
{
    try {
        load_ruleset_text("crypto_prefixes:\n  add: [\"Lok/\", \"nope\"]\n");
        FAIL() << "no error";
    } catch (const SchemaError &e) {
        EXPECT_EQ(e.path(), "crypto_prefixes.add[1]");
    }
    EXPECT_THROW(load_ruleset_text("sinks: []\n"), SchemaError);
}

TEST(LoadRuleset, VendorLibrariesAreOptIn)
{
    const auto r = load_ruleset_text("include_vendor_libraries: true\n");
    EXPECT_GT(r.read_sources.size(), 4u);
    EXPECT_GT(r.write_sinks.size(), 4u);
}

TEST(LoadRuleset, BundledDocumentLoads)
{
    EXPECT_EQ(load_ruleset(source_dir() / "docs" / "default-ruleset.yaml"), default_ruleset());
}

TEST(Eligibility, CorpusAppIsEligible)
{
    const auto program = smali::parse_program(source_dir() / "corpus" / "direct_write_crypto" / "smali");
    const auto v = is_eligible(program, default_ruleset());
    EXPECT_TRUE(v.eligible);
    EXPECT_FALSE(v.permission_checked);
}

TEST(Eligibility, NoInvokes)
{
    const auto program = program_of(R"(.class public LA;
.super Ljava/lang/Object;
.method public f()V
    .locals 0
    return-void
.end method
)");
    const auto v = is_eligible(program, default_ruleset());
    EXPECT_FALSE(v.eligible);
    EXPECT_EQ(v.reason, "no connectGatt");
}

TEST(Eligibility, PermissionAbsent)
{
    const auto program = smali::parse_program(source_dir() / "corpus" / "direct_write_crypto" / "smali");
    const auto v = is_eligible(program, default_ruleset(), std::vector<std::string>{"android.permission.INTERNET"});
    EXPECT_FALSE(v.eligible);
    EXPECT_EQ(v.reason, "permission absent");
    EXPECT_TRUE(is_eligible(program, default_ruleset(), std::vector<std::string>{"android.permission.BLUETOOTH"})
                    .eligible);
}

// Same invoke, same rules, same answer, whatever order matchers are asked in.
TEST(Property, MatchingIsPure)
{
    const auto r = default_ruleset();
    const auto program = smali::parse_program(source_dir() / "corpus" / "read_format_chain" / "smali");
    for (const auto &[m, _] : program.callers_index()) {
        const bool a = r.is_crypto(m), b = r.is_read_source(m), c = r.is_write_sink(m);
        EXPECT_EQ(r.is_write_sink(m), c);
        EXPECT_EQ(r.is_read_source(m), b);
        EXPECT_EQ(r.is_crypto(m), a);
    }
}

} // namespace
} // namespace gattcrypt
