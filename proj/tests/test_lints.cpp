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
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <random>
#include <sstream>

namespace gattcrypt::lints {
namespace {

using taint::Direction;
using testing::program_of;
using testing::source_dir;

std::filesystem::path fixtures() { return source_dir() / "tests" / "fixtures" / "lints"; }

std::set<std::string> expected_kinds(const std::string &name)
{
    const auto doc = YAML::LoadFile((fixtures() / name / "expected.yaml").string());
    std::set<std::string> out;
    for (const auto &n : doc["findings"]) out.insert(n.as<std::string>());
    return out;
}

std::set<std::string> kinds(const std::vector<MisuseFinding> &fs)
{
    std::set<std::string> out;
    for (const auto &f : fs) out.insert(std::string(to_string(f.kind)));
    return out;
}

std::vector<MisuseFinding> lint_fixture(const std::string &name)
{
    const auto program = smali::parse_program(fixtures() / name / "smali");
    const auto v = taint::analyze_app(program, default_ruleset(), Direction::BackwardFromWrite);
    EXPECT_TRUE(v.crypto_found) << name;
    return lint_verdict(program, v);
}

class Fixture : public ::testing::TestWithParam<std::string> {};

TEST_P(Fixture, ProducesExactlyTheLabeledKinds)
{
    const auto found = lint_fixture(GetParam());
    EXPECT_EQ(kinds(found), expected_kinds(GetParam()));
    for (const auto &f : found) EXPECT_FALSE(f.detail.empty());
}

INSTANTIATE_TEST_SUITE_P(Lints, Fixture,
                         ::testing::Values("hardcoded_key", "ecb", "bare_aes", "dead_cipher", "gcm_ok", "static_iv",
                                           "zero_iv"));

TEST(Lints, HardcodedKeySiteIsTheKeySpecConstructor)
{
    const auto found = lint_fixture("hardcoded_key");
    ASSERT_EQ(found.size(), 2u);
    for (const auto &f : found) {
        EXPECT_EQ(f.method.name, "send");
        EXPECT_EQ(f.offset, 5u);
    }
}

TEST(Lints, DeadCipherIsInTheDirectCallee)
{
    const auto found = lint_fixture("dead_cipher");
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].method.name, "prepare");
}

TEST(Lints, NegativeVerdictHasNoFindings)
{
    const auto program = smali::parse_program(fixtures() / "ecb" / "smali");
    taint::TaintVerdict negative;
    EXPECT_TRUE(lint_verdict(program, negative).empty());
    EXPECT_TRUE(lint_crypto(program, {}).empty());
}

TEST(Lints, NonConstantTransformationIsCountedNotFlagged)
{
    const auto program = program_of(R"(.class public LA;
.super Ljava/lang/Object;
.method public static f(Ljava/lang/String;[B)[B
    .locals 1
    invoke-static {p0}, Ljavax/crypto/Cipher;->getInstance(Ljava/lang/String;)Ljavax/crypto/Cipher;
    move-result-object v0
    invoke-virtual {v0, p1}, Ljavax/crypto/Cipher;->doFinal([B)[B
    move-result-object v0
    return-object v0
.end method
)");
    LintDiagnostics d;
    const auto found = lint_crypto(program, {*smali::MethodSignature::parse("LA;->f(Ljava/lang/String;[B)[B")}, &d);
    EXPECT_TRUE(found.empty());
    EXPECT_EQ(d.unresolved_transformations, 1u);
}

TEST(Lints, EcbSuffixAndCaseInsensitive)
{
    for (const char *t : {"aes/ecb/pkcs5padding", "DES/ECB", "AES/ECB/NoPadding"}) {
        const auto program = program_of(std::string(R"(.class public LA;
.super Ljava/lang/Object;
.method public static f([B)[B
    .locals 1
    const-string v0, ")") + t + R"("
    invoke-static {v0}, Ljavax/crypto/Cipher;->getInstance(Ljava/lang/String;)Ljavax/crypto/Cipher;
    move-result-object v0
    invoke-virtual {v0, p0}, Ljavax/crypto/Cipher;->doFinal([B)[B
    move-result-object v0
    return-object v0
.end method
)");
        const auto found = lint_crypto(program, {*smali::MethodSignature::parse("LA;->f([B)[B")});
        EXPECT_EQ(kinds(found), std::set<std::string>{"BadCipherMode"}) << t;
    }
}

// Every finding sits in a witness method or one call away from one.
TEST(Property, FindingsStayWithinOneHop)
{
    std::vector<std::filesystem::path> apps;
    for (const auto &e : std::filesystem::directory_iterator(fixtures())) apps.push_back(e.path() / "smali");
    for (const auto &e : std::filesystem::directory_iterator(source_dir() / "corpus")) apps.push_back(e.path() / "smali");
    std::sort(apps.begin(), apps.end());
    for (const auto &app : apps) {
        const auto program = smali::parse_program(app);
        for (auto dir : {Direction::BackwardFromWrite, Direction::ForwardFromRead}) {
            const auto v = taint::analyze_app(program, default_ruleset(), dir);
            const auto witness = witness_methods(v);
            for (const auto &f : lint_verdict(program, v)) {
                bool near = witness.count(f.method) > 0;
                for (const auto &w : witness) {
                    const auto *m = program.find_method(w);
                    for (std::size_t i = 0; m && !near && i < m->instructions.size(); ++i) {
                        const auto &insn = m->instructions[i];
                        if (!insn.is_invoke()) continue;
                        const auto *callee = program.resolve_method(*insn.method_ref);
                        near = callee && callee->signature == f.method;
                    }
                }
                EXPECT_TRUE(near) << app << " " << f.method.to_string();
            }
        }
    }
}

TEST(Property, IndependentOfSourceOrder)
{
    std::mt19937 rng(99);
    for (const char *name : {"dead_cipher", "hardcoded_key"}) {
        std::vector<std::pair<std::string, std::string>> sources;
        for (const auto &e : std::filesystem::recursive_directory_iterator(fixtures() / name / "smali")) {
            if (e.path().extension() != ".smali") continue;
            std::ifstream in(e.path());
            std::stringstream ss;
            ss << in.rdbuf();
            sources.emplace_back(e.path().string(), ss.str());
        }
        // Pad with unrelated classes so there is an order to shuffle.
        for (int i = 0; i < 5; ++i)
            sources.emplace_back("P" + std::to_string(i) + ".smali",
                                 ".class public LPad" + std::to_string(i) + ";\n.super Ljava/lang/Object;\n");
        const auto program = smali::parse_program_sources(sources);
        const auto base = lint_verdict(program, taint::analyze_app(program, default_ruleset(), Direction::BackwardFromWrite));
        for (int round = 0; round < 10; ++round) {
            std::shuffle(sources.begin(), sources.end(), rng);
            const auto p = smali::parse_program_sources(sources);
            EXPECT_EQ(lint_verdict(p, taint::analyze_app(p, default_ruleset(), Direction::BackwardFromWrite)), base);
        }
    }
}

} // namespace
} // namespace gattcrypt::lints
