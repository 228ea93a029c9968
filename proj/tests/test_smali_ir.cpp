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
#include "gattcrypt/smali_ir.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <regex>
#include <sstream>

namespace gattcrypt::smali {
namespace {

using testing::program_of;
using testing::source_dir;

// Hand-written listing of a BLE write, kept with its elisions and stray spaces. The
// elided parameter list is filled in so the signature parses.
const char *kElidedWriter = R"(.class public Lcom/example/elided/Writer;
.super Ljava/lang/Object;

.method private a(Landroid/bluetooth/BluetoothGatt;[B)V
    .locals 10

    .prologue
    const/4 v9, 0x2
    const/4 v8, 0x3
    const/4 v7, 0x1
    ...
    invoke-virtual {v0, v3}, Landroid/bluetooth/BluetoothGattService;-> getCharacteristic(Ljava/util/UUID;) Landroid/bluetooth/BluetoothGattCharacteristic;

    move-result-object v3
    ...
    invoke-virtual {v3, p2}, Landroid/bluetooth/BluetoothGattCharacteristic; ->setValue([B)Z
    invoke-virtual {v1, v3}, Landroid/bluetooth/BluetoothGatt; ->writeCharacteristic(Landroid/bluetooth/ BluetoothGattCharacteristic;)Z
.end method
)";

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

MethodSignature sig(const std::string &text)
{
    auto s = MethodSignature::parse(text);
    if (!s) throw std::runtime_error("bad signature " + text);
    return *s;
}

TEST(Signature, RoundTrips)
{
    for (const char *text : {"Landroid/bluetooth/BluetoothGattCharacteristic;->getValue()[B",
                             "Ljava/lang/System;->arraycopy(Ljava/lang/Object;ILjava/lang/Object;II)V",
                             "La/b;-><init>(JD[[Ljava/lang/String;)V"}) {
        EXPECT_EQ(sig(text).to_string(), text);
    }
    EXPECT_EQ(sig("La/b;->f(JI)V").param_descriptors, (std::vector<std::string>{"J", "I"}));
    EXPECT_FALSE(MethodSignature::parse("La/b;->f(").has_value());
}

TEST(Register, RendersAndParses)
{
    EXPECT_EQ(Register::local(3).to_string(), "v3");
    EXPECT_EQ(Register::param(2).to_string(), "p2");
    EXPECT_EQ(Register::parse("p2"), Register::param(2));
    EXPECT_FALSE(Register::parse("x2").has_value());
}

TEST(ElidedListing, SetValueAtRecordedOffset)
{
    const auto program = program_of(kElidedWriter);
    ASSERT_EQ(program.classes().size(), 1u);
    const auto *m = program.find_method(sig("Lcom/example/elided/Writer;->a(Landroid/bluetooth/BluetoothGatt;[B)V"));
    ASSERT_NE(m, nullptr);
    // Three consts, the elision, the getCharacteristic invoke, its move-result,
    // a second elision, then setValue.
    const auto sites = find_invocations(program, [](const MethodSignature &s) {
        return s == sig("Landroid/bluetooth/BluetoothGattCharacteristic;->setValue([B)Z");
    });
    ASSERT_EQ(sites.size(), 1u);
    EXPECT_EQ(sites[0].offset, 7u);
    EXPECT_EQ(sites[0].method, m);
    EXPECT_EQ(m->instructions[3].family, OpFamily::Opaque);
    EXPECT_EQ(m->instructions[7].operands, (std::vector<Register>{Register::local(3), Register::param(2)}));
}

TEST(FindInvocations, NeverMatchingIsEmpty)
{
    const auto program = program_of(kElidedWriter);
    EXPECT_TRUE(find_invocations(program, [](const MethodSignature &) { return false; }).empty());
}

TEST(ParseProgram, EmptyDirectoryThrows)
{
    const auto dir = std::filesystem::temp_directory_path() / "gattcrypt_empty_dir_test";
    std::filesystem::create_directories(dir);
    EXPECT_THROW(parse_program(dir), EmptyInputError);
    std::filesystem::remove_all(dir);
}

TEST(ParseProgram, DoFinalCallersMatchTextCount)
{
    const auto root = source_dir() / "corpus" / "direct_write_crypto" / "smali";
    std::size_t grep = 0;
    for (const auto &e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.path().extension() != ".smali") continue;
        const auto text = slurp(e.path());
        for (std::size_t at = text.find("->doFinal("); at != std::string::npos; at = text.find("->doFinal(", at + 1))
            ++grep;
    }
    const auto program = parse_program(root);
    const auto it = program.callers_index().find(sig("Ljavax/crypto/Cipher;->doFinal([B)[B"));
    ASSERT_NE(it, program.callers_index().end());
    EXPECT_EQ(it->second.size(), grep);
    EXPECT_EQ(grep, 1u);
}

TEST(ParseProgram, TwoGetterSitesInReadsTwoSources)
{
    const auto program = parse_program(source_dir() / "corpus" / "reads_two_sources" / "smali");
    const auto rules = default_ruleset();
    EXPECT_EQ(find_invocations(program, [&](const auto &s) { return rules.is_read_source(s); }).size(), 2u);
}

TEST(DefUse, MoveResultLinksToInvoke)
{
    const auto program = program_of(R"(.class public LA;
.super Ljava/lang/Object;
.method public static f([B)V
    .locals 6
    invoke-static {v0}, Ljava/util/Arrays;->toString([B)Ljava/lang/String;
    move-result-object v3
    invoke-virtual/range {v0 .. v5}, LA;->g(IIIII)V
    const-wide v0, 0x1
    return-void
.end method
)");
    const auto &m = program.classes().at("LA;").methods.front();
    const auto du = def_use(m);
    EXPECT_EQ(du[0].uses, (std::vector<Register>{Register::local(0)}));
    EXPECT_EQ(du[1].defs, (std::vector<Register>{Register::local(3)}));
    EXPECT_TRUE(du[1].uses.empty());
    EXPECT_EQ(du[1].result_of, 0u);
    ASSERT_EQ(du[2].uses.size(), 6u);
    EXPECT_EQ(du[2].uses.back(), Register::local(5));
    EXPECT_EQ(du[3].defs, (std::vector<Register>{Register::local(0), Register::local(1)}));
}

TEST(DefUse, HighLocalsFoldOntoParams)
{
    const auto program = program_of(R"(.class public LA;
.super Ljava/lang/Object;
.method public f([B)V
    .locals 2
    move-object v0, v3
    return-void
.end method
)");
    const auto &m = program.classes().at("LA;").methods.front();
    EXPECT_EQ(def_use_of(m, 0).uses, (std::vector<Register>{Register::param(1)}));
}

TEST(Parser, UnknownOpcodeDegradesToOpaque)
{
    const auto program = program_of(R"(.class public LA;
.super Ljava/lang/Object;
.method public f()V
    .locals 2
    frobnicate-wide v0, v1
    move-exception v0
    return-void
.end method
)");
    const auto &m = program.classes().at("LA;").methods.front();
    ASSERT_EQ(m.instructions.size(), 3u);
    EXPECT_EQ(m.instructions[0].family, OpFamily::Opaque);
    EXPECT_EQ(m.instructions[2].family, OpFamily::ReturnVoid);
}

// Every parsed instruction of the corpus renders to text that parses back to
// an equal instruction.
TEST(Property, RenderRoundTripOverCorpus)
{
    std::size_t checked = 0;
    for (const auto &e : std::filesystem::directory_iterator(source_dir() / "corpus")) {
        const auto program = parse_program(e.path() / "smali");
        for (const auto &[_, cls] : program.classes()) {
            for (const auto &m : cls.methods) {
                for (const auto &insn : m.instructions) {
                    if (insn.family == OpFamily::Opaque) continue;
                    const auto again = parse_instruction(insn.render(), insn.offset);
                    ASSERT_TRUE(again.has_value()) << insn.render();
                    EXPECT_EQ(*again, insn) << insn.render();
                    ++checked;
                }
            }
        }
    }
    EXPECT_GT(checked, 500u);
}

TEST(Property, RenderRoundTripPerFamily)
{
    const char *lines[] = {
        "nop", "move v0, v1", "move-wide/from16 v0, v2", "move-object/16 v0, v1", "move-result v0",
        "move-result-wide v0", "move-result-object v0", "move-exception v0", "return-void", "return v0",
        "return-wide v0", "return-object v0", "const/4 v0, 0x1", "const/16 v0, -0x10", "const-wide v0, 0x7fffffff",
        "const-string v0, \"a\\\"b\\n\"", "const-class v0, La/B;", "monitor-enter v0", "check-cast v0, [B",
        "instance-of v0, v1, La/B;", "array-length v0, v1", "new-instance v0, La/B;", "new-array v0, v1, [B",
        "filled-new-array {v0, v1}, [I", "fill-array-data v0, :arr", "throw v0", "goto :l", "packed-switch v0, :sw",
        "cmp-long v0, v2, v4", "if-eq v0, v1, :l", "if-nez v0, :l", "aget-object v0, v1, v2", "aput-byte v0, v1, v2",
        "iget-object v0, p0, La/B;->f:[B", "iput v0, p0, La/B;->n:I", "sget-object v0, La/B;->s:[B",
        "sput-wide v0, La/B;->w:J", "invoke-virtual {p0, v1}, La/B;->m([B)V",
        "invoke-static/range {v0 .. v3}, La/B;->r(IIII)V", "invoke-interface {v0}, La/I;->n()[B",
        "neg-int v0, v1", "int-to-byte v0, v1", "add-int v0, v1, v2", "xor-int/2addr v0, v1",
        "add-int/lit8 v0, v1, -0x1", "mul-int/lit16 v0, v1, 0x100"};
    for (const char *text : lines) {
        const auto insn = parse_instruction(text, 0);
        ASSERT_TRUE(insn.has_value()) << text;
        const auto again = parse_instruction(insn->render(), 0);
        ASSERT_TRUE(again.has_value()) << insn->render();
        EXPECT_EQ(*again, *insn) << text << " -> " << insn->render();
    }
}

// Index completeness on randomly sampled methods of the corpus.
TEST(Property, CallersIndexIsComplete)
{
    std::mt19937 rng(20261015);
    std::vector<std::filesystem::path> apps;
    for (const auto &e : std::filesystem::directory_iterator(source_dir() / "corpus")) apps.push_back(e.path());
    std::sort(apps.begin(), apps.end());
    for (int round = 0; round < 40; ++round) {
        const auto program = parse_program(apps[rng() % apps.size()] / "smali");
        std::vector<const SmaliMethod *> methods;
        for (const auto &[_, cls] : program.classes())
            for (const auto &m : cls.methods) methods.push_back(&m);
        const auto *m = methods[rng() % methods.size()];
        for (std::uint32_t i = 0; i < m->instructions.size(); ++i) {
            const auto &insn = m->instructions[i];
            if (insn.is_invoke()) {
                const auto &sites = program.callers_index().at(*insn.method_ref);
                EXPECT_NE(std::find(sites.begin(), sites.end(), CallSite{m, i}), sites.end());
            }
            if (insn.family == OpFamily::InstancePut || insn.family == OpFamily::StaticPut) {
                const auto &sites = program.field_writes_index().at(*insn.field_ref);
                EXPECT_NE(std::find(sites.begin(), sites.end(), CallSite{m, i}), sites.end());
            }
        }
    }
}

TEST(Property, InterfaceImplIndex)
{
    const auto program = parse_program(source_dir() / "corpus" / "iface_sink" / "smali");
    const auto &impls = program.interface_impl_index().at("Lcom/example/iface_sink/DataSink;");
    EXPECT_EQ(impls, (std::vector<std::string>{"Lcom/example/iface_sink/DecryptingSink;"}));
}

TEST(Property, ParsingIsDeterministic)
{
    const auto root = source_dir() / "corpus" / "task_relay" / "smali";
    const auto a = parse_program(root);
    const auto b = parse_program(root);
    ASSERT_EQ(a.classes().size(), b.classes().size());
    for (const auto &[d, cls] : a.classes()) {
        const auto &other = b.classes().at(d);
        ASSERT_EQ(cls.methods.size(), other.methods.size());
        for (std::size_t i = 0; i < cls.methods.size(); ++i)
            EXPECT_EQ(cls.methods[i].instructions, other.methods[i].instructions);
    }
}

TEST(Zip, ArchiveMatchesDirectory)
{
    const auto dir = source_dir() / "tests" / "fixtures" / "zip";
    const auto program = parse_program(dir / "elided_write.zip");
    EXPECT_EQ(program.classes().size(), 1u);
    EXPECT_NE(program.find_class("Lcom/example/elided/Writer;"), nullptr);
}

} // namespace
} // namespace gattcrypt::smali
