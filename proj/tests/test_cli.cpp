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

#include "gattcrypt/cli.hpp"
#include "gattcrypt/serialize.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gattcrypt::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
    int status;
    std::string out, err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "gattcrypt");
    std::vector<const char *> argv;
    for (const auto &a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string &text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

fs::path scratch(const std::string &name)
{
    const auto p = fs::temp_directory_path() / ("gattcrypt_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::string kCorpus = (testing::source_dir() / "corpus").string();

TEST(Cli, AnalyzeOneAppBothDirections)
{
    const auto r = run({"analyze", "--app", kCorpus + "/intent_relay", "--direction", "both"});
    ASSERT_EQ(r.status, kOk) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    const auto reads = nlohmann::json::parse(ls[0]), writes = nlohmann::json::parse(ls[1]);
    EXPECT_EQ(reads["direction"], "reads");
    EXPECT_EQ(writes["verdict"]["confidence"], "High");
    EXPECT_EQ(writes["package"], "com.example.intent_relay");
}

TEST(Cli, ParallelAndSerialCorpusRunsAgree)
{
    const auto one = run({"analyze", "--corpus", kCorpus, "--jobs", "1"});
    const auto eight = run({"analyze", "--corpus", kCorpus, "--jobs", "8"});
    ASSERT_EQ(one.status, kOk) << one.err;
    ASSERT_EQ(eight.status, kOk) << eight.err;
    auto a = lines(one.out), b = lines(eight.out);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a.size(), 108u);
    EXPECT_EQ(a, b);
}

TEST(Cli, RerunsAreByteIdenticalAndTimingsSeparate)
{
    const auto dir = scratch("rerun");
    for (const char *name : {"a.jsonl", "b.jsonl"})
        ASSERT_EQ(run({"analyze", "--corpus", kCorpus, "--out", (dir / name).string()}).status, kOk);
    EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
    EXPECT_EQ(slurp(dir / "a.jsonl").find("seconds"), std::string::npos);
    const auto info = nlohmann::json::parse(slurp(dir / "a.jsonl.runinfo.json"));
    EXPECT_EQ(info["apps"].size(), 54u);
    EXPECT_TRUE(info.contains("finished_at"));
}

TEST(Cli, VerdictJsonRoundTrips)
{
    for (const auto &l : lines(run({"analyze", "--corpus", kCorpus}).out)) {
        const auto j = nlohmann::json::parse(l);
        const auto v = io::verdict_from_json(j["verdict"]);
        EXPECT_EQ(nlohmann::json(io::to_json(v)), j["verdict"]) << l;
    }
}

TEST(Cli, TimeoutKeepsTheRow)
{
    const auto r = run({"analyze", "--app", kCorpus + "/intent_relay", "--timeout", "0ms"});
    ASSERT_EQ(r.status, kOk) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_TRUE(nlohmann::json::parse(ls[1])["verdict"]["budget_exhausted"].get<bool>());
}

TEST(Cli, BenchPassesOnBundledCorpus)
{
    const auto r = run({"bench", "--corpus", kCorpus});
    EXPECT_EQ(r.status, kOk) << r.err;
    EXPECT_EQ(lines(r.out).size(), 54u);
    EXPECT_NE(r.err.find("matched 54/54"), std::string::npos);
}

TEST(Cli, BenchFailsOnMislabeledCase)
{
    const auto dir = scratch("bench");
    fs::copy(kCorpus + "/intent_relay", dir / "intent_relay", fs::copy_options::recursive);
    auto label = slurp(dir / "intent_relay" / "label.yaml");
    const auto pos = label.find("expected_confidence: High");
    ASSERT_NE(pos, std::string::npos);
    label.replace(pos, 25, "expected_confidence: Medium");
    std::ofstream(dir / "intent_relay" / "label.yaml") << label;
    EXPECT_EQ(run({"bench", "--corpus", dir.string()}).status, kBenchMismatch);
}

TEST(Cli, AggregateFromAnalyzeOutput)
{
    const auto dir = scratch("aggregate");
    ASSERT_EQ(run({"analyze", "--corpus", kCorpus, "--out", (dir / "r.jsonl").string()}).status, kOk);
    std::ofstream(dir / "meta.csv") << "package,category,downloads,year\n"
                                       "com.example.intent_relay,Health,100,2016\n"
                                       "com.example.no_crypto_const_write,Tools,5,2017\n"
                                       "broken row\n";
    const auto r = run({"aggregate", "--results", (dir / "r.jsonl").string(), "--meta", (dir / "meta.csv").string(),
                        "--policy", "strict"});
    ASSERT_EQ(r.status, kOk) << r.err;
    EXPECT_NE(r.err.find("meta.csv:4"), std::string::npos);
    const auto j = nlohmann::json::parse(r.out.substr(0, r.out.find("\n}\n") + 2));
    EXPECT_EQ(j["policy"], "strict");
    EXPECT_EQ(j["totals"]["n_apps"], 54);
    EXPECT_EQ(j["per_category"]["Health"]["pct_crypto_high"], 100.0);
    EXPECT_EQ(j["totals"]["downloads_no_crypto_either"], 5);
}

TEST(Cli, LintReportsFindings)
{
    const auto r = run({"lint", "--app", (testing::source_dir() / "tests/fixtures/lints/ecb").string(), "--direction",
                        "writes"});
    ASSERT_EQ(r.status, kOk) << r.err;
    const auto j = nlohmann::json::parse(lines(r.out).at(0));
    ASSERT_EQ(j["findings"].size(), 1u);
    EXPECT_EQ(j["findings"][0]["kind"], "BadCipherMode");
}

TEST(Cli, InputErrorsExitOne)
{
    EXPECT_EQ(run({}).status, kInputError);
    EXPECT_EQ(run({"frob"}).status, kInputError);
    EXPECT_EQ(run({"analyze"}).status, kInputError);
    EXPECT_EQ(run({"analyze", "--app", "/no/such/app"}).status, kInputError);
    EXPECT_EQ(run({"analyze", "--corpus", kCorpus, "--timeout", "soon"}).status, kInputError);
    EXPECT_EQ(run({"analyze", "--corpus", kCorpus, "--jobs", "0"}).status, kInputError);
    EXPECT_EQ(run({"analyze", "--corpus", kCorpus, "--ruleset", "/no/rules.yaml"}).status, kInputError);
    EXPECT_EQ(run({"aggregate", "--results", "/no/results.jsonl"}).status, kInputError);
    const auto dir = scratch("badresults");
    std::ofstream(dir / "r.jsonl") << "{\"app_id\": 3}\n";
    EXPECT_EQ(run({"aggregate", "--results", (dir / "r.jsonl").string()}).status, kInputError);
    const auto usage = run({"frob"});
    EXPECT_NE(usage.err.find("Usage"), std::string::npos);
}

TEST(Serialize, Durations)
{
    using namespace std::chrono;
    EXPECT_EQ(io::parse_duration("5m"), minutes(5));
    EXPECT_EQ(io::parse_duration("30s"), seconds(30));
    EXPECT_EQ(io::parse_duration("250ms"), milliseconds(250));
    EXPECT_EQ(io::parse_duration("2h"), hours(2));
    EXPECT_EQ(io::parse_duration("7"), seconds(7));
    EXPECT_THROW(io::parse_duration("m"), io::InputError);
    EXPECT_THROW(io::parse_duration("5d"), io::InputError);
}

TEST(Serialize, Manifest)
{
    const auto m = io::parse_manifest(
        "<manifest xmlns:android=\"x\" package=\"com.a.b\">\n"
        "<uses-permission android:name=\"android.permission.BLUETOOTH\"/>\n"
        "<uses-permission android:name=\"android.permission.INTERNET\" />\n</manifest>");
    EXPECT_EQ(m.package, "com.a.b");
    EXPECT_EQ(m.permissions, (std::vector<std::string>{"android.permission.BLUETOOTH", "android.permission.INTERNET"}));
    EXPECT_THROW(io::parse_manifest("<manifest/>"), io::InputError);
}

TEST(Serialize, RejectsInconsistentVerdict)
{
    taint::TaintVerdict v;
    auto j = nlohmann::json(io::to_json(v));
    j["crypto_found"] = true;
    EXPECT_THROW(io::verdict_from_json(j), io::InputError);
    j.erase("crypto_found");
    EXPECT_THROW(io::verdict_from_json(j), io::InputError);
}

} // namespace
} // namespace gattcrypt::cli
