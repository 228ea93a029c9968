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

#include "gattcrypt/taint_engine.hpp"
#include "taint/tracer.hpp"

#include <array>

namespace gattcrypt::taint {

using smali::OpFamily;
using smali::Register;

namespace {

constexpr std::array kOrigins{
    std::pair{FrameOrigin::SeedSite, std::string_view("SeedSite")},
    std::pair{FrameOrigin::CallerArgument, std::string_view("CallerArgument")},
    std::pair{FrameOrigin::CalleeReturn, std::string_view("CalleeReturn")},
    std::pair{FrameOrigin::FieldAssignment, std::string_view("FieldAssignment")},
    std::pair{FrameOrigin::IntentExtra, std::string_view("IntentExtra")},
    std::pair{FrameOrigin::ThreadHandoff, std::string_view("ThreadHandoff")},
    std::pair{FrameOrigin::InterfaceDispatch, std::string_view("InterfaceDispatch")},
};

constexpr std::array kConfidences{
    std::pair{Confidence::High, std::string_view("High")},
    std::pair{Confidence::Medium, std::string_view("Medium")},
    std::pair{Confidence::Low, std::string_view("Low")},
    std::pair{Confidence::None, std::string_view("None")},
};

struct LenientHit {
    std::vector<TraceFrame> witness;
    CryptoCall call;
};

std::optional<LenientHit> lenient(const std::map<smali::MethodSignature, FrameOrigin> &visited,
                                  const smali::SmaliProgram &program, const RuleSet &rules)
{
    for (const auto &[sig, origin] : visited) {
        const auto *m = program.find_method(sig);
        if (!m) continue;
        for (std::uint32_t i = 0; i < m->instructions.size(); ++i) {
            const auto &insn = m->instructions[i];
            if (!insn.is_invoke() || !insn.method_ref || !rules.is_crypto(*insn.method_ref)) continue;
            TraceFrame f{sig, invoke_args(*m, i), origin};
            return LenientHit{{std::move(f)}, CryptoCall{*insn.method_ref, sig, i}};
        }
    }
    return std::nullopt;
}

bool is_looper_call(const smali::MethodSignature &s)
{
    const auto &c = s.class_descriptor;
    if (c == "Landroid/os/Handler;") return s.name.rfind("sendMessage", 0) == 0 || s.name.rfind("post", 0) == 0;
    if (c == "Landroid/os/Messenger;") return s.name == "send";
    return c == "Landroid/os/Looper;";
}

bool is_file_io_call(const smali::MethodSignature &s)
{
    const auto &c = s.class_descriptor;
    return c.rfind("Ljava/io/File", 0) == 0 || c.rfind("Landroid/content/SharedPreferences", 0) == 0 ||
           (c == "Landroid/content/Context;" && (s.name == "openFileOutput" || s.name == "openFileInput"));
}

TraceDiagnostics count_diagnostics(const TraceShared &shared, const smali::SmaliProgram &program)
{
    TraceDiagnostics d;
    for (const auto &[sig, _] : shared.visited_methods) {
        const auto *m = program.find_method(sig);
        if (!m) continue;
        for (const auto &insn : m->instructions) {
            if (!insn.is_invoke() || !insn.method_ref) continue;
            if (is_looper_call(*insn.method_ref)) ++d.looper_msgs_seen;
            if (is_file_io_call(*insn.method_ref)) ++d.file_io_seen;
        }
    }
    d.unresolved_extras = static_cast<std::uint32_t>(shared.unresolved_extras.size());
    return d;
}

std::optional<TraceResult> trace_single(const TaintSeed &seed, const smali::SmaliProgram &program,
                                        const RuleSet &rules, const TraceBudget &budget)
{
    AnalysisContext ctx(program, rules);
    TraceShared shared{ctx, budget, std::chrono::steady_clock::now() + budget.wall_clock, {}, {}};
    for (auto pass : {TracePass::Direct, TracePass::Associated}) {
        auto out = run_trace(seed, pass, shared);
        if (out.hit) return out.hit;
        if (out.timed_out) break;
    }
    return std::nullopt;
}

} // namespace

std::string_view to_string(Direction d) { return d == Direction::BackwardFromWrite ? "writes" : "reads"; }

std::string_view to_string(Confidence c)
{
    for (const auto &[v, s] : kConfidences) {
        if (v == c) return s;
    }
    return "None";
}

std::string_view to_string(FrameOrigin o)
{
    for (const auto &[v, s] : kOrigins) {
        if (v == o) return s;
    }
    return "SeedSite";
}

std::optional<Direction> parse_direction(std::string_view s)
{
    if (s == "writes" || s == "write" || s == "BackwardFromWrite") return Direction::BackwardFromWrite;
    if (s == "reads" || s == "read" || s == "ForwardFromRead") return Direction::ForwardFromRead;
    return std::nullopt;
}

std::optional<Confidence> parse_confidence(std::string_view s)
{
    for (const auto &[v, name] : kConfidences) {
        if (name == s) return v;
    }
    return std::nullopt;
}

std::optional<FrameOrigin> parse_origin(std::string_view s)
{
    for (const auto &[v, name] : kOrigins) {
        if (name == s) return v;
    }
    return std::nullopt;
}

std::vector<TaintSeed> collect_seeds(const smali::SmaliProgram &program, const RuleSet &rules, Direction direction)
{
    std::vector<TaintSeed> seeds;
    if (direction == Direction::BackwardFromWrite) {
        for (const auto &site : find_invocations(program, [&](const auto &s) { return rules.is_write_sink(s); })) {
            const auto &insn = site.instruction();
            const std::size_t pos = insn.is_static_invoke() ? 0 : 1;
            if (insn.operands.size() <= pos) continue;
            seeds.push_back(TaintSeed{direction, site, site.method->canonical(insn.operands[pos])});
        }
    } else {
        for (const auto &site : find_invocations(program, [&](const auto &s) { return rules.is_read_source(s); })) {
            const auto next = site.offset + 1;
            if (next >= site.method->instructions.size()) continue;
            const auto &mr = site.method->instructions[next];
            if (mr.family != OpFamily::MoveResult || mr.operands.empty()) continue;
            seeds.push_back(TaintSeed{direction, site, site.method->canonical(mr.operands.front())});
        }
    }
    return seeds;
}

TaintVerdict analyze_app(const smali::SmaliProgram &program, const RuleSet &rules, Direction direction,
                         const TraceBudget &budget)
{
    TaintVerdict v;
    v.direction = direction;
    const auto seeds = collect_seeds(program, rules, direction);
    v.seeds_examined = static_cast<std::uint32_t>(seeds.size());

    AnalysisContext ctx(program, rules);
    TraceShared shared{ctx, budget, std::chrono::steady_clock::now() + budget.wall_clock, {}, {}};
    bool timed_out = false;
    for (auto pass : {TracePass::Direct, TracePass::Associated}) {
        for (const auto &seed : seeds) {
            auto out = run_trace(seed, pass, shared);
            v.budget_exhausted = v.budget_exhausted || out.exhausted;
            if (out.hit) {
                v.crypto_found = true;
                v.confidence = out.hit->level;
                v.witness = std::move(out.hit->witness);
                v.crypto_call = out.hit->crypto_call;
                break;
            }
            if (out.timed_out) {
                timed_out = true;
                v.budget_exhausted = true;
                break;
            }
        }
        if (v.crypto_found || timed_out) break;
    }
    if (!v.crypto_found && !timed_out) {
        if (auto low = lenient(shared.visited_methods, program, rules)) {
            v.crypto_found = true;
            v.confidence = Confidence::Low;
            v.witness = std::move(low->witness);
            v.crypto_call = low->call;
        }
    }
    v.diagnostics = count_diagnostics(shared, program);
    return v;
}

std::optional<TraceResult> backtrace(const TaintSeed &seed, const smali::SmaliProgram &program, const RuleSet &rules,
                                     const TraceBudget &budget)
{
    TaintSeed s = seed;
    s.direction = Direction::BackwardFromWrite;
    return trace_single(s, program, rules, budget);
}

std::optional<TraceResult> forward_trace(const TaintSeed &seed, const smali::SmaliProgram &program,
                                         const RuleSet &rules, const TraceBudget &budget)
{
    TaintSeed s = seed;
    s.direction = Direction::ForwardFromRead;
    return trace_single(s, program, rules, budget);
}

std::optional<std::vector<TraceFrame>> lenient_scan(const std::set<smali::MethodSignature> &visited_methods,
                                                    const smali::SmaliProgram &program, const RuleSet &rules)
{
    std::map<smali::MethodSignature, FrameOrigin> visited;
    for (const auto &s : visited_methods) visited.emplace(s, FrameOrigin::SeedSite);
    if (auto hit = lenient(visited, program, rules)) return hit->witness;
    return std::nullopt;
}

} // namespace gattcrypt::taint
