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

// Decides whether BLE characteristic data is cryptographically processed.
//
// Writes are traced backward from the value argument of each setValue call;
// reads are traced forward from the result of each getValue call. Three
// passes run in order and the first pass that reaches a javax.crypto or
// java.security invoke determines the confidence:
//
//   High    direct register transfers, immediate invoke results, internal
//           callee/caller hops, fields, intent extras and AsyncTask handoff;
//   Medium  the above widened by sibling invoke arguments (writes), abstract
//           and interface dispatch, and arguments of unresolved calls;
//   Low     any crypto invoke anywhere in a method visited by the first two.

#ifndef GATTCRYPT_TAINT_ENGINE_HPP
#define GATTCRYPT_TAINT_ENGINE_HPP

#include "gattcrypt/ruleset.hpp"
#include "gattcrypt/smali_ir.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gattcrypt::taint {

enum class Direction : std::uint8_t { BackwardFromWrite, ForwardFromRead };
enum class Confidence : std::uint8_t { High, Medium, Low, None };
enum class FrameOrigin : std::uint8_t {
    SeedSite,
    CallerArgument,
    CalleeReturn,
    FieldAssignment,
    IntentExtra,
    ThreadHandoff,
    InterfaceDispatch,
};

std::string_view to_string(Direction d);
std::string_view to_string(Confidence c);
std::string_view to_string(FrameOrigin o);
std::optional<Direction> parse_direction(std::string_view s);
std::optional<Confidence> parse_confidence(std::string_view s);
std::optional<FrameOrigin> parse_origin(std::string_view s);

struct TaintSeed {
    Direction direction = Direction::BackwardFromWrite;
    smali::CallSite site;
    smali::Register seed_register;
};

struct TraceFrame {
    smali::MethodSignature method;
    std::vector<smali::Register> tracked;
    FrameOrigin origin = FrameOrigin::SeedSite;

    bool operator==(const TraceFrame &) const = default;
};

// Memoization key of one traced register. `anchor` is the instruction the
// value is demanded before (backward) or tainted after (forward; -1 for
// method entry); `context` is the call site a callee was entered from, or
// -1 when the frame is not bound to one.
struct VisitKey {
    smali::MethodSignature method;
    smali::Register reg;
    Direction direction = Direction::BackwardFromWrite;
    std::int64_t anchor = -1;
    std::string context;

    auto operator<=>(const VisitKey &) const = default;
};

struct TraceBudget {
    std::uint32_t max_depth = 64;
    std::size_t max_visited = 200'000;
    std::chrono::milliseconds wall_clock{std::chrono::minutes(5)};
};

struct TraceDiagnostics {
    std::uint32_t looper_msgs_seen = 0;
    std::uint32_t unresolved_extras = 0;
    std::uint32_t file_io_seen = 0;

    bool operator==(const TraceDiagnostics &) const = default;
};

struct CryptoCall {
    smali::MethodSignature callee;
    smali::MethodSignature caller;
    std::uint32_t offset = 0;

    bool operator==(const CryptoCall &) const = default;
};

struct TaintVerdict {
    Direction direction = Direction::BackwardFromWrite;
    bool crypto_found = false;
    Confidence confidence = Confidence::None;
    std::vector<TraceFrame> witness;
    std::optional<CryptoCall> crypto_call;
    std::uint32_t seeds_examined = 0;
    bool budget_exhausted = false;
    TraceDiagnostics diagnostics;

    bool operator==(const TaintVerdict &) const = default;
};

enum class TracePass : std::uint8_t { Direct = 1, Associated = 2 };

struct TraceResult {
    Confidence level = Confidence::None;
    std::vector<TraceFrame> witness;
    CryptoCall crypto_call;
};

// Seeds in deterministic (class, method, offset) order. Write seeds take the
// value argument (operand 1, or 0 for a static call); read seeds take the
// register of the move-result that follows the getValue call.
std::vector<TaintSeed> collect_seeds(const smali::SmaliProgram &program, const RuleSet &rules, Direction direction);

// Runs pass 1 over every seed, then pass 2, then the lenient scan over the
// methods both passes visited. Stops at the first crypto hit.
TaintVerdict analyze_app(const smali::SmaliProgram &program, const RuleSet &rules, Direction direction,
                         const TraceBudget &budget = {});

// Single-seed traces: pass 1, then pass 2. Level is High or Medium.
std::optional<TraceResult> backtrace(const TaintSeed &seed, const smali::SmaliProgram &program, const RuleSet &rules,
                                     const TraceBudget &budget = {});
std::optional<TraceResult> forward_trace(const TaintSeed &seed, const smali::SmaliProgram &program,
                                         const RuleSet &rules, const TraceBudget &budget = {});

// Low-confidence witness: the first visited method (signature order) that
// invokes into a crypto prefix.
std::optional<std::vector<TraceFrame>> lenient_scan(const std::set<smali::MethodSignature> &visited_methods,
                                                    const smali::SmaliProgram &program, const RuleSet &rules);

// A point where data leaves one component for another. With `offset` set it
// names an invoke (get*Extra / putExtra / execute) or, forward, a return in
// doInBackground; without it, entry into doInBackground / onPostExecute.
struct HopPoint {
    Direction direction = Direction::BackwardFromWrite;
    const smali::SmaliMethod *method = nullptr;
    std::optional<std::uint32_t> offset;
};

struct HopTarget {
    TraceFrame frame;
    const smali::SmaliMethod *method = nullptr;
    // Backward: the value is demanded before this instruction. Forward: the
    // registers are tainted after it; nullopt means at method entry.
    std::optional<std::uint32_t> anchor;
};

// Links intent extras by constant key and AsyncTask execute/doInBackground/
// onPostExecute pairs. Unresolvable keys yield nothing and bump
// diagnostics->unresolved_extras.
std::vector<HopTarget> cross_component_hop(const HopPoint &point, const smali::SmaliProgram &program,
                                           TraceDiagnostics *diagnostics = nullptr);

// Constant string held by `reg` just before `offset`, when a single
// const-string (through moves) defines it.
std::optional<std::string> resolve_string_constant(const smali::SmaliMethod &method, smali::Register reg,
                                                   std::uint32_t offset);

} // namespace gattcrypt::taint

#endif // GATTCRYPT_TAINT_ENGINE_HPP
