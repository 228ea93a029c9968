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

#ifndef GATTCRYPT_SRC_TAINT_TRACER_HPP
#define GATTCRYPT_SRC_TAINT_TRACER_HPP

#include "gattcrypt/taint_engine.hpp"
#include "taint/context.hpp"

#include <chrono>
#include <map>
#include <set>
#include <utility>

namespace gattcrypt::taint {

struct TraceShared {
    AnalysisContext &ctx;
    TraceBudget budget;
    std::chrono::steady_clock::time_point deadline;
    // First origin each method was reached by, over every trace run so far.
    std::map<smali::MethodSignature, FrameOrigin> visited_methods;
    // Intent extra sites whose key did not resolve to a constant.
    std::set<std::pair<std::string, std::uint32_t>> unresolved_extras;
};

struct TraceOutcome {
    std::optional<TraceResult> hit;
    bool exhausted = false;
    bool timed_out = false;
};

// One pass of one seed. Level of a hit is High for pass 1, Medium for pass 2.
TraceOutcome run_trace(const TaintSeed &seed, TracePass pass, TraceShared &shared);

} // namespace gattcrypt::taint

#endif // GATTCRYPT_SRC_TAINT_TRACER_HPP
