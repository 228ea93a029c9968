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

#ifndef GATTCRYPT_SERIALIZE_HPP
#define GATTCRYPT_SERIALIZE_HPP

#include "gattcrypt/corpus_bench.hpp"
#include "gattcrypt/misuse_lints.hpp"
#include "gattcrypt/report_agg.hpp"
#include "gattcrypt/taint_engine.hpp"

#include <json.hpp>

#include <stdexcept>

namespace gattcrypt::io {

// Malformed machine-readable input (a results line, a duration, a manifest).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::ordered_json to_json(const taint::TaintVerdict &v);
taint::TaintVerdict verdict_from_json(const nlohmann::json &j);

nlohmann::ordered_json to_json(const lints::MisuseFinding &f);
nlohmann::ordered_json to_json(const bench::Ratios &r);
nlohmann::ordered_json to_json(const bench::ConfusionCounts &c);
nlohmann::ordered_json to_json(const report::AggregateReport &r);

// "300ms", "30s", "5m", "1h"; a bare number is seconds.
std::chrono::milliseconds parse_duration(std::string_view text);

struct Manifest {
    std::string package;
    std::vector<std::string> permissions;
};

// Reads the package attribute and uses-permission names of a text
// AndroidManifest.xml.
Manifest parse_manifest(std::string_view xml);

} // namespace gattcrypt::io

#endif // GATTCRYPT_SERIALIZE_HPP
