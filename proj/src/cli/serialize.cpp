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

#include "gattcrypt/serialize.hpp"

#include <charconv>
#include <regex>

namespace gattcrypt::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T> T get(const json &j, const char *key)
{
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &) {
        throw InputError(std::string("bad field '") + key + "'");
    }
}

smali::MethodSignature signature(const std::string &text)
{
    auto s = smali::MethodSignature::parse(text);
    if (!s) throw InputError("bad method signature '" + text + "'");
    return *s;
}

ordered_json pct(const std::optional<double> &v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

} // namespace

ordered_json to_json(const taint::TaintVerdict &v)
{
    ordered_json j;
    j["direction"] = taint::to_string(v.direction);
    j["crypto_found"] = v.crypto_found;
    j["confidence"] = taint::to_string(v.confidence);
    j["budget_exhausted"] = v.budget_exhausted;
    j["seeds_examined"] = v.seeds_examined;
    ordered_json w = ordered_json::array();
    for (const auto &f : v.witness) {
        ordered_json regs = ordered_json::array();
        for (const auto &r : f.tracked) regs.push_back(r.to_string());
        w.push_back({{"method", f.method.to_string()}, {"tracked", regs}, {"origin", taint::to_string(f.origin)}});
    }
    j["witness"] = w;
    if (v.crypto_call)
        j["crypto_call"] = {{"callee", v.crypto_call->callee.to_string()},
                            {"caller", v.crypto_call->caller.to_string()},
                            {"offset", v.crypto_call->offset}};
    else
        j["crypto_call"] = nullptr;
    j["diagnostics"] = {{"looper_msgs_seen", v.diagnostics.looper_msgs_seen},
                        {"unresolved_extras", v.diagnostics.unresolved_extras},
                        {"file_io_seen", v.diagnostics.file_io_seen}};
    return j;
}

taint::TaintVerdict verdict_from_json(const json &j)
{
    taint::TaintVerdict v;
    const auto dir = taint::parse_direction(get<std::string>(j, "direction"));
    if (!dir) throw InputError("bad direction");
    v.direction = *dir;
    v.crypto_found = get<bool>(j, "crypto_found");
    const auto conf = taint::parse_confidence(get<std::string>(j, "confidence"));
    if (!conf) throw InputError("bad confidence");
    v.confidence = *conf;
    if (v.crypto_found == (v.confidence == taint::Confidence::None))
        throw InputError("crypto_found disagrees with confidence");
    v.budget_exhausted = get<bool>(j, "budget_exhausted");
    v.seeds_examined = get<std::uint32_t>(j, "seeds_examined");
    for (const auto &f : get<json>(j, "witness")) {
        taint::TraceFrame frame;
        frame.method = signature(get<std::string>(f, "method"));
        for (const auto &r : get<std::vector<std::string>>(f, "tracked")) {
            const auto reg = smali::Register::parse(r);
            if (!reg) throw InputError("bad register '" + r + "'");
            frame.tracked.push_back(*reg);
        }
        const auto origin = taint::parse_origin(get<std::string>(f, "origin"));
        if (!origin) throw InputError("bad frame origin");
        frame.origin = *origin;
        v.witness.push_back(std::move(frame));
    }
    if (const auto c = get<json>(j, "crypto_call"); !c.is_null())
        v.crypto_call = taint::CryptoCall{signature(get<std::string>(c, "callee")),
                                          signature(get<std::string>(c, "caller")), get<std::uint32_t>(c, "offset")};
    const auto d = get<json>(j, "diagnostics");
    v.diagnostics = {get<std::uint32_t>(d, "looper_msgs_seen"), get<std::uint32_t>(d, "unresolved_extras"),
                     get<std::uint32_t>(d, "file_io_seen")};
    return v;
}

ordered_json to_json(const lints::MisuseFinding &f)
{
    return {{"kind", lints::to_string(f.kind)},
            {"method", f.method.to_string()},
            {"offset", f.offset},
            {"detail", f.detail}};
}

ordered_json to_json(const bench::Ratios &r)
{
    return {{"precision", pct(r.precision)},
            {"recall", pct(r.recall)},
            {"f_measure", pct(r.f_measure)},
            {"fpr", pct(r.fpr)}};
}

ordered_json to_json(const bench::ConfusionCounts &c)
{
    return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

ordered_json to_json(const report::AggregateReport &r)
{
    ordered_json j;
    j["policy"] = report::to_string(r.policy);
    ordered_json cats = ordered_json::object();
    for (const auto &[c, s] : r.per_category)
        cats[c] = {{"n_apps", s.n_apps}, {"pct_crypto_high", pct(s.pct_crypto_high)}, {"pct_none", pct(s.pct_none)}};
    j["per_category"] = cats;
    ordered_json years = ordered_json::object();
    for (const auto &[y, s] : r.per_year)
        years[std::to_string(y)] = {{"n_apps", s.n_apps}, {"pct_no_crypto_either", pct(s.pct_no_crypto_either)}};
    j["per_year"] = years;
    j["totals"] = {{"n_apps", r.totals.n_apps},
                   {"pct_no_crypto_reads", pct(r.totals.pct_no_crypto_reads)},
                   {"pct_no_crypto_writes", pct(r.totals.pct_no_crypto_writes)},
                   {"pct_no_crypto_either", pct(r.totals.pct_no_crypto_either)},
                   {"downloads_no_crypto_either", r.totals.downloads_no_crypto_either}};
    j["library_split"] = {{"library_only", r.library_split.library_only},
                          {"app_only", r.library_split.app_only},
                          {"both", r.library_split.both},
                          {"unknown", r.library_split.unknown}};
    j["skipped"] = r.skipped;
    return j;
}

std::chrono::milliseconds parse_duration(std::string_view text)
{
    std::uint64_t n = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc{} || p == text.data()) throw InputError("bad duration '" + std::string(text) + "'");
    const std::string_view unit(p, text.data() + text.size() - p);
    using namespace std::chrono;
    if (unit == "ms") return milliseconds(n);
    if (unit.empty() || unit == "s") return seconds(n);
    if (unit == "m") return minutes(n);
    if (unit == "h") return hours(n);
    throw InputError("bad duration unit '" + std::string(unit) + "'");
}

Manifest parse_manifest(std::string_view xml)
{
    static const std::regex manifest_tag(R"re(<manifest\b[^>]*\bpackage\s*=\s*"([^"]*)")re");
    static const std::regex permission_tag(R"re(<uses-permission\b[^>]*\bandroid:name\s*=\s*"([^"]*)")re");
    Manifest m;
    const std::string text(xml);
    std::smatch match;
    if (!std::regex_search(text, match, manifest_tag)) throw InputError("manifest has no package attribute");
    m.package = match[1];
    for (std::sregex_iterator it(text.begin(), text.end(), permission_tag), end; it != end; ++it)
        m.permissions.push_back((*it)[1]);
    return m;
}

} // namespace gattcrypt::io
