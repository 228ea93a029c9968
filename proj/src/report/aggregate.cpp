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

#include "gattcrypt/report_agg.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

namespace gattcrypt::report {

namespace {

constexpr std::pair<CallOrigin, std::string_view> kOrigins[] = {
    {CallOrigin::LibraryOnly, "LibraryOnly"},
    {CallOrigin::AppOnly, "AppOnly"},
    {CallOrigin::Both, "Both"},
    {CallOrigin::Unknown, "Unknown"},
};

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

enum class Status { Crypto, NoCrypto, Excluded };

Status direction_status(const taint::TaintVerdict &v, AggregatePolicy policy)
{
    if (policy == AggregatePolicy::Strict) return v.crypto_found ? Status::Crypto : Status::NoCrypto;
    if (v.crypto_found) return v.confidence == taint::Confidence::High ? Status::Crypto : Status::Excluded;
    return v.budget_exhausted ? Status::Excluded : Status::NoCrypto;
}

bool any_high(const AppRecord &r)
{
    for (const auto *v : {&r.read_verdict, &r.write_verdict})
        if (*v && (*v)->crypto_found && (*v)->confidence == taint::Confidence::High) return true;
    return false;
}

// Crypto if either direction is; no-crypto only if every present direction is.
Status app_status(const AppRecord &r, AggregatePolicy policy)
{
    bool all_none = true;
    for (const auto *v : {&r.read_verdict, &r.write_verdict}) {
        if (!*v) continue;
        const auto s = direction_status(**v, policy);
        if (s == Status::Crypto) return Status::Crypto;
        if (s == Status::Excluded) all_none = false;
    }
    return all_none ? Status::NoCrypto : Status::Excluded;
}

std::optional<double> pct(std::uint32_t num, std::uint32_t den)
{
    if (den == 0) return std::nullopt;
    return 100.0 * num / den;
}

struct Tally {
    std::uint32_t n = 0, counted = 0, none = 0, high = 0;
};

} // namespace

std::string_view to_string(CallOrigin o)
{
    for (const auto &[v, s] : kOrigins)
        if (v == o) return s;
    return "Unknown";
}

std::optional<CallOrigin> parse_call_origin(std::string_view s)
{
    for (const auto &[v, name] : kOrigins)
        if (name == s) return v;
    return std::nullopt;
}

std::string_view to_string(AggregatePolicy p) { return p == AggregatePolicy::Strict ? "strict" : "headline"; }

std::optional<AggregatePolicy> parse_policy(std::string_view s)
{
    if (s == "strict") return AggregatePolicy::Strict;
    if (s == "headline") return AggregatePolicy::Headline;
    return std::nullopt;
}

CallOrigin classify_ble_call_origin(const smali::SmaliProgram &program, const RuleSet &rules,
                                    std::string_view package_name)
{
    const auto pkg = split(package_name, '.');
    if (pkg.size() < 2 || pkg[0].empty() || pkg[1].empty()) return CallOrigin::Unknown;
    const auto sites = find_invocations(
        program, [&](const auto &s) { return rules.is_read_source(s) || rules.is_write_sink(s); });
    if (sites.empty()) return CallOrigin::Unknown;
    bool app = false, lib = false;
    for (const auto &site : sites) {
        std::string_view cls = site.method->signature.class_descriptor;
        if (cls.size() < 3 || cls.front() != 'L' || cls.back() != ';') return CallOrigin::Unknown;
        const auto parts = split(cls.substr(1, cls.size() - 2), '/');
        if (parts.size() < 3) return CallOrigin::Unknown;
        (parts[0] == pkg[0] && parts[1] == pkg[1] ? app : lib) = true;
    }
    if (app && lib) return CallOrigin::Both;
    return app ? CallOrigin::AppOnly : CallOrigin::LibraryOnly;
}

AggregateReport aggregate(const std::vector<AppRecord> &records, AggregatePolicy policy)
{
    AggregateReport rep;
    rep.policy = policy;
    std::map<std::string, Tally> cats;
    std::map<int, Tally> years;
    Tally either, reads, writes;
    for (const auto &r : records) {
        if (!r.read_verdict && !r.write_verdict) {
            ++rep.skipped;
            continue;
        }
        ++rep.totals.n_apps;
        switch (r.ble_origin) {
        case CallOrigin::LibraryOnly: ++rep.library_split.library_only; break;
        case CallOrigin::AppOnly: ++rep.library_split.app_only; break;
        case CallOrigin::Both: ++rep.library_split.both; break;
        case CallOrigin::Unknown: ++rep.library_split.unknown; break;
        }
        for (auto [v, t] : {std::pair{&r.read_verdict, &reads}, std::pair{&r.write_verdict, &writes}}) {
            if (!*v) continue;
            const auto s = direction_status(**v, policy);
            if (s == Status::Excluded) continue;
            ++t->counted;
            if (s == Status::NoCrypto) ++t->none;
        }
        const auto s = app_status(r, policy);
        const bool high = any_high(r);
        auto add = [&](Tally &t) {
            ++t.n;
            if (s != Status::Excluded) ++t.counted;
            if (s == Status::NoCrypto) ++t.none;
            if (s != Status::Excluded && high) ++t.high;
        };
        add(either);
        if (s == Status::NoCrypto && r.downloads) rep.totals.downloads_no_crypto_either += *r.downloads;
        if (r.category) add(cats[*r.category]);
        if (r.year) add(years[*r.year]);
    }
    rep.totals.pct_no_crypto_reads = pct(reads.none, reads.counted);
    rep.totals.pct_no_crypto_writes = pct(writes.none, writes.counted);
    rep.totals.pct_no_crypto_either = pct(either.none, either.counted);
    for (const auto &[c, t] : cats) rep.per_category[c] = {t.n, pct(t.high, t.counted), pct(t.none, t.counted)};
    for (const auto &[y, t] : years) rep.per_year[y] = {t.n, pct(t.none, t.counted)};
    return rep;
}

MetadataTable parse_metadata(std::string_view text)
{
    MetadataTable table;
    std::vector<std::string_view> lines = split(text, '\n');
    std::uint32_t header_line = 0;
    while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
    if (header_line == lines.size()) {
        table.errors.push_back({0, "missing header"});
        return table;
    }
    const std::string_view header = lines[header_line];
    const char sep = header.find('\t') != std::string_view::npos ? '\t' : ',';
    std::map<std::string, std::size_t> col;
    const auto names = split(header, sep);
    for (std::size_t i = 0; i < names.size(); ++i) col.emplace(std::string(trim(names[i])), i);
    for (const char *need : {"package", "category", "downloads", "year"}) {
        if (!col.count(need)) {
            table.errors.push_back({header_line + 1, std::string("header lacks column ") + need});
            return table;
        }
    }
    for (std::uint32_t i = header_line + 1; i < lines.size(); ++i) {
        const std::uint32_t lineno = i + 1;
        if (trim(lines[i]).empty()) continue;
        const auto cells = split(lines[i], sep);
        if (cells.size() != names.size()) {
            table.errors.push_back({lineno, "expected " + std::to_string(names.size()) + " fields, got " +
                                                std::to_string(cells.size())});
            continue;
        }
        auto cell = [&](const char *name) { return trim(cells[col.at(name)]); };
        const std::string package(cell("package"));
        if (package.empty()) {
            table.errors.push_back({lineno, "empty package"});
            continue;
        }
        AppMetadata m;
        if (!cell("category").empty()) m.category = std::string(cell("category"));
        bool ok = true;
        if (const auto d = cell("downloads"); !d.empty()) {
            std::uint64_t v = 0;
            const auto [p, ec] = std::from_chars(d.data(), d.data() + d.size(), v);
            if (ec != std::errc{} || p != d.data() + d.size()) {
                table.errors.push_back({lineno, "bad downloads '" + std::string(d) + "'"});
                ok = false;
            }
            m.downloads = v;
        }
        if (const auto y = cell("year"); ok && !y.empty()) {
            int v = 0;
            const auto [p, ec] = std::from_chars(y.data(), y.data() + y.size(), v);
            if (ec != std::errc{} || p != y.data() + y.size()) {
                table.errors.push_back({lineno, "bad year '" + std::string(y) + "'"});
                ok = false;
            }
            m.year = v;
        }
        if (!ok) continue;
        if (!table.by_package.emplace(package, std::move(m)).second)
            table.errors.push_back({lineno, "duplicate package " + package});
    }
    return table;
}

void join_metadata(std::vector<AppRecord> &records, const MetadataTable &table)
{
    for (auto &r : records) {
        const auto it = table.by_package.find(r.package_name);
        if (it == table.by_package.end()) continue;
        r.category = it->second.category;
        r.downloads = it->second.downloads;
        r.year = it->second.year;
    }
}

std::string render_aggregate(const AggregateReport &report)
{
    auto fmt = [](const std::optional<double> &v) {
        if (!v) return std::string("-");
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.1f%%", *v);
        return std::string(buf);
    };
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-28s %8s %10s %10s\n", "Category", "APKs", "High", "None");
    out << line;
    for (const auto &[c, s] : report.per_category) {
        std::snprintf(line, sizeof line, "%-28s %8u %10s %10s\n", c.c_str(), s.n_apps, fmt(s.pct_crypto_high).c_str(),
                      fmt(s.pct_none).c_str());
        out << line;
    }
    out << "\nYear   APKs  no crypto\n";
    for (const auto &[y, s] : report.per_year) {
        std::snprintf(line, sizeof line, "%-6d %5u %10s\n", y, s.n_apps, fmt(s.pct_no_crypto_either).c_str());
        out << line;
    }
    const auto &t = report.totals;
    out << "\npolicy " << to_string(report.policy) << ", " << t.n_apps << " apps (" << report.skipped
        << " without verdicts)\n";
    out << "no crypto: reads " << fmt(t.pct_no_crypto_reads) << ", writes " << fmt(t.pct_no_crypto_writes)
        << ", either " << fmt(t.pct_no_crypto_either) << "\n";
    out << "downloads of apps without crypto: " << t.downloads_no_crypto_either << "\n";
    const auto &l = report.library_split;
    out << "BLE calls: library only " << l.library_only << ", app only " << l.app_only << ", both " << l.both
        << ", unknown " << l.unknown << "\n";
    return out.str();
}

} // namespace gattcrypt::report
