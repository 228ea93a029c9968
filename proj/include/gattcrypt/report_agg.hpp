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

#ifndef GATTCRYPT_REPORT_AGG_HPP
#define GATTCRYPT_REPORT_AGG_HPP

#include "gattcrypt/ruleset.hpp"
#include "gattcrypt/smali_ir.hpp"
#include "gattcrypt/taint_engine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gattcrypt::report {

enum class CallOrigin : std::uint8_t { LibraryOnly, AppOnly, Both, Unknown };

std::string_view to_string(CallOrigin o);
std::optional<CallOrigin> parse_call_origin(std::string_view s);

// Compares the first two dotted components of each BLE read/write caller's
// class with the package. Unknown when there is no call site, the package has
// fewer than two components, or any caller class has fewer than three path
// segments (obfuscated names like La/b;).
CallOrigin classify_ble_call_origin(const smali::SmaliProgram &program, const RuleSet &rules,
                                    std::string_view package_name);

struct AppRecord {
    std::string app_id;
    std::string package_name;
    std::optional<std::string> category;
    std::optional<std::uint64_t> downloads;
    std::optional<int> year;
    std::optional<taint::TaintVerdict> read_verdict;
    std::optional<taint::TaintVerdict> write_verdict;
    CallOrigin ble_origin = CallOrigin::Unknown;
};

enum class AggregatePolicy : std::uint8_t {
    // Only a negative verdict counts as no-crypto; Medium/Low count as crypto.
    Strict,
    // High counts as crypto, a completed negative verdict as no-crypto;
    // Medium/Low and timed-out negatives are excluded from the rates.
    Headline,
};

std::string_view to_string(AggregatePolicy p);
std::optional<AggregatePolicy> parse_policy(std::string_view s);

struct CategoryStats {
    std::uint32_t n_apps = 0;
    std::optional<double> pct_crypto_high;
    std::optional<double> pct_none;

    bool operator==(const CategoryStats &) const = default;
};

struct YearStats {
    std::uint32_t n_apps = 0;
    std::optional<double> pct_no_crypto_either;

    bool operator==(const YearStats &) const = default;
};

struct Totals {
    std::uint32_t n_apps = 0;
    std::optional<double> pct_no_crypto_reads;
    std::optional<double> pct_no_crypto_writes;
    std::optional<double> pct_no_crypto_either;
    std::uint64_t downloads_no_crypto_either = 0;

    bool operator==(const Totals &) const = default;
};

struct LibrarySplit {
    std::uint32_t library_only = 0;
    std::uint32_t app_only = 0;
    std::uint32_t both = 0;
    std::uint32_t unknown = 0;

    std::uint32_t total() const { return library_only + app_only + both + unknown; }
    bool operator==(const LibrarySplit &) const = default;
};

struct AggregateReport {
    AggregatePolicy policy = AggregatePolicy::Headline;
    std::map<std::string, CategoryStats> per_category;
    std::map<int, YearStats> per_year;
    Totals totals;
    LibrarySplit library_split;
    // Records without any verdict.
    std::uint32_t skipped = 0;

    bool operator==(const AggregateReport &) const = default;
};

AggregateReport aggregate(const std::vector<AppRecord> &records, AggregatePolicy policy = AggregatePolicy::Headline);

struct MetadataError {
    std::uint32_t line = 0;
    std::string reason;
};

struct AppMetadata {
    std::optional<std::string> category;
    std::optional<std::uint64_t> downloads;
    std::optional<int> year;
};

struct MetadataTable {
    std::map<std::string, AppMetadata> by_package;
    std::vector<MetadataError> errors;
};

// Header row naming package, category, downloads, year in any order; comma or
// tab separated (picked from the header). Empty cells are absent values. Bad
// rows are recorded and skipped; a duplicate package keeps the first row.
MetadataTable parse_metadata(std::string_view text);

// Fills category/downloads/year from the table by package_name.
void join_metadata(std::vector<AppRecord> &records, const MetadataTable &table);

// Table of apps and downloads per category, then the totals.
std::string render_aggregate(const AggregateReport &report);

} // namespace gattcrypt::report

#endif // GATTCRYPT_REPORT_AGG_HPP
