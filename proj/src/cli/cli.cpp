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
#include "gattcrypt/corpus_bench.hpp"
#include "gattcrypt/misuse_lints.hpp"
#include "gattcrypt/serialize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace gattcrypt::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct LoadedApp {
    std::string app_id;
    std::string package;
    std::optional<std::vector<std::string>> permissions;
    smali::SmaliProgram program;
};

std::string read_file(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw io::InputError("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string app_id_of(const fs::path &p)
{
    return p.extension() == ".zip" ? p.stem().string() : p.filename().string();
}

// A directory (with an optional AndroidManifest.xml and smali/ subtree) or a
// .zip of smali sources.
LoadedApp load_app(const fs::path &path)
{
    if (!fs::exists(path)) throw io::InputError(path.string() + ": no such file or directory");
    LoadedApp app;
    app.app_id = app_id_of(path);
    app.package = app.app_id;
    fs::path smali_root = path;
    if (fs::is_directory(path)) {
        if (fs::is_directory(path / "smali")) smali_root = path / "smali";
        if (fs::exists(path / "AndroidManifest.xml")) {
            auto m = io::parse_manifest(read_file(path / "AndroidManifest.xml"));
            app.package = m.package;
            app.permissions = std::move(m.permissions);
        }
    }
    app.program = smali::parse_program(smali_root);
    return app;
}

std::vector<fs::path> corpus_entries(const fs::path &root)
{
    if (!fs::is_directory(root)) throw io::InputError(root.string() + ": not a directory");
    std::vector<fs::path> out;
    for (const auto &e : fs::directory_iterator(root))
        if (e.is_directory() || e.path().extension() == ".zip") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<taint::Direction> directions(DirectionChoice d)
{
    switch (d) {
    case DirectionChoice::Reads: return {taint::Direction::ForwardFromRead};
    case DirectionChoice::Writes: return {taint::Direction::BackwardFromWrite};
    case DirectionChoice::Both: break;
    }
    return {taint::Direction::ForwardFromRead, taint::Direction::BackwardFromWrite};
}

struct AppOutput {
    std::vector<std::string> lines;
    std::string error;
    double seconds = 0;
};

// Runs `work` over every path on `jobs` threads; outputs keep input order.
// Input errors become an error line; anything else propagates.
template <typename Work>
std::vector<AppOutput> run_pool(const std::vector<fs::path> &paths, unsigned jobs, Work work)
{
    std::vector<AppOutput> outs(paths.size());
    std::vector<std::exception_ptr> faults(paths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < paths.size();) {
            const auto start = std::chrono::steady_clock::now();
            try {
                outs[i].lines = work(load_app(paths[i]));
            } catch (const io::InputError &e) {
                outs[i].error = e.what();
            } catch (const smali::EmptyInputError &e) {
                outs[i].error = e.what();
            } catch (const fs::filesystem_error &e) {
                outs[i].error = e.what();
            } catch (...) {
                faults[i] = std::current_exception();
            }
            outs[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(jobs, paths.size()); ++t) pool.emplace_back(worker);
    worker();
    for (auto &t : pool) t.join();
    for (auto &f : faults)
        if (f) std::rethrow_exception(f);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (outs[i].error.empty()) continue;
        ordered_json j{{"app_id", app_id_of(paths[i])}, {"error", outs[i].error}};
        outs[i].lines = {j.dump()};
    }
    return outs;
}

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Runner {
public:
    Runner(RunConfig cfg, std::ostream &out, std::ostream &err) : cfg_(std::move(cfg)), out_(out), err_(err) {}

    int analyze();
    int lint();
    int bench();
    int aggregate();

private:
    RuleSet rules() const { return cfg_.ruleset_path ? load_ruleset(*cfg_.ruleset_path) : default_ruleset(); }
    std::ostream &machine();
    std::ostream &human() { return cfg_.output_path.empty() ? err_ : out_; }
    void write_run_info(const std::string &command, const std::vector<fs::path> &paths,
                        const std::vector<AppOutput> &outs, double total);
    int emit(const std::string &command, const std::vector<fs::path> &paths, const std::vector<AppOutput> &outs,
             double total);

    RunConfig cfg_;
    std::ostream &out_;
    std::ostream &err_;
    std::ofstream file_;
};

std::ostream &Runner::machine()
{
    if (cfg_.output_path.empty()) return out_;
    if (!file_.is_open()) {
        file_.open(cfg_.output_path, std::ios::binary | std::ios::trunc);
        if (!file_) throw io::InputError("cannot write " + cfg_.output_path.string());
    }
    return file_;
}

void Runner::write_run_info(const std::string &command, const std::vector<fs::path> &paths,
                            const std::vector<AppOutput> &outs, double total)
{
    fs::path p = cfg_.run_info_path;
    if (p.empty() && !cfg_.output_path.empty()) p = cfg_.output_path.string() + ".runinfo.json";
    if (p.empty()) return;
    ordered_json j;
    j["command"] = command;
    j["finished_at"] = utc_now();
    j["jobs"] = cfg_.parallelism;
    j["total_seconds"] = total;
    ordered_json apps = ordered_json::array();
    for (std::size_t i = 0; i < paths.size(); ++i)
        apps.push_back({{"app_id", app_id_of(paths[i])}, {"seconds", outs[i].seconds}});
    j["apps"] = apps;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw io::InputError("cannot write " + p.string());
    f << j.dump(2) << "\n";
}

int Runner::emit(const std::string &command, const std::vector<fs::path> &paths, const std::vector<AppOutput> &outs,
                 double total)
{
    auto &m = machine();
    int status = kOk;
    for (const auto &o : outs) {
        for (const auto &l : o.lines) m << l << "\n";
        if (!o.error.empty()) {
            err_ << "error: " << o.error << "\n";
            status = kInputError;
        }
    }
    m.flush();
    write_run_info(command, paths, outs, total);
    return status;
}

int Runner::analyze()
{
    const auto rs = rules();
    const auto &paths = cfg_.inputs;
    const auto start = std::chrono::steady_clock::now();
    const auto outs = run_pool(paths, cfg_.parallelism, [&](const LoadedApp &app) {
        std::vector<std::string> lines;
        const auto eligible = is_eligible(app.program, rs, app.permissions);
        const auto origin = report::classify_ble_call_origin(app.program, rs, app.package);
        for (auto d : directions(cfg_.direction)) {
            ordered_json j;
            j["app_id"] = app.app_id;
            j["package"] = app.package;
            j["direction"] = taint::to_string(d);
            j["eligible"] = eligible.eligible;
            j["ble_origin"] = report::to_string(origin);
            j["parse_errors"] = app.program.diagnostics().errors.size();
            j["verdict"] = io::to_json(taint::analyze_app(app.program, rs, d, cfg_.budget));
            lines.push_back(j.dump());
        }
        return lines;
    });
    return emit("analyze", paths, outs, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int Runner::lint()
{
    const auto rs = rules();
    const auto &paths = cfg_.inputs;
    const auto start = std::chrono::steady_clock::now();
    const auto outs = run_pool(paths, cfg_.parallelism, [&](const LoadedApp &app) {
        std::vector<std::string> lines;
        for (auto d : directions(cfg_.direction)) {
            const auto v = taint::analyze_app(app.program, rs, d, cfg_.budget);
            lints::LintDiagnostics diag;
            ordered_json findings = ordered_json::array();
            for (const auto &f : lints::lint_verdict(app.program, v, &diag)) findings.push_back(io::to_json(f));
            ordered_json j;
            j["app_id"] = app.app_id;
            j["direction"] = taint::to_string(d);
            j["confidence"] = taint::to_string(v.confidence);
            j["findings"] = findings;
            j["unresolved_transformations"] = diag.unresolved_transformations;
            lines.push_back(j.dump());
        }
        return lines;
    });
    return emit("lint", paths, outs, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int Runner::bench()
{
    const auto cases = bench::load_corpus(cfg_.inputs.front());
    const auto start = std::chrono::steady_clock::now();
    const auto results = bench::run_benchmark(cases, rules(), cfg_.budget, cfg_.parallelism);
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto &m = machine();
    std::vector<fs::path> paths;
    std::vector<AppOutput> timings;
    bool all_match = true;
    for (const auto &r : results) {
        ordered_json j;
        j["case_id"] = r.spec.case_id;
        j["direction"] = taint::to_string(r.spec.direction);
        j["category"] = bench::to_string(r.spec.category);
        j["expected_found"] = r.spec.expected_found;
        j["expected_confidence"] = taint::to_string(r.spec.expected_confidence);
        j["match"] = r.matches();
        j["verdict"] = io::to_json(r.verdict);
        m << j.dump() << "\n";
        all_match = all_match && r.matches();
        paths.push_back(r.spec.root);
        timings.push_back({{}, {}, r.seconds});
    }
    m.flush();
    human() << bench::render_report(results);
    write_run_info("bench", paths, timings, total);
    return all_match ? kOk : kBenchMismatch;
}

int Runner::aggregate()
{
    std::ifstream in(cfg_.results_path);
    if (!in) throw io::InputError("cannot read " + cfg_.results_path.string());
    std::map<std::string, report::AppRecord> apps;
    std::string line;
    for (std::uint32_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = cfg_.results_path.string() + ":" + std::to_string(lineno) + ": ";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error &e) {
            throw io::InputError(where + e.what());
        }
        if (j.contains("error")) {
            err_ << "warning: " << where << "skipping failed app\n";
            continue;
        }
        try {
            const auto id = j.at("app_id").get<std::string>();
            auto &rec = apps[id];
            rec.app_id = id;
            rec.package_name = j.at("package").get<std::string>();
            const auto origin = report::parse_call_origin(j.at("ble_origin").get<std::string>());
            if (!origin) throw io::InputError("bad ble_origin");
            rec.ble_origin = *origin;
            auto v = io::verdict_from_json(j.at("verdict"));
            (v.direction == taint::Direction::ForwardFromRead ? rec.read_verdict : rec.write_verdict) = std::move(v);
        } catch (const nlohmann::json::exception &e) {
            throw io::InputError(where + e.what());
        } catch (const io::InputError &e) {
            throw io::InputError(where + e.what());
        }
    }
    std::vector<report::AppRecord> records;
    for (auto &[_, r] : apps) records.push_back(std::move(r));
    if (cfg_.metadata_path) {
        const auto table = report::parse_metadata(read_file(*cfg_.metadata_path));
        for (const auto &e : table.errors)
            err_ << "warning: " << cfg_.metadata_path->string() << ":" << e.line << ": " << e.reason << "\n";
        report::join_metadata(records, table);
    }
    const auto rep = report::aggregate(records, cfg_.policy);
    machine() << io::to_json(rep).dump(2) << "\n";
    machine().flush();
    human() << report::render_aggregate(rep);
    return kOk;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    RunConfig cfg;
    std::string direction = "both", timeout = "5m", policy = "headline";
    std::vector<std::string> apps;
    std::string corpus, bench_corpus = "corpus", ruleset, results, meta, out_path, run_info;
    std::size_t max_depth = cfg.budget.max_depth, max_visited = cfg.budget.max_visited;

    CLI::App app{"BLE GATT payload crypto tracer"};
    app.require_subcommand(1);
    auto common = [&](CLI::App *sc) {
        sc->add_option("--ruleset", ruleset, "ruleset YAML merged over the defaults");
        sc->add_option("--out", out_path, "machine-readable output file (default stdout)");
        sc->add_option("--run-info", run_info, "timing file (default <out>.runinfo.json)");
        sc->add_option("--jobs", cfg.parallelism, "worker threads")->check(CLI::PositiveNumber);
        sc->add_option("--timeout", timeout, "wall clock per app and direction, e.g. 30s, 5m");
        sc->add_option("--max-depth", max_depth, "call-chain depth limit");
        sc->add_option("--max-visited", max_visited, "visited-state limit");
    };
    auto with_apps = [&](CLI::App *sc) {
        common(sc);
        auto *a = sc->add_option("--app", apps, "app directory or smali zip (repeatable)");
        auto *c = sc->add_option("--corpus", corpus, "directory of apps");
        a->excludes(c);
        sc->add_option("--direction", direction, "reads, writes or both")
            ->check(CLI::IsMember({"reads", "writes", "both"}));
    };
    auto *analyze = app.add_subcommand("analyze", "trace one app or a corpus, one JSON line per app and direction");
    with_apps(analyze);
    auto *lint = app.add_subcommand("lint", "crypto misuse findings along each verdict's witness");
    with_apps(lint);
    auto *bench = app.add_subcommand("bench", "run the labeled corpus; exit 3 on any mismatch");
    common(bench);
    bench->add_option("--corpus", bench_corpus, "labeled corpus directory")->capture_default_str();
    auto *agg = app.add_subcommand("aggregate", "join analyze output with app metadata");
    agg->add_option("--results", results, "analyze JSON lines")->required();
    agg->add_option("--meta", meta, "metadata table: package,category,downloads,year");
    agg->add_option("--out", out_path, "report file (default stdout)");
    agg->add_option("--policy", policy, "strict or headline")->check(CLI::IsMember({"strict", "headline"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << e.what() << "\n\n" << app.help();
        return kInputError;
    }

    try {
        cfg.budget.wall_clock = io::parse_duration(timeout);
        cfg.budget.max_depth = static_cast<std::uint32_t>(max_depth);
        cfg.budget.max_visited = max_visited;
        if (!ruleset.empty()) cfg.ruleset_path = ruleset;
        cfg.output_path = out_path;
        cfg.run_info_path = run_info;
        cfg.policy = *report::parse_policy(policy);
        cfg.direction = direction == "reads"    ? DirectionChoice::Reads
                        : direction == "writes" ? DirectionChoice::Writes
                                                : DirectionChoice::Both;
        if (bench->parsed()) {
            cfg.mode = Mode::Benchmark;
            cfg.inputs = {bench_corpus};
        } else if (agg->parsed()) {
            cfg.mode = Mode::Aggregate;
            cfg.results_path = results;
            if (!meta.empty()) cfg.metadata_path = meta;
        } else {
            if (apps.empty() && corpus.empty()) {
                err << "one of --app or --corpus is required\n" << (analyze->parsed() ? analyze : lint)->help();
                return kInputError;
            }
            if (lint->parsed())
                cfg.mode = Mode::Lint;
            else
                cfg.mode = apps.empty() ? Mode::AnalyzeCorpus : Mode::AnalyzeApp;
            if (apps.empty())
                cfg.inputs = corpus_entries(corpus);
            else
                cfg.inputs.assign(apps.begin(), apps.end());
        }

        Runner runner(cfg, out, err);
        switch (cfg.mode) {
        case Mode::AnalyzeApp:
        case Mode::AnalyzeCorpus: return runner.analyze();
        case Mode::Lint: return runner.lint();
        case Mode::Benchmark: return runner.bench();
        case Mode::Aggregate: return runner.aggregate();
        }
    } catch (const io::InputError &e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const SchemaError &e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const bench::CorpusError &e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const smali::EmptyInputError &e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const fs::filesystem_error &e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception &e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}

} // namespace gattcrypt::cli
