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

#include "gattcrypt/smali_ir.hpp"
#include "smali_ir/text_util.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace gattcrypt::smali {

namespace {

std::vector<std::string_view> words(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::uint32_t collect_flags(const std::vector<std::string_view> &ws, std::size_t first, std::size_t last)
{
    std::uint32_t flags = 0;
    for (std::size_t i = first; i < last && i < ws.size(); ++i) {
        if (auto f = access::parse_flag(ws[i])) flags |= *f;
    }
    return flags;
}

std::optional<std::int64_t> parse_number(std::string_view s)
{
    s = trim(s);
    while (!s.empty() && std::string_view("LltsTS").find(s.back()) != std::string_view::npos) s.remove_suffix(1);
    bool neg = false;
    if (!s.empty() && s.front() == '-') {
        neg = true;
        s.remove_prefix(1);
    }
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        base = 16;
        s.remove_prefix(2);
    }
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    auto sv = static_cast<std::int64_t>(v);
    return neg ? -sv : sv;
}

class FileParser {
public:
    FileParser(std::string_view text, const std::string &path) : text_(text), path_(path) {}

    ParsedFile run()
    {
        std::istringstream in{std::string(text_)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_;
            std::string_view line = trim(strip_comment(raw));
            if (line.empty()) continue;
            if (skip_block_) {
                if (line.substr(0, skip_end_.size()) == skip_end_) skip_block_ = false;
                continue;
            }
            if (payload_) {
                handle_payload_line(line);
                continue;
            }
            if (method_) {
                handle_method_line(line);
            } else {
                handle_class_line(line);
            }
        }
        if (method_) error("unterminated .method " + method_->signature.name);
        if (!cls_.descriptor.size() && out_.errors.empty()) error("missing .class directive");
        if (out_.errors.empty()) {
            cls_.source_path = path_;
            out_.cls = std::move(cls_);
        }
        return std::move(out_);
    }

private:
    void error(std::string reason) { out_.errors.push_back({path_, line_, std::move(reason)}); }

    void begin_skip(std::string end, std::uint32_t *counter)
    {
        skip_block_ = true;
        skip_end_ = std::move(end);
        if (counter) ++*counter;
    }

    void handle_class_line(std::string_view line)
    {
        auto ws = words(line);
        const auto &d = ws.front();
        if (d == ".class") {
            if (ws.size() < 2) return error(".class without descriptor");
            cls_.descriptor = std::string(ws.back());
            cls_.access_flags = collect_flags(ws, 1, ws.size() - 1);
        } else if (d == ".super") {
            if (ws.size() != 2) return error(".super expects one descriptor");
            cls_.super_descriptor = std::string(ws[1]);
        } else if (d == ".implements") {
            if (ws.size() != 2) return error(".implements expects one descriptor");
            cls_.interfaces.emplace_back(ws[1]);
        } else if (d == ".source") {
            ++out_.debug_directives_skipped;
        } else if (d == ".field") {
            handle_field(line, ws);
        } else if (d == ".end" && ws.size() > 1 && ws[1] == "field") {
            // closes a field that carried annotations
        } else if (d == ".annotation" || d == ".subannotation") {
            begin_skip(d == ".annotation" ? ".end annotation" : ".end subannotation", &out_.annotations_skipped);
        } else if (d == ".method") {
            begin_method(line, ws);
        } else {
            error("unexpected line outside method: " + std::string(d));
        }
    }

    void handle_field(std::string_view line, const std::vector<std::string_view> &ws)
    {
        if (cls_.descriptor.empty()) return error(".field before .class");
        // ".field <flags> name:Type [= value]"
        auto eq = line.find(" = ");
        std::string_view decl = eq == std::string_view::npos ? line : line.substr(0, eq);
        auto dws = words(decl);
        if (dws.size() < 2) return error("malformed .field");
        std::string_view nt = dws.back();
        auto colon = nt.find(':');
        if (colon == std::string_view::npos) return error("malformed .field");
        cls_.fields.push_back({cls_.descriptor, std::string(nt.substr(0, colon)), std::string(nt.substr(colon + 1))});
        (void)ws;
    }

    void begin_method(std::string_view line, const std::vector<std::string_view> &ws)
    {
        if (cls_.descriptor.empty()) return error(".method before .class");
        // The name/proto token may be broken by stray whitespace; everything
        // from the first word containing '(' onward belongs to it.
        std::size_t sig_word = ws.size();
        for (std::size_t i = 1; i < ws.size(); ++i) {
            if (ws[i].find('(') != std::string_view::npos) {
                sig_word = i;
                break;
            }
        }
        if (sig_word == ws.size()) return error("malformed .method");
        auto start = static_cast<std::size_t>(ws[sig_word].data() - line.data());
        std::string text = cls_.descriptor + "->" + strip_whitespace(line.substr(start));
        auto sig = MethodSignature::parse(text);
        if (!sig) {
            error("malformed method signature '" + std::string(line.substr(start)) + "'");
            begin_skip(".end method", nullptr);
            return;
        }
        method_.emplace();
        method_->signature = std::move(*sig);
        method_->access_flags = collect_flags(ws, 1, sig_word);
        saw_register_directive_ = false;
        method_failed_ = false;
    }

    void handle_method_line(std::string_view line)
    {
        if (line.front() == ':') {
            std::string label(trim(line.substr(1)));
            method_->labels[label] = static_cast<std::uint32_t>(method_->instructions.size());
            last_label_ = label;
            return;
        }
        // A bare "..." (elided listing) is kept as an opaque instruction.
        if (line.front() == '.' && line.find_first_not_of('.') != std::string_view::npos) {
            handle_method_directive(line);
            return;
        }
        std::string err;
        auto insn = parse_instruction(line, static_cast<std::uint32_t>(method_->instructions.size()), &err);
        if (!insn) {
            error(err.empty() ? "unparseable instruction" : err);
            method_failed_ = true;
            return;
        }
        insn->line = line_;
        if (insn->family == OpFamily::Opaque) ++out_.opaque_instructions;
        method_->instructions.push_back(std::move(*insn));
    }

    void handle_method_directive(std::string_view line)
    {
        auto ws = words(line);
        const auto d = ws.front();
        if (d == ".end" && ws.size() > 1 && ws[1] == "method") {
            finish_method();
        } else if (d == ".registers" || d == ".locals") {
            auto n = ws.size() == 2 ? parse_number(ws[1]) : std::nullopt;
            if (!n || *n < 0) return error("malformed " + std::string(d));
            auto ins = method_->ins_count();
            method_->registers_declared =
                static_cast<std::uint32_t>(*n) + (d == ".locals" ? ins : 0);
            saw_register_directive_ = true;
        } else if (d == ".annotation") {
            begin_skip(".end annotation", &out_.annotations_skipped);
        } else if (d == ".param" || d == ".parameter") {
            // A .param opens a block only when followed by an annotation; the
            // block terminator is optional in baksmali output.
            ++out_.debug_directives_skipped;
        } else if (d == ".end") {
            // .end param / .end local / .end parameter
            ++out_.debug_directives_skipped;
        } else if (d == ".catch" || d == ".catchall") {
            ++out_.catch_directives_skipped;
        } else if (d == ".packed-switch" || d == ".sparse-switch") {
            payload_ = Payload{PayloadKind::Switch, last_label_, d == ".packed-switch" ? ".end packed-switch"
                                                                                      : ".end sparse-switch"};
            method_->switch_payloads[last_label_];
        } else if (d == ".array-data") {
            payload_ = Payload{PayloadKind::Array, last_label_, ".end array-data"};
            method_->array_payloads[last_label_];
        } else if (d == ".line" || d == ".local" || d == ".prologue" || d == ".epilogue" || d == ".restart" ||
                   d == ".source") {
            ++out_.debug_directives_skipped;
        } else {
            error("unknown directive " + std::string(d));
            method_failed_ = true;
        }
    }

    void handle_payload_line(std::string_view line)
    {
        if (line.substr(0, payload_->end.size()) == payload_->end) {
            payload_.reset();
            return;
        }
        if (payload_->kind == PayloadKind::Switch) {
            // packed: ":label"; sparse: "0x1 -> :label"
            auto colon = line.rfind(':');
            if (colon == std::string_view::npos) return error("malformed switch payload entry");
            method_->switch_payloads[payload_->label].emplace_back(trim(line.substr(colon + 1)));
        } else {
            for (auto w : words(line)) {
                if (auto v = parse_number(w)) {
                    method_->array_payloads[payload_->label].push_back(*v);
                } else {
                    return error("malformed array-data element '" + std::string(w) + "'");
                }
            }
        }
    }

    void finish_method()
    {
        SmaliMethod m = std::move(*method_);
        method_.reset();
        if (method_failed_) return;
        if (!saw_register_directive_) {
            m.registers_declared = m.ins_count();
        }
        if (m.ins_count() > m.registers_declared) {
            error("method " + m.signature.name + " declares " + std::to_string(m.registers_declared) +
                  " registers but needs " + std::to_string(m.ins_count()) + " for parameters");
            return;
        }
        if (m.is_abstract() && !m.instructions.empty()) {
            error("abstract method " + m.signature.name + " has a body");
            return;
        }
        for (const auto &insn : m.instructions) {
            for (const auto &t : insn.targets) {
                if (!m.labels.count(t)) {
                    error("undefined label :" + t + " in " + m.signature.name);
                    return;
                }
            }
            for (const auto &r : insn.operands) {
                if (r.kind == RegisterKind::Local ? r.index >= m.registers_declared : r.index >= m.ins_count()) {
                    error("register " + r.to_string() + " out of range in " + m.signature.name);
                    return;
                }
            }
        }
        cls_.methods.push_back(std::move(m));
    }

    enum class PayloadKind { Switch, Array };
    struct Payload {
        PayloadKind kind;
        std::string label;
        std::string end;
    };

    std::string_view text_;
    std::string path_;
    std::uint32_t line_ = 0;
    ParsedFile out_;
    SmaliClass cls_;
    std::optional<SmaliMethod> method_;
    std::optional<Payload> payload_;
    std::string last_label_;
    bool saw_register_directive_ = false;
    bool method_failed_ = false;
    bool skip_block_ = false;
    std::string skip_end_;
};

} // namespace

ParsedFile parse_smali_file(std::string_view text, const std::string &path)
{
    FileParser parser(text, path);
    ParsedFile result = parser.run();
    // A file with any error contributes nothing; its errors are reported.
    if (!result.errors.empty()) result.cls.reset();
    return result;
}

SmaliProgram parse_program_sources(const std::vector<std::pair<std::string, std::string>> &sources)
{
    if (sources.empty()) throw EmptyInputError("no .smali files found");
    ParseDiagnostics diag;
    std::vector<SmaliClass> classes;
    for (const auto &[path, text] : sources) {
        ++diag.files_seen;
        ParsedFile pf = parse_smali_file(text, path);
        diag.annotations_skipped += pf.annotations_skipped;
        diag.debug_directives_skipped += pf.debug_directives_skipped;
        diag.catch_directives_skipped += pf.catch_directives_skipped;
        diag.opaque_instructions += pf.opaque_instructions;
        diag.errors.insert(diag.errors.end(), pf.errors.begin(), pf.errors.end());
        if (pf.cls) {
            ++diag.files_parsed;
            classes.push_back(std::move(*pf.cls));
        }
    }
    return SmaliProgram::build(std::move(classes), std::move(diag));
}

SmaliProgram parse_program(const std::filesystem::path &root)
{
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, std::string>> sources;
    std::error_code ec;
    if (fs::is_regular_file(root, ec) && root.extension() == ".zip") {
        sources = read_zip_sources(root);
    } else if (fs::is_directory(root, ec)) {
        std::vector<fs::path> files;
        for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied, ec);
             it != fs::recursive_directory_iterator(); it.increment(ec)) {
            if (ec) break;
            if (it->is_regular_file() && it->path().extension() == ".smali") files.push_back(it->path());
        }
        std::sort(files.begin(), files.end());
        for (const auto &f : files) {
            std::ifstream in(f, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            sources.emplace_back(fs::relative(f, root, ec).generic_string(), ss.str());
        }
    } else {
        throw EmptyInputError("input " + root.string() + " is neither a directory nor a .zip archive");
    }
    if (sources.empty()) throw EmptyInputError("no .smali files found under " + root.string());
    return parse_program_sources(sources);
}

} // namespace gattcrypt::smali
