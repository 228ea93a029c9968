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
#include <array>
#include <charconv>
#include <sstream>
#include <unordered_map>

namespace gattcrypt::smali {

namespace {

struct OpcodeEntry {
    std::string_view mnemonic;
    OpFamily family;
};

const std::unordered_map<std::string_view, OpFamily> &opcode_table()
{
    static const std::unordered_map<std::string_view, OpFamily> table = [] {
        std::unordered_map<std::string_view, OpFamily> t;
        constexpr std::array fixed = {
            OpcodeEntry{"nop", OpFamily::Nop},
            OpcodeEntry{"move", OpFamily::Move},
            OpcodeEntry{"move/from16", OpFamily::Move},
            OpcodeEntry{"move/16", OpFamily::Move},
            OpcodeEntry{"move-wide", OpFamily::Move},
            OpcodeEntry{"move-wide/from16", OpFamily::Move},
            OpcodeEntry{"move-wide/16", OpFamily::Move},
            OpcodeEntry{"move-object", OpFamily::Move},
            OpcodeEntry{"move-object/from16", OpFamily::Move},
            OpcodeEntry{"move-object/16", OpFamily::Move},
            OpcodeEntry{"move-result", OpFamily::MoveResult},
            OpcodeEntry{"move-result-wide", OpFamily::MoveResult},
            OpcodeEntry{"move-result-object", OpFamily::MoveResult},
            OpcodeEntry{"move-exception", OpFamily::MoveException},
            OpcodeEntry{"return-void", OpFamily::ReturnVoid},
            OpcodeEntry{"return", OpFamily::Return},
            OpcodeEntry{"return-wide", OpFamily::Return},
            OpcodeEntry{"return-object", OpFamily::Return},
            OpcodeEntry{"const/4", OpFamily::Const},
            OpcodeEntry{"const/16", OpFamily::Const},
            OpcodeEntry{"const", OpFamily::Const},
            OpcodeEntry{"const/high16", OpFamily::Const},
            OpcodeEntry{"const-wide/16", OpFamily::Const},
            OpcodeEntry{"const-wide/32", OpFamily::Const},
            OpcodeEntry{"const-wide", OpFamily::Const},
            OpcodeEntry{"const-wide/high16", OpFamily::Const},
            OpcodeEntry{"const-string", OpFamily::ConstString},
            OpcodeEntry{"const-string/jumbo", OpFamily::ConstString},
            OpcodeEntry{"const-class", OpFamily::ConstClass},
            OpcodeEntry{"monitor-enter", OpFamily::Monitor},
            OpcodeEntry{"monitor-exit", OpFamily::Monitor},
            OpcodeEntry{"check-cast", OpFamily::CheckCast},
            OpcodeEntry{"instance-of", OpFamily::InstanceOf},
            OpcodeEntry{"array-length", OpFamily::ArrayLength},
            OpcodeEntry{"new-instance", OpFamily::NewInstance},
            OpcodeEntry{"new-array", OpFamily::NewArray},
            OpcodeEntry{"filled-new-array", OpFamily::FilledNewArray},
            OpcodeEntry{"filled-new-array/range", OpFamily::FilledNewArray},
            OpcodeEntry{"fill-array-data", OpFamily::FillArrayData},
            OpcodeEntry{"throw", OpFamily::Throw},
            OpcodeEntry{"goto", OpFamily::Goto},
            OpcodeEntry{"goto/16", OpFamily::Goto},
            OpcodeEntry{"goto/32", OpFamily::Goto},
            OpcodeEntry{"packed-switch", OpFamily::Switch},
            OpcodeEntry{"sparse-switch", OpFamily::Switch},
            OpcodeEntry{"cmpl-float", OpFamily::Compare},
            OpcodeEntry{"cmpg-float", OpFamily::Compare},
            OpcodeEntry{"cmpl-double", OpFamily::Compare},
            OpcodeEntry{"cmpg-double", OpFamily::Compare},
            OpcodeEntry{"cmp-long", OpFamily::Compare},
            OpcodeEntry{"if-eq", OpFamily::If},
            OpcodeEntry{"if-ne", OpFamily::If},
            OpcodeEntry{"if-lt", OpFamily::If},
            OpcodeEntry{"if-ge", OpFamily::If},
            OpcodeEntry{"if-gt", OpFamily::If},
            OpcodeEntry{"if-le", OpFamily::If},
            OpcodeEntry{"if-eqz", OpFamily::IfZero},
            OpcodeEntry{"if-nez", OpFamily::IfZero},
            OpcodeEntry{"if-ltz", OpFamily::IfZero},
            OpcodeEntry{"if-gez", OpFamily::IfZero},
            OpcodeEntry{"if-gtz", OpFamily::IfZero},
            OpcodeEntry{"if-lez", OpFamily::IfZero},
            OpcodeEntry{"rsub-int", OpFamily::BinaryOpLit},
        };
        for (const auto &e : fixed) {
            t.emplace(e.mnemonic, e.family);
        }
        return t;
    }();
    return table;
}

bool has_suffix(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool has_prefix(std::string_view s, std::string_view prefix)
{
    return s.substr(0, prefix.size()) == prefix;
}

// Families not listed verbatim: field/array variants (-wide, -volatile, ...),
// invokes, arithmetic and conversions.
OpFamily family_by_prefix(std::string_view m)
{
    static constexpr std::array<std::pair<std::string_view, OpFamily>, 8> prefixes = {{
        {"aget", OpFamily::ArrayGet},
        {"aput", OpFamily::ArrayPut},
        {"iget", OpFamily::InstanceGet},
        {"iput", OpFamily::InstancePut},
        {"sget", OpFamily::StaticGet},
        {"sput", OpFamily::StaticPut},
        {"invoke-", OpFamily::Invoke},
        {"const-method-", OpFamily::ConstClass},
    }};
    for (const auto &[prefix, family] : prefixes) {
        if (has_prefix(m, prefix)) {
            return family;
        }
    }

    static constexpr std::array<std::string_view, 11> int_ops = {"add", "sub", "mul", "div", "rem", "and",
                                                                 "or",  "xor", "shl", "shr", "ushr"};
    auto dash = m.find('-');
    if (dash == std::string_view::npos) {
        return OpFamily::Opaque;
    }
    std::string_view op = m.substr(0, dash);
    std::string_view rest = m.substr(dash + 1);

    if (op == "neg" || op == "not") {
        return OpFamily::UnaryOp;
    }
    if (m.find("-to-") != std::string_view::npos) {
        return OpFamily::UnaryOp;
    }
    if (op == "rsub") {
        return OpFamily::BinaryOpLit;
    }
    if (std::find(int_ops.begin(), int_ops.end(), op) == int_ops.end()) {
        return OpFamily::Opaque;
    }
    if (has_suffix(rest, "/2addr")) {
        return OpFamily::BinaryOp2Addr;
    }
    if (has_suffix(rest, "/lit16") || has_suffix(rest, "/lit8")) {
        return OpFamily::BinaryOpLit;
    }
    static constexpr std::array<std::string_view, 4> types = {"int", "long", "float", "double"};
    if (std::find(types.begin(), types.end(), rest) != types.end()) {
        return OpFamily::BinaryOp;
    }
    return OpFamily::Opaque;
}

struct Arity {
    std::size_t min_regs;
    std::size_t max_regs;
};

std::optional<Arity> fixed_arity(OpFamily f)
{
    switch (f) {
    case OpFamily::Nop:
    case OpFamily::ReturnVoid:
    case OpFamily::Goto:
        return Arity{0, 0};
    case OpFamily::MoveResult:
    case OpFamily::MoveException:
    case OpFamily::Return:
    case OpFamily::Const:
    case OpFamily::ConstString:
    case OpFamily::ConstClass:
    case OpFamily::Monitor:
    case OpFamily::CheckCast:
    case OpFamily::NewInstance:
    case OpFamily::FillArrayData:
    case OpFamily::Throw:
    case OpFamily::Switch:
    case OpFamily::IfZero:
    case OpFamily::StaticGet:
    case OpFamily::StaticPut:
        return Arity{1, 1};
    case OpFamily::Move:
    case OpFamily::InstanceOf:
    case OpFamily::ArrayLength:
    case OpFamily::NewArray:
    case OpFamily::If:
    case OpFamily::InstanceGet:
    case OpFamily::InstancePut:
    case OpFamily::UnaryOp:
    case OpFamily::BinaryOp2Addr:
    case OpFamily::BinaryOpLit:
        return Arity{2, 2};
    case OpFamily::Compare:
    case OpFamily::ArrayGet:
    case OpFamily::ArrayPut:
    case OpFamily::BinaryOp:
        return Arity{3, 3};
    case OpFamily::Invoke:
    case OpFamily::FilledNewArray:
    case OpFamily::Opaque:
        return std::nullopt;
    }
    return std::nullopt;
}

std::string escape_string(std::string_view s)
{
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\t':
            out += "\\t";
            break;
        case '\r':
            out += "\\r";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string render_integer(std::int64_t v, bool wide)
{
    std::ostringstream os;
    if (v < 0) {
        os << "-0x" << std::hex << (~static_cast<std::uint64_t>(v) + 1);
    } else {
        os << "0x" << std::hex << v;
    }
    if (wide) {
        os << 'L';
    }
    return os.str();
}

bool is_wide_const(std::string_view mnemonic) { return has_prefix(mnemonic, "const-wide"); }

} // namespace

OpFamily classify_mnemonic(std::string_view mnemonic)
{
    const auto &table = opcode_table();
    if (auto it = table.find(mnemonic); it != table.end()) {
        return it->second;
    }
    return family_by_prefix(mnemonic);
}

std::string_view to_string(OpFamily family)
{
    switch (family) {
    case OpFamily::Nop: return "nop";
    case OpFamily::Move: return "move";
    case OpFamily::MoveResult: return "move-result";
    case OpFamily::MoveException: return "move-exception";
    case OpFamily::ReturnVoid: return "return-void";
    case OpFamily::Return: return "return";
    case OpFamily::Const: return "const";
    case OpFamily::ConstString: return "const-string";
    case OpFamily::ConstClass: return "const-class";
    case OpFamily::Monitor: return "monitor";
    case OpFamily::CheckCast: return "check-cast";
    case OpFamily::InstanceOf: return "instance-of";
    case OpFamily::ArrayLength: return "array-length";
    case OpFamily::NewInstance: return "new-instance";
    case OpFamily::NewArray: return "new-array";
    case OpFamily::FilledNewArray: return "filled-new-array";
    case OpFamily::FillArrayData: return "fill-array-data";
    case OpFamily::Throw: return "throw";
    case OpFamily::Goto: return "goto";
    case OpFamily::Switch: return "switch";
    case OpFamily::Compare: return "compare";
    case OpFamily::If: return "if";
    case OpFamily::IfZero: return "if-zero";
    case OpFamily::ArrayGet: return "aget";
    case OpFamily::ArrayPut: return "aput";
    case OpFamily::InstanceGet: return "iget";
    case OpFamily::InstancePut: return "iput";
    case OpFamily::StaticGet: return "sget";
    case OpFamily::StaticPut: return "sput";
    case OpFamily::Invoke: return "invoke";
    case OpFamily::UnaryOp: return "unop";
    case OpFamily::BinaryOp: return "binop";
    case OpFamily::BinaryOp2Addr: return "binop/2addr";
    case OpFamily::BinaryOpLit: return "binop/lit";
    case OpFamily::Opaque: return "opaque";
    }
    return "opaque";
}

bool Instruction::is_range() const { return has_suffix(mnemonic, "/range"); }

InvokeKind Instruction::invoke_kind() const
{
    std::string_view m = mnemonic;
    if (has_prefix(m, "invoke-virtual")) return InvokeKind::Virtual;
    if (has_prefix(m, "invoke-super")) return InvokeKind::Super;
    if (has_prefix(m, "invoke-direct")) return InvokeKind::Direct;
    if (has_prefix(m, "invoke-static")) return InvokeKind::Static;
    if (has_prefix(m, "invoke-interface")) return InvokeKind::Interface;
    if (has_prefix(m, "invoke-polymorphic")) return InvokeKind::Polymorphic;
    return InvokeKind::Custom;
}

bool Instruction::operator==(const Instruction &o) const
{
    return mnemonic == o.mnemonic && family == o.family && operands == o.operands && literal == o.literal &&
           type_ref == o.type_ref && method_ref == o.method_ref && field_ref == o.field_ref &&
           targets == o.targets && offset == o.offset;
}

std::string Instruction::render() const
{
    std::string out = mnemonic;
    std::vector<std::string> parts;

    const bool braced = family == OpFamily::Invoke || family == OpFamily::FilledNewArray;
    if (braced) {
        std::string list = "{";
        if (is_range() && !operands.empty()) {
            list += operands.front().to_string() + " .. " + operands.back().to_string();
        } else {
            for (std::size_t i = 0; i < operands.size(); ++i) {
                if (i) list += ", ";
                list += operands[i].to_string();
            }
        }
        list += "}";
        parts.push_back(std::move(list));
    } else {
        for (const auto &r : operands) {
            parts.push_back(r.to_string());
        }
    }
    if (literal) {
        switch (literal->kind) {
        case Literal::Kind::Integer:
            parts.push_back(render_integer(literal->integer, is_wide_const(mnemonic)));
            break;
        case Literal::Kind::String:
            parts.push_back("\"" + escape_string(literal->text) + "\"");
            break;
        case Literal::Kind::Raw:
            parts.push_back(literal->text);
            break;
        }
    }
    if (type_ref) parts.push_back(*type_ref);
    if (method_ref) parts.push_back(method_ref->to_string());
    if (field_ref) parts.push_back(field_ref->to_string());
    for (const auto &t : targets) parts.push_back(":" + t);

    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i == 0 ? " " : ", ");
        out += parts[i];
    }
    return out;
}

namespace {

enum class TokenKind { Register, RegisterList, RegisterRange, String, Label, MethodRef, FieldRef, Type, Number };

struct Token {
    TokenKind kind;
    std::string text;
};

std::optional<std::int64_t> parse_integer(std::string_view s)
{
    while (!s.empty() && (s.back() == 'L' || s.back() == 'l' || s.back() == 't' || s.back() == 's' ||
                          s.back() == 'T' || s.back() == 'S')) {
        s.remove_suffix(1);
    }
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        base = 16;
        s.remove_prefix(2);
    }
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    auto sv = static_cast<std::int64_t>(v);
    return neg ? -sv : sv;
}

// Splits an operand list on commas outside braces and string literals.
std::vector<std::string> split_operands(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_str) {
            cur += c;
            if (c == '\\' && i + 1 < text.size()) {
                cur += text[++i];
            } else if (c == '"') {
                in_str = false;
            }
            continue;
        }
        if (c == '"') {
            in_str = true;
            cur += c;
        } else if (c == '{') {
            ++depth;
            cur += c;
        } else if (c == '}') {
            --depth;
            cur += c;
        } else if (c == ',' && depth == 0) {
            out.push_back(std::string(trim(cur)));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) {
        out.push_back(std::string(trim(cur)));
    }
    return out;
}

bool looks_like_register(std::string_view s)
{
    return s.size() >= 2 && (s[0] == 'v' || s[0] == 'p') &&
           std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<Token> classify_token(std::string_view raw)
{
    std::string_view s = trim(raw);
    if (s.empty()) return std::nullopt;
    if (s.front() == '{') {
        if (s.find("..") != std::string_view::npos) return Token{TokenKind::RegisterRange, std::string(s)};
        return Token{TokenKind::RegisterList, std::string(s)};
    }
    if (s.front() == '"') return Token{TokenKind::String, std::string(s)};
    if (s.front() == ':') return Token{TokenKind::Label, std::string(s.substr(1))};
    if (s.find("->") != std::string_view::npos) {
        std::string compact = strip_whitespace(s);
        if (compact.find('(') != std::string::npos) return Token{TokenKind::MethodRef, compact};
        return Token{TokenKind::FieldRef, compact};
    }
    if (looks_like_register(s)) return Token{TokenKind::Register, std::string(s)};
    if (s.front() == 'L' || s.front() == '[') return Token{TokenKind::Type, strip_whitespace(s)};
    return Token{TokenKind::Number, std::string(s)};
}

std::optional<std::vector<Register>> parse_register_list(const Token &tok)
{
    std::string_view body = tok.text;
    body.remove_prefix(1);
    if (body.empty() || body.back() != '}') return std::nullopt;
    body.remove_suffix(1);
    std::vector<Register> regs;
    if (tok.kind == TokenKind::RegisterRange) {
        auto dots = body.find("..");
        auto first = Register::parse(trim(body.substr(0, dots)));
        auto last = Register::parse(trim(body.substr(dots + 2)));
        if (!first || !last || first->kind != last->kind || last->index < first->index) return std::nullopt;
        for (std::uint32_t i = first->index; i <= last->index; ++i) regs.push_back({first->kind, i});
        return regs;
    }
    for (const auto &piece : split_on(body, ',')) {
        auto t = trim(piece);
        if (t.empty()) continue;
        auto r = Register::parse(t);
        if (!r) return std::nullopt;
        regs.push_back(*r);
    }
    return regs;
}

std::optional<std::string> unquote(std::string_view s)
{
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::nullopt;
    s = s.substr(1, s.size() - 2);
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        char e = s[++i];
        switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case '0': out += '\0'; break;
        case 'u':
            if (i + 4 < s.size()) {
                auto cp = parse_integer("0x" + std::string(s.substr(i + 1, 4)));
                if (cp && *cp < 0x80) {
                    out += static_cast<char>(*cp);
                } else {
                    out += "\\u" + std::string(s.substr(i + 1, 4));
                }
                i += 4;
            }
            break;
        default: out += e;
        }
    }
    return out;
}

} // namespace

std::optional<Instruction> parse_instruction(std::string_view line, std::uint32_t offset, std::string *error)
{
    std::string_view s = trim(strip_comment(line));
    if (s.empty() || s.front() == ':') return std::nullopt;
    if (s.front() == '.' && s.find_first_not_of('.') != std::string_view::npos) return std::nullopt;

    auto fail = [&](std::string msg) -> std::optional<Instruction> {
        if (error) *error = std::move(msg);
        return std::nullopt;
    };

    Instruction insn;
    insn.offset = offset;
    auto space = s.find_first_of(" \t");
    insn.mnemonic = std::string(s.substr(0, space));
    std::string_view rest = space == std::string_view::npos ? std::string_view{} : trim(s.substr(space));
    insn.family = classify_mnemonic(insn.mnemonic);

    const bool opaque = insn.family == OpFamily::Opaque;
    for (const auto &raw : split_operands(rest)) {
        auto tok = classify_token(raw);
        if (!tok) continue;
        switch (tok->kind) {
        case TokenKind::Register: {
            auto r = Register::parse(tok->text);
            if (!r) return fail("bad register '" + tok->text + "'");
            insn.operands.push_back(*r);
            break;
        }
        case TokenKind::RegisterList:
        case TokenKind::RegisterRange: {
            auto regs = parse_register_list(*tok);
            if (!regs) {
                if (opaque) break;
                return fail("bad register list '" + tok->text + "'");
            }
            insn.operands.insert(insn.operands.end(), regs->begin(), regs->end());
            break;
        }
        case TokenKind::String: {
            auto str = unquote(tok->text);
            if (!str) return fail("bad string literal");
            insn.literal = Literal{Literal::Kind::String, 0, *str};
            break;
        }
        case TokenKind::Label:
            insn.targets.push_back(tok->text);
            break;
        case TokenKind::MethodRef: {
            auto m = MethodSignature::parse(tok->text);
            if (!m) {
                if (opaque) break;
                return fail("bad method reference '" + tok->text + "'");
            }
            insn.method_ref = std::move(*m);
            break;
        }
        case TokenKind::FieldRef: {
            auto f = FieldId::parse(tok->text);
            if (!f) {
                if (opaque) break;
                return fail("bad field reference '" + tok->text + "'");
            }
            insn.field_ref = std::move(*f);
            break;
        }
        case TokenKind::Type:
            insn.type_ref = tok->text;
            break;
        case TokenKind::Number: {
            if (auto v = parse_integer(tok->text)) {
                insn.literal = Literal{Literal::Kind::Integer, *v, {}};
            } else {
                insn.literal = Literal{Literal::Kind::Raw, 0, tok->text};
            }
            break;
        }
        }
    }

    if (opaque) return insn;

    if (auto arity = fixed_arity(insn.family)) {
        if (insn.operands.size() < arity->min_regs || insn.operands.size() > arity->max_regs) {
            return fail(insn.mnemonic + " expects " + std::to_string(arity->min_regs) + " register operand(s), got " +
                        std::to_string(insn.operands.size()));
        }
    }
    switch (insn.family) {
    case OpFamily::Invoke:
        if (!insn.method_ref && insn.invoke_kind() != InvokeKind::Custom) {
            return fail(insn.mnemonic + " without a method reference");
        }
        break;
    case OpFamily::InstanceGet:
    case OpFamily::InstancePut:
    case OpFamily::StaticGet:
    case OpFamily::StaticPut:
        if (!insn.field_ref) return fail(insn.mnemonic + " without a field reference");
        break;
    case OpFamily::Goto:
    case OpFamily::If:
    case OpFamily::IfZero:
    case OpFamily::Switch:
    case OpFamily::FillArrayData:
        if (insn.targets.size() != 1) return fail(insn.mnemonic + " expects one label");
        break;
    case OpFamily::ConstString:
        if (!insn.literal || insn.literal->kind != Literal::Kind::String) {
            return fail(insn.mnemonic + " without a string literal");
        }
        break;
    case OpFamily::NewInstance:
    case OpFamily::NewArray:
    case OpFamily::CheckCast:
    case OpFamily::InstanceOf:
        if (!insn.type_ref) return fail(insn.mnemonic + " without a type");
        break;
    default:
        break;
    }
    return insn;
}

} // namespace gattcrypt::smali
