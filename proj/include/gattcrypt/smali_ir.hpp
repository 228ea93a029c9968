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

// In-memory representation of a baksmali-style disassembly tree.
//
// One SmaliProgram holds every class of one application together with the
// reverse indexes the tracer needs (call sites per callee, field writes and
// reads per field, implementers per interface). A program is immutable once
// built and may be shared between threads for read-only analysis.

#ifndef GATTCRYPT_SMALI_IR_HPP
#define GATTCRYPT_SMALI_IR_HPP

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gattcrypt::smali {

struct MethodSignature {
    std::string class_descriptor;
    std::string name;
    std::vector<std::string> param_descriptors;
    std::string return_descriptor;

    // "Lpkg/Cls;->name(params)ret"
    std::string to_string() const;
    // "(params)ret"
    std::string proto() const;
    static std::optional<MethodSignature> parse(std::string_view text);

    auto operator<=>(const MethodSignature &) const = default;
};

struct FieldId {
    std::string class_descriptor;
    std::string name;
    std::string type_descriptor;

    // "Lpkg/Cls;->name:Type"
    std::string to_string() const;
    static std::optional<FieldId> parse(std::string_view text);

    auto operator<=>(const FieldId &) const = default;
};

enum class RegisterKind : std::uint8_t { Local, Param };

struct Register {
    RegisterKind kind = RegisterKind::Local;
    std::uint32_t index = 0;

    static Register local(std::uint32_t i) { return {RegisterKind::Local, i}; }
    static Register param(std::uint32_t i) { return {RegisterKind::Param, i}; }

    std::string to_string() const;
    static std::optional<Register> parse(std::string_view text);

    auto operator<=>(const Register &) const = default;
};

enum class OpFamily : std::uint8_t {
    Nop,
    Move,
    MoveResult,
    MoveException,
    ReturnVoid,
    Return,
    Const,
    ConstString,
    ConstClass,
    Monitor,
    CheckCast,
    InstanceOf,
    ArrayLength,
    NewInstance,
    NewArray,
    FilledNewArray,
    FillArrayData,
    Throw,
    Goto,
    Switch,
    Compare,
    If,
    IfZero,
    ArrayGet,
    ArrayPut,
    InstanceGet,
    InstancePut,
    StaticGet,
    StaticPut,
    Invoke,
    UnaryOp,
    BinaryOp,
    BinaryOp2Addr,
    BinaryOpLit,
    Opaque,
};

std::string_view to_string(OpFamily family);

enum class InvokeKind : std::uint8_t { Virtual, Super, Direct, Static, Interface, Polymorphic, Custom };

struct Literal {
    enum class Kind : std::uint8_t { Integer, String, Raw };
    Kind kind = Kind::Integer;
    std::int64_t integer = 0;
    // Unescaped payload for String, token text for Raw.
    std::string text;

    bool operator==(const Literal &) const = default;
};

struct Instruction {
    std::string mnemonic;
    OpFamily family = OpFamily::Opaque;
    std::vector<Register> operands;
    std::optional<Literal> literal;
    std::optional<std::string> type_ref;
    std::optional<MethodSignature> method_ref;
    std::optional<FieldId> field_ref;
    // Branch targets and payload labels, without the leading ':'.
    std::vector<std::string> targets;
    std::uint32_t offset = 0;
    // Source line; diagnostics only, not part of equality.
    std::uint32_t line = 0;

    bool is_invoke() const { return family == OpFamily::Invoke; }
    bool is_range() const;
    InvokeKind invoke_kind() const;
    bool is_static_invoke() const { return is_invoke() && invoke_kind() == InvokeKind::Static; }

    // Canonical smali text; /range invokes render as "{vN .. vM}".
    std::string render() const;

    bool operator==(const Instruction &other) const;
};

namespace access {
inline constexpr std::uint32_t kPublic = 0x1;
inline constexpr std::uint32_t kPrivate = 0x2;
inline constexpr std::uint32_t kProtected = 0x4;
inline constexpr std::uint32_t kStatic = 0x8;
inline constexpr std::uint32_t kFinal = 0x10;
inline constexpr std::uint32_t kSynchronized = 0x20;
inline constexpr std::uint32_t kBridge = 0x40;
inline constexpr std::uint32_t kVarargs = 0x80;
inline constexpr std::uint32_t kNative = 0x100;
inline constexpr std::uint32_t kInterface = 0x200;
inline constexpr std::uint32_t kAbstract = 0x400;
inline constexpr std::uint32_t kStrict = 0x800;
inline constexpr std::uint32_t kSynthetic = 0x1000;
inline constexpr std::uint32_t kAnnotation = 0x2000;
inline constexpr std::uint32_t kEnum = 0x4000;
inline constexpr std::uint32_t kConstructor = 0x10000;
inline constexpr std::uint32_t kDeclaredSynchronized = 0x20000;

std::optional<std::uint32_t> parse_flag(std::string_view word);
} // namespace access

// Number of 32-bit registers a type descriptor occupies (2 for J and D).
std::uint32_t descriptor_width(std::string_view descriptor);

struct SmaliMethod {
    MethodSignature signature;
    std::uint32_t access_flags = 0;
    // Total frame size (locals + ins).
    std::uint32_t registers_declared = 0;
    std::vector<Instruction> instructions;
    std::map<std::string, std::uint32_t> labels;
    // Payload label -> branch labels of a packed/sparse switch table.
    std::map<std::string, std::vector<std::string>> switch_payloads;
    // Payload label -> element values of an .array-data table.
    std::map<std::string, std::vector<std::int64_t>> array_payloads;

    bool is_static() const { return (access_flags & access::kStatic) != 0; }
    bool is_abstract() const { return (access_flags & (access::kAbstract | access::kNative)) != 0; }

    // Registers holding incoming arguments, receiver included.
    std::uint32_t ins_count() const;
    std::uint32_t locals_count() const;

    // Folds the vN alias of a parameter slot onto its pN name.
    Register canonical(Register reg) const;
    // Argument slot (pN index, wide halves counted) of a canonical register.
    std::optional<std::uint32_t> param_slot(Register reg) const;
};

struct SmaliClass {
    std::string descriptor;
    std::string super_descriptor;
    std::vector<std::string> interfaces;
    std::uint32_t access_flags = 0;
    std::vector<SmaliMethod> methods;
    std::vector<FieldId> fields;
    std::string source_path;

    bool is_interface() const { return (access_flags & access::kInterface) != 0; }
    const SmaliMethod *find_method(std::string_view name, std::string_view proto) const;
};

struct CallSite {
    const SmaliMethod *method = nullptr;
    std::uint32_t offset = 0;

    const Instruction &instruction() const { return method->instructions[offset]; }
    bool operator==(const CallSite &other) const
    {
        return method == other.method && offset == other.offset;
    }
};

// Deterministic (class, method, offset) ordering.
bool site_less(const CallSite &lhs, const CallSite &rhs);

struct ParseError {
    std::string file;
    std::uint32_t line = 0;
    std::string reason;
};

struct ParseDiagnostics {
    std::vector<ParseError> errors;
    std::uint32_t files_seen = 0;
    std::uint32_t files_parsed = 0;
    std::uint32_t annotations_skipped = 0;
    std::uint32_t debug_directives_skipped = 0;
    std::uint32_t catch_directives_skipped = 0;
    std::uint32_t opaque_instructions = 0;
};

class EmptyInputError : public std::runtime_error {
public:
    explicit EmptyInputError(const std::string &what) : std::runtime_error(what) {}
};

class SmaliProgram {
public:
    SmaliProgram() = default;
    SmaliProgram(const SmaliProgram &) = delete;
    SmaliProgram &operator=(const SmaliProgram &) = delete;
    SmaliProgram(SmaliProgram &&) noexcept = default;
    SmaliProgram &operator=(SmaliProgram &&) noexcept = default;

    // Takes ownership of the classes and builds every index. Duplicate
    // descriptors keep the first definition and record a diagnostic.
    static SmaliProgram build(std::vector<SmaliClass> classes, ParseDiagnostics diagnostics = {});

    const std::map<std::string, SmaliClass> &classes() const { return classes_; }
    const SmaliClass *find_class(std::string_view descriptor) const;
    // Method declared exactly by signature.class_descriptor.
    const SmaliMethod *find_method(const MethodSignature &sig) const;
    // Walks the superclass chain the way invoke-virtual/super/static resolve.
    const SmaliMethod *resolve_method(const MethodSignature &sig) const;

    // Keyed by the signature as written at the call site.
    const std::map<MethodSignature, std::vector<CallSite>> &callers_index() const { return callers_; }
    const std::map<FieldId, std::vector<CallSite>> &field_writes_index() const { return field_writes_; }
    const std::map<FieldId, std::vector<CallSite>> &field_reads_index() const { return field_reads_; }
    // Interface descriptor -> classes implementing it, directly or through a
    // superclass or super-interface declared in this program.
    const std::map<std::string, std::vector<std::string>> &interface_impl_index() const
    {
        return interface_impls_;
    }
    // Class descriptor -> direct subclasses declared in this program.
    const std::map<std::string, std::vector<std::string>> &subclass_index() const { return subclasses_; }

    const ParseDiagnostics &diagnostics() const { return diagnostics_; }
    std::size_t method_count() const;

private:
    std::map<std::string, SmaliClass> classes_;
    std::map<MethodSignature, std::vector<CallSite>> callers_;
    std::map<FieldId, std::vector<CallSite>> field_writes_;
    std::map<FieldId, std::vector<CallSite>> field_reads_;
    std::map<std::string, std::vector<std::string>> interface_impls_;
    std::map<std::string, std::vector<std::string>> subclasses_;
    ParseDiagnostics diagnostics_;
};

struct ParsedFile {
    std::optional<SmaliClass> cls;
    std::vector<ParseError> errors;
    std::uint32_t annotations_skipped = 0;
    std::uint32_t debug_directives_skipped = 0;
    std::uint32_t catch_directives_skipped = 0;
    std::uint32_t opaque_instructions = 0;
};

// Parses the text of one .smali file. A file with structural errors yields no
// class; unknown opcodes never fail a file.
ParsedFile parse_smali_file(std::string_view text, const std::string &path);

// Parses one instruction line. `offset` is stored verbatim. Returns nullopt
// for lines that are not instructions (directives, labels, blanks).
std::optional<Instruction> parse_instruction(std::string_view line, std::uint32_t offset,
                                             std::string *error = nullptr);

// Loads every .smali file below a directory, or inside a .zip archive.
// Throws EmptyInputError when no smali file is found.
SmaliProgram parse_program(const std::filesystem::path &root);

// In-memory variant: (path, text) pairs.
SmaliProgram parse_program_sources(const std::vector<std::pair<std::string, std::string>> &sources);

using SignaturePredicate = std::function<bool(const MethodSignature &)>;

// Every call site whose method_ref satisfies the predicate, ordered by
// (class descriptor, method, offset).
std::vector<CallSite> find_invocations(const SmaliProgram &program, const SignaturePredicate &matcher);

struct DefUse {
    std::vector<Register> defs;
    std::vector<Register> uses;
    // For move-result*: offset of the invoke or filled-new-array it reads.
    std::optional<std::uint32_t> result_of;
};

// Per-instruction defined/used registers in canonical form, wide values
// expanded to both halves and /range operand lists already explicit.
std::vector<DefUse> def_use(const SmaliMethod &method);
DefUse def_use_of(const SmaliMethod &method, std::uint32_t offset);

// Canonical register(s) named by operand `pos` of `insn`: both halves for a
// wide value, empty when the operand does not exist.
std::vector<Register> operand_registers(const SmaliMethod &method, const Instruction &insn, std::size_t pos);

struct ControlFlow {
    std::vector<std::vector<std::uint32_t>> successors;
    std::vector<std::vector<std::uint32_t>> predecessors;
};

// Intraprocedural successor graph from labels, branches, switches and
// returns. Exception edges are not modelled.
ControlFlow control_flow(const SmaliMethod &method);

// Reads the .smali members of a zip archive as (name, text) pairs.
std::vector<std::pair<std::string, std::string>> read_zip_sources(const std::filesystem::path &archive);

} // namespace gattcrypt::smali

#endif // GATTCRYPT_SMALI_IR_HPP
