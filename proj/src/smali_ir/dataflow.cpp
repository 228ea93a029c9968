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

#include <algorithm>

namespace gattcrypt::smali {

namespace {

bool contains(std::string_view s, std::string_view needle) { return s.find(needle) != std::string_view::npos; }

bool is_wide_type_name(std::string_view t) { return t == "long" || t == "double"; }

// Whether operand `pos` of `insn` names the low half of a register pair.
bool operand_is_wide(const Instruction &insn, std::size_t pos)
{
    std::string_view m = insn.mnemonic;
    switch (insn.family) {
    case OpFamily::Move:
    case OpFamily::MoveResult:
    case OpFamily::Return:
    case OpFamily::Const:
        return contains(m, "-wide");
    case OpFamily::ArrayGet:
    case OpFamily::ArrayPut:
    case OpFamily::InstanceGet:
    case OpFamily::InstancePut:
    case OpFamily::StaticGet:
    case OpFamily::StaticPut:
        return pos == 0 && contains(m, "-wide");
    case OpFamily::Compare:
        return pos > 0 && (contains(m, "-long") || contains(m, "-double"));
    case OpFamily::UnaryOp: {
        auto to = m.find("-to-");
        if (to != std::string_view::npos) {
            return pos == 0 ? is_wide_type_name(m.substr(to + 4)) : is_wide_type_name(m.substr(0, to));
        }
        return contains(m, "-long") || contains(m, "-double");
    }
    case OpFamily::BinaryOp:
    case OpFamily::BinaryOp2Addr: {
        bool wide = contains(m, "-long") || contains(m, "-double");
        if (!wide) return false;
        bool shift = m.substr(0, 3) == "shl" || m.substr(0, 3) == "shr" || m.substr(0, 4) == "ushr";
        std::size_t last = insn.family == OpFamily::BinaryOp ? 2 : 1;
        return !(shift && pos == last);
    }
    default:
        return false;
    }
}

void push_reg(const SmaliMethod &method, const Instruction &insn, std::size_t pos, std::vector<Register> &out)
{
    if (pos >= insn.operands.size()) return;
    Register r = insn.operands[pos];
    out.push_back(method.canonical(r));
    if (operand_is_wide(insn, pos)) out.push_back(method.canonical(Register{r.kind, r.index + 1}));
}

void dedupe(std::vector<Register> &regs)
{
    std::vector<Register> out;
    for (const auto &r : regs) {
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    }
    regs = std::move(out);
}

} // namespace

DefUse def_use_of(const SmaliMethod &method, std::uint32_t offset)
{
    const Instruction &insn = method.instructions.at(offset);
    DefUse du;
    auto def = [&](std::size_t pos) { push_reg(method, insn, pos, du.defs); };
    auto use = [&](std::size_t pos) { push_reg(method, insn, pos, du.uses); };

    switch (insn.family) {
    case OpFamily::Nop:
    case OpFamily::ReturnVoid:
    case OpFamily::Goto:
        break;
    case OpFamily::Move:
    case OpFamily::InstanceOf:
    case OpFamily::ArrayLength:
    case OpFamily::NewArray:
    case OpFamily::UnaryOp:
    case OpFamily::BinaryOpLit:
    case OpFamily::InstanceGet:
        def(0);
        use(1);
        break;
    case OpFamily::MoveResult:
        def(0);
        if (offset > 0) {
            const auto &prev = method.instructions[offset - 1];
            if (prev.family == OpFamily::Invoke || prev.family == OpFamily::FilledNewArray) du.result_of = offset - 1;
        }
        break;
    case OpFamily::MoveException:
    case OpFamily::Const:
    case OpFamily::ConstString:
    case OpFamily::ConstClass:
    case OpFamily::NewInstance:
    case OpFamily::StaticGet:
        def(0);
        break;
    case OpFamily::CheckCast:
        def(0);
        use(0);
        break;
    case OpFamily::Return:
    case OpFamily::Monitor:
    case OpFamily::FillArrayData:
    case OpFamily::Throw:
    case OpFamily::Switch:
    case OpFamily::IfZero:
    case OpFamily::StaticPut:
        use(0);
        break;
    case OpFamily::If:
    case OpFamily::InstancePut:
        use(0);
        use(1);
        break;
    case OpFamily::Compare:
    case OpFamily::BinaryOp:
    case OpFamily::ArrayGet:
        def(0);
        use(1);
        use(2);
        break;
    case OpFamily::ArrayPut:
        use(0);
        use(1);
        use(2);
        break;
    case OpFamily::BinaryOp2Addr:
        def(0);
        use(0);
        use(1);
        break;
    case OpFamily::Invoke:
    case OpFamily::FilledNewArray:
    case OpFamily::Opaque:
        for (const auto &r : insn.operands) du.uses.push_back(method.canonical(r));
        break;
    }
    dedupe(du.defs);
    dedupe(du.uses);
    return du;
}

std::vector<Register> operand_registers(const SmaliMethod &method, const Instruction &insn, std::size_t pos)
{
    std::vector<Register> out;
    push_reg(method, insn, pos, out);
    return out;
}

std::vector<DefUse> def_use(const SmaliMethod &method)
{
    std::vector<DefUse> table;
    table.reserve(method.instructions.size());
    for (std::uint32_t i = 0; i < method.instructions.size(); ++i) table.push_back(def_use_of(method, i));
    return table;
}

ControlFlow control_flow(const SmaliMethod &method)
{
    const auto n = static_cast<std::uint32_t>(method.instructions.size());
    ControlFlow cf;
    cf.successors.resize(n);
    cf.predecessors.resize(n);
    auto edge = [&](std::uint32_t from, std::uint32_t to) {
        if (to >= n) return;
        auto &s = cf.successors[from];
        if (std::find(s.begin(), s.end(), to) == s.end()) {
            s.push_back(to);
            cf.predecessors[to].push_back(from);
        }
    };
    auto label_target = [&](const std::string &label) -> std::optional<std::uint32_t> {
        auto it = method.labels.find(label);
        if (it == method.labels.end()) return std::nullopt;
        return it->second;
    };

    for (std::uint32_t i = 0; i < n; ++i) {
        const auto &insn = method.instructions[i];
        switch (insn.family) {
        case OpFamily::Return:
        case OpFamily::ReturnVoid:
        case OpFamily::Throw:
            break;
        case OpFamily::Goto:
            if (auto t = label_target(insn.targets.front())) edge(i, *t);
            break;
        case OpFamily::If:
        case OpFamily::IfZero:
            edge(i, i + 1);
            if (auto t = label_target(insn.targets.front())) edge(i, *t);
            break;
        case OpFamily::Switch:
            edge(i, i + 1);
            if (auto it = method.switch_payloads.find(insn.targets.front()); it != method.switch_payloads.end()) {
                for (const auto &l : it->second) {
                    if (auto t = label_target(l)) edge(i, *t);
                }
            }
            break;
        default:
            edge(i, i + 1);
        }
    }
    return cf;
}

} // namespace gattcrypt::smali
