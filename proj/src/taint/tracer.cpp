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

#include "taint/tracer.hpp"

#include <algorithm>
#include <deque>
#include <memory>

namespace gattcrypt::taint {

using smali::CallSite;
using smali::OpFamily;
using smali::Register;
using smali::SmaliMethod;

namespace {

// Call site a callee frame was entered from, and the caller's own binding.
struct Ctx {
    CallSite site;
    std::shared_ptr<const Ctx> outer;
};
using CtxPtr = std::shared_ptr<const Ctx>;

std::string ctx_key(const CtxPtr &c)
{
    if (!c) return {};
    return c->site.method->signature.to_string() + "@" + std::to_string(c->site.offset);
}

struct Demand {
    Register reg;
    std::uint32_t at = 0;
};

struct Seed {
    Register reg;
    std::optional<std::uint32_t> after;
};

struct Item {
    const SmaliMethod *method = nullptr;
    FrameOrigin origin = FrameOrigin::SeedSite;
    int parent = -1;
    std::uint32_t depth = 0;
    CtxPtr ctx;
    std::vector<Demand> demands;
    std::vector<Seed> seeds;
};

struct Node {
    const SmaliMethod *method = nullptr;
    std::set<Register> tracked;
    FrameOrigin origin = FrameOrigin::SeedSite;
    int parent = -1;
};

class Tracer {
public:
    Tracer(TraceShared &shared, TracePass pass, Direction direction)
        : sh_(shared), ctx_(shared.ctx), rules_(shared.ctx.rules()), pass_(pass), direction_(direction)
    {
    }

    TraceOutcome run(const TaintSeed &seed)
    {
        Item root;
        root.method = seed.site.method;
        Register r = seed.site.method->canonical(seed.seed_register);
        if (direction_ == Direction::BackwardFromWrite) {
            root.demands.push_back({r, seed.site.offset});
        } else {
            root.seeds.push_back({r, seed.site.offset + 1});
        }
        queue_.push_back(std::move(root));
        while (!queue_.empty() && !stop_) {
            Item item = std::move(queue_.front());
            queue_.pop_front();
            if (std::chrono::steady_clock::now() > sh_.deadline) {
                out_.timed_out = true;
                out_.exhausted = true;
                break;
            }
            if (direction_ == Direction::BackwardFromWrite) {
                process_backward(item);
            } else {
                process_forward(item);
            }
        }
        return out_;
    }

private:
    bool associated() const { return pass_ == TracePass::Associated; }

    int open_node(const Item &item)
    {
        nodes_.push_back(Node{item.method, {}, item.origin, item.parent});
        sh_.visited_methods.emplace(item.method->signature, item.origin);
        return static_cast<int>(nodes_.size()) - 1;
    }

    bool visit(const VisitKey &key)
    {
        if (!visited_.insert(key).second) return false;
        if (visited_.size() > sh_.budget.max_visited) {
            out_.exhausted = true;
            stop_ = true;
            return false;
        }
        return true;
    }

    void enqueue(const Item &from, int node, const SmaliMethod *method, FrameOrigin origin, CtxPtr ctx,
                 std::vector<Demand> demands, std::vector<Seed> seeds)
    {
        if (!method || method->instructions.empty()) return;
        if (from.depth + 1 > sh_.budget.max_depth) {
            out_.exhausted = true;
            return;
        }
        Item next;
        next.method = method;
        next.origin = origin;
        next.parent = node;
        next.depth = from.depth + 1;
        next.ctx = std::move(ctx);
        next.demands = std::move(demands);
        next.seeds = std::move(seeds);
        queue_.push_back(std::move(next));
    }

    std::vector<TraceFrame> witness(int node) const
    {
        std::vector<TraceFrame> frames;
        for (int n = node; n >= 0; n = nodes_[n].parent) {
            const auto &nd = nodes_[n];
            frames.push_back(TraceFrame{nd.method->signature, {nd.tracked.begin(), nd.tracked.end()}, nd.origin});
        }
        std::reverse(frames.begin(), frames.end());
        return frames;
    }

    void hit(int node, const SmaliMethod &m, std::uint32_t offset)
    {
        TraceResult r;
        r.level = associated() ? Confidence::Medium : Confidence::High;
        r.witness = witness(node);
        r.crypto_call = CryptoCall{*m.instructions[offset].method_ref, m.signature, offset};
        out_.hit = std::move(r);
        stop_ = true;
    }

    std::vector<HopTarget> hop(const HopPoint &point)
    {
        TraceDiagnostics d;
        auto targets = cross_component_hop(point, ctx_.program(), &d);
        if (d.unresolved_extras > 0 && point.offset) {
            sh_.unresolved_extras.emplace(point.method->signature.to_string(), *point.offset);
        }
        return targets;
    }

    // ---- backward ----

    void process_backward(const Item &item)
    {
        const SmaliMethod &m = *item.method;
        const std::string ck = ctx_key(item.ctx);
        int node = -1;
        std::deque<Demand> local(item.demands.begin(), item.demands.end());
        auto demand = [&](const std::vector<Register> &regs, std::uint32_t at) {
            for (const auto &r : regs) local.push_back({r, at});
        };

        while (!local.empty() && !stop_) {
            Demand d = local.front();
            local.pop_front();
            if (!visit(VisitKey{m.signature, d.reg, direction_, d.at, ck})) continue;
            if (node < 0) node = open_node(item);
            nodes_[node].tracked.insert(d.reg);

            auto rd = ctx_.reaching(m, d.reg, d.at);
            for (auto t : rd.touches) {
                if (stop_) return;
                backward_touch(item, node, t, d.reg, demand);
            }
            for (auto def : rd.defs) {
                if (stop_) return;
                backward_def(item, node, def, demand);
            }
            if (rd.reaches_entry && !stop_) backward_entry(item, node, d.reg);
        }
    }

    template <typename DemandFn>
    void backward_touch(const Item &item, int node, std::uint32_t t, Register r, DemandFn &demand)
    {
        const SmaliMethod &m = *item.method;
        const auto &insn = m.instructions[t];
        if (insn.family == OpFamily::ArrayPut) {
            demand(operand_regs(m, t, 0), t);
            return;
        }
        if (!insn.is_invoke() || !insn.method_ref) return;
        auto args = invoke_args(m, t);
        std::vector<Register> others;
        for (const auto &a : args) {
            if (a != r) others.push_back(a);
        }
        if (is_constructor_call(insn) && args.front() == r) {
            if (rules_.is_crypto(*insn.method_ref)) return hit(node, m, t);
            demand(others, t);
            return;
        }
        if (associated()) {
            if (rules_.is_crypto(*insn.method_ref)) return hit(node, m, t);
            demand(others, t);
        }
    }

    template <typename DemandFn>
    void backward_def(const Item &item, int node, std::uint32_t d, DemandFn &demand)
    {
        const SmaliMethod &m = *item.method;
        const auto &insn = m.instructions[d];
        const auto &du = ctx_.defuse(m)[d];
        switch (insn.family) {
        case OpFamily::Move:
        case OpFamily::UnaryOp:
        case OpFamily::BinaryOp:
        case OpFamily::BinaryOp2Addr:
        case OpFamily::BinaryOpLit:
        case OpFamily::Compare:
        case OpFamily::InstanceOf:
        case OpFamily::ArrayLength:
            demand(du.uses, d);
            break;
        case OpFamily::ArrayGet:
            demand(operand_regs(m, d, 1), d);
            break;
        case OpFamily::MoveResult: {
            if (!du.result_of) break;
            const auto i = *du.result_of;
            if (m.instructions[i].family == OpFamily::FilledNewArray) {
                demand(invoke_args(m, i), i);
            } else {
                backward_invoke_result(item, node, i, demand);
            }
            break;
        }
        case OpFamily::InstanceGet:
        case OpFamily::StaticGet: {
            if (!insn.field_ref) break;
            const auto &writes = ctx_.program().field_writes_index();
            auto it = writes.find(*insn.field_ref);
            if (it == writes.end()) break;
            for (const auto &site : it->second) {
                std::vector<Demand> ds;
                for (const auto &r : operand_regs(*site.method, site.offset, 0)) ds.push_back({r, site.offset});
                enqueue(item, node, site.method, FrameOrigin::FieldAssignment, nullptr, std::move(ds), {});
            }
            break;
        }
        default:
            // Constants, allocations, caught exceptions: the value originates here.
            break;
        }
    }

    template <typename DemandFn>
    void backward_invoke_result(const Item &item, int node, std::uint32_t i, DemandFn &demand)
    {
        const SmaliMethod &m = *item.method;
        const auto &insn = m.instructions[i];
        if (!insn.method_ref) return;
        const auto &sig = *insn.method_ref;
        if (rules_.is_crypto(sig)) return hit(node, m, i);

        if (is_intent_getter(sig)) {
            for (auto &t : hop(HopPoint{Direction::BackwardFromWrite, &m, i})) {
                std::vector<Demand> ds;
                for (const auto &r : t.frame.tracked) ds.push_back({r, *t.anchor});
                enqueue(item, node, t.method, FrameOrigin::IntentExtra, nullptr, std::move(ds), {});
            }
        }

        auto descend = [&](const SmaliMethod *callee, FrameOrigin origin) {
            std::vector<Demand> ds;
            for (std::uint32_t j = 0; j < callee->instructions.size(); ++j) {
                if (callee->instructions[j].family != OpFamily::Return) continue;
                for (const auto &r : operand_regs(*callee, j, 0)) ds.push_back({r, j});
            }
            if (ds.empty()) return;
            auto c = std::make_shared<const Ctx>(Ctx{CallSite{&m, i}, item.ctx});
            enqueue(item, node, callee, origin, std::move(c), std::move(ds), {});
        };
        if (const auto *exact = ctx_.resolve_exact(insn)) descend(exact, FrameOrigin::CalleeReturn);
        if (associated()) {
            for (const auto *t : ctx_.dispatch_targets(insn)) descend(t, FrameOrigin::InterfaceDispatch);
            demand(invoke_args(m, i), i);
        }
    }

    void backward_entry(const Item &item, int node, Register r)
    {
        const SmaliMethod &m = *item.method;
        auto slot = m.param_slot(r);
        if (!slot) return;
        auto to_caller = [&](const CallSite &site, FrameOrigin origin, CtxPtr outer) {
            const auto &ops = site.instruction().operands;
            if (*slot >= ops.size()) return;
            std::vector<Demand> ds{{site.method->canonical(ops[*slot]), site.offset}};
            enqueue(item, node, site.method, origin, std::move(outer), std::move(ds), {});
        };
        if (item.ctx) {
            to_caller(item.ctx->site, FrameOrigin::CallerArgument, item.ctx->outer);
            return;
        }
        for (const auto &site : ctx_.direct_callers(&m)) to_caller(site, FrameOrigin::CallerArgument, nullptr);
        if (associated()) {
            for (const auto &site : ctx_.dispatch_callers(&m)) {
                to_caller(site, FrameOrigin::InterfaceDispatch, nullptr);
            }
        }
        if (*slot == 1) {
            for (auto &t : hop(HopPoint{Direction::BackwardFromWrite, &m, std::nullopt})) {
                std::vector<Demand> ds;
                for (const auto &reg : t.frame.tracked) ds.push_back({reg, *t.anchor});
                enqueue(item, node, t.method, FrameOrigin::ThreadHandoff, nullptr, std::move(ds), {});
            }
        }
    }

    // ---- forward ----

    void process_forward(const Item &item)
    {
        const SmaliMethod &m = *item.method;
        const std::string ck = ctx_key(item.ctx);
        const std::uint32_t locals = m.locals_count();
        const std::uint32_t nregs = m.registers_declared;
        const std::uint32_t result_slot = nregs;
        const auto n = static_cast<std::uint32_t>(m.instructions.size());

        auto slot_of = [&](Register r) -> std::int64_t {
            r = m.canonical(r);
            std::uint32_t s = r.kind == smali::RegisterKind::Local ? r.index : locals + r.index;
            return s < nregs ? static_cast<std::int64_t>(s) : -1;
        };

        std::vector<Seed> fresh;
        for (const auto &s : item.seeds) {
            std::int64_t anchor = s.after ? static_cast<std::int64_t>(*s.after) : -1;
            if (visit(VisitKey{m.signature, s.reg, direction_, anchor, ck})) fresh.push_back(s);
            if (stop_) return;
        }
        if (fresh.empty()) return;
        const int node = open_node(item);

        const auto &cfg = ctx_.cfg(m);
        const auto &du = ctx_.defuse(m);
        std::vector<std::vector<char>> in(n, std::vector<char>(nregs + 1, 0));
        std::deque<std::uint32_t> work;
        std::vector<char> queued(n, 0);
        auto push = [&](std::uint32_t i) {
            if (!queued[i]) {
                queued[i] = 1;
                work.push_back(i);
            }
        };
        for (const auto &s : fresh) {
            auto slot = slot_of(s.reg);
            if (slot < 0) continue;
            if (!s.after) {
                in[0][slot] = 1;
                push(0);
            } else if (*s.after < n) {
                for (auto succ : cfg.successors[*s.after]) {
                    in[succ][slot] = 1;
                    push(succ);
                }
            }
        }

        auto any = [&](const std::vector<char> &st, const std::vector<Register> &regs) {
            for (const auto &r : regs) {
                auto s = slot_of(r);
                if (s >= 0 && st[s]) return true;
            }
            return false;
        };
        auto assign = [&](std::vector<char> &st, const std::vector<Register> &regs, bool v) {
            for (const auto &r : regs) {
                auto s = slot_of(r);
                if (s >= 0) st[s] = v ? 1 : 0;
            }
        };

        while (!work.empty()) {
            auto i = work.front();
            work.pop_front();
            queued[i] = 0;
            const auto &insn = m.instructions[i];
            const auto &st = in[i];
            std::vector<char> out = st;
            bool result = false;
            switch (insn.family) {
            case OpFamily::Move:
            case OpFamily::UnaryOp:
            case OpFamily::BinaryOp:
            case OpFamily::BinaryOp2Addr:
            case OpFamily::BinaryOpLit:
            case OpFamily::Compare:
            case OpFamily::InstanceOf:
            case OpFamily::ArrayLength:
                assign(out, du[i].defs, any(st, du[i].uses));
                break;
            case OpFamily::MoveResult:
                assign(out, du[i].defs, st[result_slot] != 0);
                break;
            case OpFamily::ArrayGet:
                assign(out, du[i].defs, any(st, operand_regs(m, i, 1)));
                break;
            case OpFamily::ArrayPut:
                if (any(st, operand_regs(m, i, 0))) assign(out, operand_regs(m, i, 1), true);
                break;
            case OpFamily::CheckCast:
                break;
            case OpFamily::Invoke: {
                auto args = invoke_args(m, i);
                result = any(st, args);
                if (is_constructor_call(insn) && any(st, std::vector<Register>(args.begin() + 1, args.end()))) {
                    assign(out, {args.front()}, true);
                }
                break;
            }
            case OpFamily::FilledNewArray:
                result = any(st, invoke_args(m, i));
                break;
            default:
                assign(out, du[i].defs, false);
            }
            out[result_slot] = result ? 1 : 0;
            for (auto succ : cfg.successors[i]) {
                bool changed = false;
                for (std::uint32_t s = 0; s <= nregs; ++s) {
                    if (out[s] && !in[succ][s]) {
                        in[succ][s] = 1;
                        changed = true;
                    }
                }
                if (changed) push(succ);
            }
        }

        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t s = 0; s < nregs; ++s) {
                if (in[i][s]) nodes_[node].tracked.insert(m.canonical(Register::local(s)));
            }
        }

        for (std::uint32_t i = 0; i < n && !stop_; ++i) {
            forward_events(item, node, i, in[i], any);
        }
    }

    template <typename AnyFn>
    void forward_events(const Item &item, int node, std::uint32_t i, const std::vector<char> &st, AnyFn &any)
    {
        const SmaliMethod &m = *item.method;
        const auto &insn = m.instructions[i];
        switch (insn.family) {
        case OpFamily::Invoke: {
            if (!insn.method_ref) return;
            auto args = invoke_args(m, i);
            std::vector<Register> tainted_params;
            for (std::uint32_t k = 0; k < args.size(); ++k) {
                if (any(st, {args[k]})) tainted_params.push_back(Register::param(k));
            }
            if (tainted_params.empty()) return;
            const auto &sig = *insn.method_ref;
            if (rules_.is_crypto(sig)) return hit(node, m, i);

            if (is_intent_putter(sig) || sig.name == "execute" || sig.name == "executeOnExecutor") {
                for (auto &t : hop(HopPoint{Direction::ForwardFromRead, &m, i})) {
                    std::vector<Seed> seeds;
                    for (const auto &r : t.frame.tracked) seeds.push_back({r, t.anchor});
                    enqueue(item, node, t.method, t.frame.origin, nullptr, {}, std::move(seeds));
                }
            }
            auto descend = [&](const SmaliMethod *callee, FrameOrigin origin) {
                std::vector<Seed> seeds;
                for (const auto &p : tainted_params) seeds.push_back({p, std::nullopt});
                auto c = std::make_shared<const Ctx>(Ctx{CallSite{&m, i}, item.ctx});
                enqueue(item, node, callee, origin, std::move(c), {}, std::move(seeds));
            };
            if (const auto *exact = ctx_.resolve_exact(insn)) descend(exact, FrameOrigin::CallerArgument);
            if (associated()) {
                for (const auto *t : ctx_.dispatch_targets(insn)) descend(t, FrameOrigin::InterfaceDispatch);
            }
            return;
        }
        case OpFamily::InstancePut:
        case OpFamily::StaticPut: {
            if (!insn.field_ref || !any(st, operand_regs(m, i, 0))) return;
            const auto &reads = ctx_.program().field_reads_index();
            auto it = reads.find(*insn.field_ref);
            if (it == reads.end()) return;
            for (const auto &site : it->second) {
                std::vector<Seed> seeds;
                for (const auto &r : operand_regs(*site.method, site.offset, 0)) seeds.push_back({r, site.offset});
                enqueue(item, node, site.method, FrameOrigin::FieldAssignment, nullptr, {}, std::move(seeds));
            }
            return;
        }
        case OpFamily::Return: {
            if (!any(st, operand_regs(m, i, 0))) return;
            auto to_caller = [&](const CallSite &site, FrameOrigin origin) {
                const auto next = site.offset + 1;
                if (next >= site.method->instructions.size()) return;
                const auto &mr = site.method->instructions[next];
                if (mr.family != OpFamily::MoveResult) return;
                std::vector<Seed> seeds;
                for (const auto &r : operand_regs(*site.method, next, 0)) seeds.push_back({r, next});
                enqueue(item, node, site.method, origin, nullptr, {}, std::move(seeds));
            };
            if (!item.ctx) {
                for (const auto &site : ctx_.direct_callers(&m)) to_caller(site, FrameOrigin::CalleeReturn);
                if (associated()) {
                    for (const auto &site : ctx_.dispatch_callers(&m)) to_caller(site, FrameOrigin::InterfaceDispatch);
                }
            }
            for (auto &t : hop(HopPoint{Direction::ForwardFromRead, &m, i})) {
                std::vector<Seed> seeds;
                for (const auto &r : t.frame.tracked) seeds.push_back({r, t.anchor});
                enqueue(item, node, t.method, FrameOrigin::ThreadHandoff, nullptr, {}, std::move(seeds));
            }
            return;
        }
        default:
            return;
        }
    }

    TraceShared &sh_;
    AnalysisContext &ctx_;
    const RuleSet &rules_;
    TracePass pass_;
    Direction direction_;
    std::deque<Item> queue_;
    std::vector<Node> nodes_;
    std::set<VisitKey> visited_;
    bool stop_ = false;
    TraceOutcome out_;
};

} // namespace

TraceOutcome run_trace(const TaintSeed &seed, TracePass pass, TraceShared &shared)
{
    Tracer tracer(shared, pass, seed.direction);
    return tracer.run(seed);
}

} // namespace gattcrypt::taint
