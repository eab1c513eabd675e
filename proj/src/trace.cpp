#include "austere/trace.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>

#include "austere/errors.hpp"

namespace austere {

namespace {

std::uint64_t fnv(std::uint64_t h, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void erase_one_from_back(std::vector<NodeId>& v, NodeId id) {
    for (auto it = v.rbegin(); it != v.rend(); ++it) {
        if (*it == id) {
            v.erase(std::next(it).base());
            return;
        }
    }
}

bool forwards_value(NodeRole r) {
    return r == NodeRole::Lookup || r == NodeRole::If || r == NodeRole::CompoundCall || r == NodeRole::MemCall ||
           r == NodeRole::ScopeInclude;
}

void check_arity(const std::string& name, std::size_t lo, std::size_t hi, std::size_t n) {
    if (n < lo || n > hi)
        throw EvalError(name + ": wrong number of arguments (" + std::to_string(n) + ")");
}

}  // namespace

NodeKind kind_of(NodeRole role) {
    switch (role) {
        case NodeRole::Constant: return NodeKind::Constant;
        case NodeRole::Lookup: return NodeKind::Lookup;
        case NodeRole::Stochastic: return NodeKind::StochasticApplication;
        default: return NodeKind::DeterministicApplication;
    }
}

const char* to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Constant: return "Constant";
        case NodeKind::Lookup: return "Lookup";
        case NodeKind::DeterministicApplication: return "DeterministicApplication";
        case NodeKind::StochasticApplication: return "StochasticApplication";
    }
    return "?";
}

void ScopeRegistry::add(ScopeEntry entry) { entries_.push_back(std::move(entry)); }

bool ScopeRegistry::has_scope(const std::string& scope) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const ScopeEntry& e) { return e.scope == scope; });
}

std::vector<const ScopeEntry*> ScopeRegistry::find(const std::string& scope) const {
    std::vector<const ScopeEntry*> out;
    for (const auto& e : entries_)
        if (e.scope == scope) out.push_back(&e);
    return out;
}

std::vector<const ScopeEntry*> ScopeRegistry::find(const std::string& scope, const Value& label) const {
    std::vector<const ScopeEntry*> out;
    for (const auto& e : entries_)
        if (e.scope == scope && e.label == label) out.push_back(&e);
    return out;
}

void ScopeRegistry::erase_if(const std::function<bool(const ScopeEntry&)>& pred) {
    std::erase_if(entries_, pred);
}

NodeId Trace::new_node(NodeRole role, const Expression* expr) {
    const auto id = static_cast<NodeId>(nodes_.size());
    Node& n = nodes_.emplace_back();
    n.role = role;
    n.order = ++order_clock_;
    n.expr = expr;
    if (!existence_scopes_.empty()) existence_scopes_.back().push_back(id);
    return id;
}

void Trace::link(NodeId parent, NodeId child) {
    nodes_[child].parents.push_back(parent);
    nodes_[parent].children.push_back(child);
}

void Trace::link_exist(NodeId parent, NodeId child) {
    nodes_[child].exist_parents.push_back(parent);
    nodes_[parent].exist_children.push_back(child);
}

std::vector<Value> Trace::values_of(std::span<const NodeId> ids) {
    std::vector<Value> out;
    out.reserve(ids.size());
    for (NodeId id : ids) out.push_back(value(id));
    return out;
}

NodeId Trace::eval_directive(const Directive& d, Rng& rng) {
    NodeId root = kNoNode;
    if (const auto* a = std::get_if<AssumeDirective>(&d.node)) {
        if (globals_.contains(a->name)) throw EvalError("symbol '" + a->name + "' is already assumed");
        programs_.push_back(a->expr);
        root = eval(*a->expr, nullptr, rng);
        globals_.emplace(a->name, root);
    } else if (const auto* o = std::get_if<ObserveDirective>(&d.node)) {
        const auto* c = std::get_if<ConstantExpr>(&o->value->node);
        if (!c) throw EvalError("observed value must be a constant; desugar placeholders first");
        programs_.push_back(o->expr);
        root = eval(*o->expr, nullptr, rng);
        observe(root, c->value);
    } else if (const auto* p = std::get_if<PredictDirective>(&d.node)) {
        programs_.push_back(p->expr);
        root = eval(*p->expr, nullptr, rng);
        predicts_.emplace_back(p->label, root);
    } else {
        throw EvalError("infer directives are executed by the inference runner");
    }
    roots_.push_back(root);
    return root;
}

void Trace::observe(NodeId root, const Value& v) {
    const auto target = stochastic_source(root);
    if (!target) throw SupportError("observed expression is deterministic");
    Node& t = nodes_[*target];
    if (t.observed) throw SupportError("random choice is already observed");
    double lp;
    try {
        lp = log_pdf(distribution(*target).family, parameters(*target), v);
    } catch (const Error& e) {
        throw SupportError(std::string("observed value rejected: ") + e.what());
    }
    if (lp == -std::numeric_limits<double>::infinity() || std::isnan(lp))
        throw SupportError("observed value " + v.to_string() + " is outside the support");
    t.value = v;
    t.version = next_version();
    t.observed = true;
    t.log_density = lp;
    t.density_version = next_version();
    const NodeId id = *target;
    scopes_.erase_if([id](const ScopeEntry& e) { return e.principal == id; });
    touch();
}

NodeId Trace::eval(const Expression& e, const FramePtr& env, Rng& rng) {
    if (const auto* c = std::get_if<ConstantExpr>(&e.node)) {
        const NodeId id = new_node(NodeRole::Constant, &e);
        nodes_[id].value = c->value;
        nodes_[id].version = next_version();
        return id;
    }
    if (const auto* s = std::get_if<SymbolExpr>(&e.node)) return eval_symbol(*s, e, env);
    if (const auto* l = std::get_if<LambdaExpr>(&e.node)) {
        const NodeId id = new_node(NodeRole::Constant, &e);
        nodes_[id].value = Value::procedure(
            std::make_shared<const Procedure>(Procedure{CompoundProcedure{l->params, l->body.get(), env}}));
        nodes_[id].version = next_version();
        return id;
    }
    if (const auto* i = std::get_if<IfExpr>(&e.node)) return eval_if(*i, e, env, rng);
    if (const auto* c = std::get_if<CombinationExpr>(&e.node)) return eval_combination(*c, e, env, rng);
    const auto& p = std::get<PlaceholderExpr>(e.node);
    throw UnboundParameter(p.name);
}

NodeId Trace::eval_symbol(const SymbolExpr& s, const Expression& e, const FramePtr& env) {
    if (is_reserved_symbol(s.name)) throw EvalError("special form '" + s.name + "' used as a value");
    NodeId source = kNoNode;
    for (const Frame* f = env.get(); f && source == kNoNode; f = f->parent.get()) {
        for (const auto& [name, id] : f->bindings) {
            if (name == s.name) {
                source = id;
                break;
            }
        }
    }
    if (source == kNoNode) {
        if (auto it = globals_.find(s.name); it != globals_.end()) source = it->second;
    }
    if (source != kNoNode) {
        const Value v = value(source);
        const NodeId id = new_node(NodeRole::Lookup, &e);
        link(source, id);
        nodes_[id].value = v;
        nodes_[id].version = next_version();
        return id;
    }
    ProcedurePtr builtin = builtin_procedure(s.name);
    if (!builtin) throw EvalError("unbound symbol '" + s.name + "'");
    const NodeId id = new_node(NodeRole::Lookup, &e);
    nodes_[id].value = Value::procedure(std::move(builtin));
    nodes_[id].version = next_version();
    return id;
}

NodeId Trace::eval_if(const IfExpr& i, const Expression& e, const FramePtr& env, Rng& rng) {
    const NodeId pred = eval(*i.predicate, env, rng);
    const Value& pv = value(pred);
    if (!pv.is_boolean()) throw EvalError("if predicate must be boolean");
    const bool which = pv.as_bool();
    existence_scopes_.emplace_back();
    NodeId result;
    try {
        result = eval(which ? *i.consequent : *i.alternate, env, rng);
    } catch (...) {
        existence_scopes_.pop_back();
        throw;
    }
    const std::vector<NodeId> created = std::move(existence_scopes_.back());
    existence_scopes_.pop_back();
    const NodeId id = new_node(NodeRole::If, &e);
    link(pred, id);
    link(result, id);
    for (NodeId c : created) link_exist(pred, c);
    Node& n = nodes_[id];
    n.env = env;
    n.branch = which;
    n.value = nodes_[result].value;
    n.version = next_version();
    return id;
}

NodeId Trace::eval_combination(const CombinationExpr& c, const Expression& e, const FramePtr& env, Rng& rng) {
    if (const auto* head = std::get_if<SymbolExpr>(&c.op->node)) {
        if (head->name == "scope_include") return eval_scope_include(c, e, env, rng);
        if (head->name == "mem") return eval_mem(c, e, env, rng);
    }
    const NodeId op = eval(*c.op, env, rng);
    std::vector<NodeId> args;
    args.reserve(c.operands.size());
    for (const auto& o : c.operands) args.push_back(eval(*o, env, rng));
    const Value& ov = value(op);
    if (!ov.is_procedure()) throw EvalError("operator is not a procedure: " + ov.to_string());
    const ProcedurePtr proc = ov.as_procedure();
    return apply(proc, op, args, &e, rng);
}

NodeId Trace::eval_scope_include(const CombinationExpr& c, const Expression& e, const FramePtr& env, Rng& rng) {
    check_arity("scope_include", 2, 3, c.operands.size());
    std::vector<NodeId> parents;
    for (const auto& o : c.operands) parents.push_back(eval(*o, env, rng));
    const Value& scope = value(parents.front());
    if (!scope.is_symbol()) throw EvalError("scope_include scope must be a quoted symbol");
    const std::string scope_name = scope.as_symbol();
    const Value label = c.operands.size() == 3 ? value(parents[1]) : Value::real(0.0);
    const NodeId id = new_node(NodeRole::ScopeInclude, &e);
    for (NodeId p : parents) link(p, id);
    nodes_[id].value = nodes_[parents.back()].value;
    nodes_[id].version = next_version();
    if (auto src = registration_source(parents.back()); src && !nodes_[*src].observed)
        scopes_.add({scope_name, label, *src, id});
    return id;
}

namespace {

// Operand values of a node, on the stack for the usual short argument lists.
class OperandValues {
public:
    OperandValues(const std::vector<Node>& nodes, const std::vector<NodeId>& parents) {
        const std::size_t n = parents.size() - 1;
        if (n > small_.size()) large_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Value& v = nodes[parents[i + 1]].value;
            if (n > small_.size())
                large_.push_back(v);
            else
                small_[i] = v;
        }
        view_ = n > small_.size() ? std::span<const Value>(large_) : std::span<const Value>(small_.data(), n);
    }
    std::span<const Value> span() const { return view_; }

private:
    std::array<Value, 4> small_;
    std::vector<Value> large_;
    std::span<const Value> view_;
};

}  // namespace

NodeId Trace::eval_mem(const CombinationExpr& c, const Expression& e, const FramePtr& env, Rng& rng) {
    check_arity("mem", 1, 1, c.operands.size());
    const NodeId f = eval(*c.operands[0], env, rng);
    const Value fv = value(f);
    if (!fv.is_procedure()) throw EvalError("mem expects a procedure");
    const std::size_t table = memo_tables_.size();
    memo_tables_.emplace_back();
    const NodeId id = new_node(NodeRole::MakeMem, &e);
    link(f, id);
    nodes_[id].value =
        Value::procedure(std::make_shared<const Procedure>(Procedure{MemoizedProcedure{fv.as_procedure(), table}}));
    nodes_[id].version = next_version();
    return id;
}

NodeId Trace::apply(const ProcedurePtr& proc, NodeId op, const std::vector<NodeId>& args, const Expression* expr,
                    Rng& rng) {
    if (const auto* const* det = std::get_if<const DeterministicPrimitive*>(&proc->impl)) {
        check_arity(std::string((*det)->name), (*det)->min_arity, (*det)->max_arity, args.size());
        Value v = (*det)->fn(values_of(args));
        const NodeId id = new_node(NodeRole::Primitive, expr);
        link(op, id);
        for (NodeId a : args) link(a, id);
        nodes_[id].value = std::move(v);
        nodes_[id].version = next_version();
        return id;
    }
    if (const auto* const* dist = std::get_if<const PrimitiveDistribution*>(&proc->impl)) {
        check_arity(std::string((*dist)->name), (*dist)->arity, (*dist)->arity, args.size());
        const std::vector<Value> params = values_of(args);
        Value x = sample((*dist)->family, params, rng);
        const double lp = log_pdf((*dist)->family, params, x);
        const NodeId id = new_node(NodeRole::Stochastic, expr);
        link(op, id);
        for (NodeId a : args) link(a, id);
        Node& n = nodes_[id];
        n.value = std::move(x);
        n.version = next_version();
        n.log_density = lp;
        n.density_version = next_version();
        return id;
    }
    if (std::holds_alternative<CompoundProcedure>(proc->impl)) {
        const NodeId result = apply_body(proc, args, expr, rng);
        const NodeId id = new_node(NodeRole::CompoundCall, expr);
        link(op, id);
        for (NodeId a : args) link(a, id);
        link(result, id);
        nodes_[id].value = nodes_[result].value;
        nodes_[id].version = next_version();
        return id;
    }
    const auto& memo = std::get<MemoizedProcedure>(proc->impl);
    std::vector<Value> key = values_of(args);
    NodeId root;
    if (auto it = memo_tables_[memo.table].find(key); it != memo_tables_[memo.table].end()) {
        root = it->second;
    } else {
        existence_scopes_.emplace_back();
        try {
            root = apply_body(memo.inner, args, expr, rng);
        } catch (...) {
            existence_scopes_.pop_back();
            throw;
        }
        const std::vector<NodeId> created = std::move(existence_scopes_.back());
        existence_scopes_.pop_back();
        for (NodeId a : args)
            for (NodeId c : created) link_exist(a, c);
        memo_tables_[memo.table].emplace(key, root);
        family_keys_[root] = {memo.table, std::move(key)};
    }
    const NodeId id = new_node(NodeRole::MemCall, expr);
    link(op, id);
    for (NodeId a : args) link(a, id);
    link(root, id);
    nodes_[id].value = nodes_[root].value;
    nodes_[id].version = next_version();
    return id;
}

// Evaluates the body of a procedure without creating a call node.
NodeId Trace::apply_body(const ProcedurePtr& proc, const std::vector<NodeId>& args, const Expression* expr, Rng& rng) {
    if (const auto* c = std::get_if<CompoundProcedure>(&proc->impl)) {
        check_arity("lambda", c->params.size(), c->params.size(), args.size());
        auto frame = std::make_shared<Frame>();
        frame->parent = c->env;
        for (std::size_t i = 0; i < args.size(); ++i) frame->bindings.emplace_back(c->params[i], args[i]);
        return eval(*c->body, frame, rng);
    }
    const NodeId op = new_node(NodeRole::Constant, expr);
    nodes_[op].value = Value::procedure(proc);
    nodes_[op].version = next_version();
    return apply(proc, op, args, expr, rng);
}

std::optional<NodeId> Trace::stochastic_source(NodeId id) const {
    while (true) {
        const Node& n = nodes_[id];
        if (n.stochastic()) return id;
        if (!forwards_value(n.role) || n.parents.empty()) return std::nullopt;
        id = n.parents.back();
    }
}

std::optional<NodeId> Trace::registration_source(NodeId id) const {
    if (auto s = stochastic_source(id)) return s;
    while (forwards_value(nodes_[id].role) && !nodes_[id].parents.empty()) id = nodes_[id].parents.back();
    const Node& n = nodes_[id];
    if (n.role != NodeRole::Primitive) return std::nullopt;
    std::optional<NodeId> found;
    for (std::size_t i = 1; i < n.parents.size(); ++i) {
        if (auto s = registration_source(n.parents[i])) {
            if (found) return std::nullopt;
            found = s;
        }
    }
    return found;
}

const Value& Trace::value(NodeId id) {
    refresh(id);
    return nodes_[id].value;
}

void Trace::refresh(NodeId id) {
    Node& n = nodes_[id];
    if (n.detached) throw InternalError("read of detached node " + std::to_string(id));
    if (!n.derived() || n.fixed || n.checked == epoch_) return;
    bool stale = false;
    bool fixed = true;
    for (NodeId p : n.parents) {
        refresh(p);
        const Node& pn = nodes_[p];
        if (pn.version > n.version) stale = true;
        fixed = fixed && (pn.role == NodeRole::Constant || pn.fixed);
    }
    if (stale) {
        recompute_value(id);
        ++stats_.stale_repairs;
    }
    n.checked = epoch_;
    n.fixed = fixed;
}

void Trace::refresh_density(NodeId id) {
    Node& n = nodes_[id];
    if (n.detached) throw InternalError("read of detached node " + std::to_string(id));
    bool stale = n.version > n.density_version;
    for (NodeId p : n.parents) {
        refresh(p);
        if (nodes_[p].version > n.density_version) stale = true;
    }
    if (stale) {
        recompute_density(id);
        ++stats_.stale_repairs;
    }
}

double Trace::node_log_density(NodeId id) {
    refresh_density(id);
    return nodes_[id].log_density;
}

double Trace::log_density() {
    double total = 0.0;
    for (NodeId id = 0; id < nodes_.size(); ++id)
        if (nodes_[id].alive && nodes_[id].stochastic()) total += node_log_density(id);
    return total;
}

bool Trace::is_stale(NodeId id) const {
    const Node& n = nodes_[id];
    if (n.stochastic()) {
        if (n.version > n.density_version) return true;
        for (NodeId p : n.parents)
            if (is_stale(p) || nodes_[p].version > n.density_version) return true;
        return false;
    }
    if (!n.derived()) return false;
    for (NodeId p : n.parents)
        if (is_stale(p) || nodes_[p].version > n.version) return true;
    return false;
}

void Trace::refresh_all() {
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        if (!nodes_[id].alive) continue;
        if (nodes_[id].stochastic())
            refresh_density(id);
        else
            refresh(id);
    }
}

void Trace::recompute_value(NodeId id) {
    Node& n = nodes_[id];
    switch (n.role) {
        case NodeRole::Constant:
        case NodeRole::Stochastic: throw InternalError("recompute of a non-derived node");
        case NodeRole::MakeMem: break;
        case NodeRole::Lookup:
            if (!n.parents.empty()) n.value = nodes_[n.parents[0]].value;
            break;
        case NodeRole::Primitive: {
            const auto& proc = nodes_[n.parents[0]].value.as_procedure();
            const auto* det = std::get<const DeterministicPrimitive*>(proc->impl);
            const OperandValues args(nodes_, n.parents);
            n.value = det->fn(args.span());
            break;
        }
        case NodeRole::If:
            if (nodes_[n.parents[0]].value.as_bool() != n.branch)
                throw StructureChangeError("refresh would switch the branch of node " + std::to_string(id));
            n.value = nodes_[n.parents[1]].value;
            break;
        case NodeRole::MemCall: {
            const auto it = family_keys_.find(n.parents.back());
            if (it != family_keys_.end()) {
                for (std::size_t i = 1; i + 1 < n.parents.size(); ++i)
                    if (!(nodes_[n.parents[i]].value == it->second.second[i - 1]))
                        throw StructureChangeError("memoized call arguments changed at node " + std::to_string(id));
            }
            n.value = nodes_[n.parents.back()].value;
            break;
        }
        case NodeRole::CompoundCall:
        case NodeRole::ScopeInclude: n.value = nodes_[n.parents.back()].value; break;
    }
    n.version = next_version();
}

std::vector<Value> Trace::parameters(NodeId stochastic) {
    const Node& n = nodes_[stochastic];
    std::vector<Value> out;
    out.reserve(n.parents.size() - 1);
    for (std::size_t i = 1; i < n.parents.size(); ++i) out.push_back(value(nodes_[stochastic].parents[i]));
    return out;
}

const PrimitiveDistribution& Trace::distribution(NodeId stochastic) const {
    const auto& proc = nodes_[nodes_[stochastic].parents[0]].value.as_procedure();
    return *std::get<const PrimitiveDistribution*>(proc->impl);
}

double Trace::recompute_density(NodeId id) {
    for (std::size_t i = 1; i < nodes_[id].parents.size(); ++i) refresh(nodes_[id].parents[i]);
    const OperandValues params(nodes_, nodes_[id].parents);
    Node& n = nodes_[id];
    n.log_density = log_pdf(distribution(id).family, params.span(), n.value);
    n.density_version = next_version();
    return n.log_density;
}

void Trace::set_value(NodeId id, Value v) {
    Node& n = nodes_[id];
    n.value = std::move(v);
    n.version = next_version();
}

std::vector<NodeId> Trace::regenerate_branch(NodeId if_node, Rng& rng) {
    const NodeId pred = nodes_[if_node].parents[0];
    const Value& pv = value(pred);
    if (!pv.is_boolean()) throw EvalError("if predicate must be boolean");
    const bool which = pv.as_bool();
    const auto* ie = std::get_if<IfExpr>(&nodes_[if_node].expr->node);
    const double lo = nodes_[pred].order;
    const double hi = nodes_[if_node].order;
    const double saved_clock = order_clock_;
    const std::size_t first = nodes_.size();
    existence_scopes_.emplace_back();
    NodeId result;
    try {
        const FramePtr env = nodes_[if_node].env;
        result = eval(which ? *ie->consequent : *ie->alternate, env, rng);
    } catch (...) {
        existence_scopes_.pop_back();
        order_clock_ = saved_clock;
        throw;
    }
    const std::vector<NodeId> created = std::move(existence_scopes_.back());
    existence_scopes_.pop_back();
    order_clock_ = saved_clock;
    for (NodeId c : created) link_exist(pred, c);
    const std::size_t count = nodes_.size() - first;
    std::vector<NodeId> fresh;
    for (std::size_t k = 0; k < count; ++k) {
        const auto id = static_cast<NodeId>(first + k);
        nodes_[id].order = lo + (hi - lo) * static_cast<double>(k + 1) / static_cast<double>(count + 1);
        fresh.push_back(id);
    }
    Node& n = nodes_[if_node];
    n.parents[1] = result;
    nodes_[result].children.push_back(if_node);
    n.branch = which;
    n.value = nodes_[result].value;
    n.version = next_version();
    return fresh;
}

void Trace::forget_family(NodeId root) {
    const auto it = family_keys_.find(root);
    if (it == family_keys_.end()) return;
    auto& table = memo_tables_[it->second.first];
    if (auto t = table.find(it->second.second); t != table.end() && t->second == root) table.erase(t);
}

void Trace::kill(std::span<const NodeId> ids) {
    for (NodeId id : ids) {
        nodes_[id].alive = false;
        forget_family(id);
    }
}

void Trace::revive(std::span<const NodeId> ids) {
    for (NodeId id : ids) {
        nodes_[id].alive = true;
        if (auto it = family_keys_.find(id); it != family_keys_.end())
            memo_tables_[it->second.first][it->second.second] = id;
    }
}

void Trace::erase_dead(std::span<const NodeId> ids) {
    if (ids.empty()) return;
    for (NodeId id : ids) {
        Node& n = nodes_[id];
        for (NodeId p : n.parents) erase_one_from_back(nodes_[p].children, id);
        for (NodeId p : n.exist_parents) erase_one_from_back(nodes_[p].exist_children, id);
        family_keys_.erase(id);
    }
    for (NodeId id : ids) {
        Node& n = nodes_[id];
        std::vector<NodeId>().swap(n.parents);
        std::vector<NodeId>().swap(n.children);
        std::vector<NodeId>().swap(n.exist_parents);
        std::vector<NodeId>().swap(n.exist_children);
        n.value = Value();
        n.env.reset();
    }
    scopes_.erase_if([this](const ScopeEntry& e) { return !nodes_[e.principal].alive || !nodes_[e.scope_node].alive; });
}

void Trace::truncate(std::size_t new_size) {
    if (new_size >= nodes_.size()) return;
    for (std::size_t i = nodes_.size(); i-- > new_size;) {
        const auto id = static_cast<NodeId>(i);
        const Node& n = nodes_[id];
        for (NodeId p : n.parents)
            if (p < new_size) erase_one_from_back(nodes_[p].children, id);
        for (NodeId p : n.exist_parents)
            if (p < new_size) erase_one_from_back(nodes_[p].exist_children, id);
        forget_family(id);
        family_keys_.erase(id);
    }
    nodes_.resize(new_size);
    scopes_.erase_if([new_size](const ScopeEntry& e) { return e.principal >= new_size || e.scope_node >= new_size; });
}

std::size_t Trace::live_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.alive; }));
}

std::optional<NodeId> Trace::global(const std::string& name) const {
    if (auto it = globals_.find(name); it != globals_.end()) return it->second;
    return std::nullopt;
}

std::vector<NodeId> Trace::stochastic_nodes() const {
    std::vector<NodeId> out;
    for (NodeId id = 0; id < nodes_.size(); ++id)
        if (nodes_[id].alive && nodes_[id].stochastic()) out.push_back(id);
    return out;
}

std::uint64_t Trace::structural_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv(h, nodes_.size());
    for (const Node& n : nodes_) {
        h = fnv(h, (static_cast<std::uint64_t>(n.role) << 8) | (n.alive << 3) | (n.observed << 2) |
                       (n.detached << 1) | n.branch);
        h = fnv(h, std::bit_cast<std::uint64_t>(n.order));
        h = fnv(h, n.value.bit_hash());
        for (const auto* list : {&n.parents, &n.children, &n.exist_parents, &n.exist_children}) {
            h = fnv(h, list->size());
            for (NodeId x : *list) h = fnv(h, x);
        }
        h = fnv(h, std::bit_cast<std::uint64_t>(n.log_density));
        h = fnv(h, n.version);
        h = fnv(h, n.density_version);
    }
    for (const auto& t : memo_tables_) {
        h = fnv(h, t.size());
        std::vector<NodeId> roots;
        for (const auto& [k, v] : t) roots.push_back(v);
        std::sort(roots.begin(), roots.end());
        for (NodeId r : roots) h = fnv(h, r);
    }
    for (const auto& e : scopes_.entries()) h = fnv(fnv(h, e.principal), e.scope_node);
    return h;
}

std::string Trace::dump() const {
    std::ostringstream out;
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        if (!n.alive) continue;
        out << id << ' ' << to_string(n.kind()) << ' ' << n.value.to_string() << " parents=[";
        for (std::size_t i = 0; i < n.parents.size(); ++i) out << (i ? "," : "") << n.parents[i];
        out << "] exist=[";
        for (std::size_t i = 0; i < n.exist_parents.size(); ++i) out << (i ? "," : "") << n.exist_parents[i];
        out << "]";
        if (n.observed) out << " observed";
        out << '\n';
    }
    return out.str();
}

void Trace::check_invariants() const {
    auto fail = [](NodeId id, const std::string& what) {
        throw InternalError("node " + std::to_string(id) + ": " + what);
    };
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        if (!n.alive) continue;
        if (n.detached) fail(id, "left detached");
        for (NodeId p : n.parents) {
            if (!nodes_[p].alive) fail(id, "has a dead parent");
            if (!(nodes_[p].order < n.order)) fail(id, "parent does not precede child");
            if (std::count(nodes_[p].children.begin(), nodes_[p].children.end(), id) !=
                std::count(n.parents.begin(), n.parents.end(), p))
                fail(id, "parent edge without matching child edge");
        }
        for (NodeId p : n.exist_parents) {
            if (!nodes_[p].alive) fail(id, "has a dead existential parent");
            if (!(nodes_[p].order < n.order)) fail(id, "existential parent does not precede child");
        }
        for (NodeId c : n.children)
            if (!nodes_[c].alive) fail(id, "has a dead child");
        if (n.observed && !n.stochastic()) fail(id, "observed but not stochastic");
        if (n.stochastic() && n.parents.empty()) fail(id, "stochastic node without operator");
    }
    for (const auto& e : scopes_.entries()) {
        if (e.principal >= nodes_.size() || !nodes_[e.principal].alive || !nodes_[e.principal].stochastic())
            fail(e.principal, "registered principal is not a live random choice");
        if (nodes_[e.principal].observed) fail(e.principal, "registered principal is observed");
    }
}

}  // namespace austere
