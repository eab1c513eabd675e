#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "austere/language.hpp"
#include "austere/procedure.hpp"
#include "austere/rng.hpp"
#include "austere/value.hpp"

namespace austere {

enum class NodeKind { Constant, Lookup, DeterministicApplication, StochasticApplication };

// Finer evaluation role; every role maps onto one NodeKind.
enum class NodeRole : std::uint8_t {
    Constant,
    Lookup,
    Primitive,
    Stochastic,
    If,
    CompoundCall,
    MemCall,
    MakeMem,
    ScopeInclude,
};

NodeKind kind_of(NodeRole role);
const char* to_string(NodeKind kind);

struct Node {
    NodeRole role = NodeRole::Constant;
    bool alive = true;
    bool observed = false;
    bool detached = false;
    bool branch = false;  // If nodes: which branch was taken
    bool fixed = false;   // derived from constants only; never stale
    double order = 0.0;   // execution order key; parents always precede children
    Value value;
    std::vector<NodeId> parents;
    std::vector<NodeId> children;
    std::vector<NodeId> exist_parents;
    std::vector<NodeId> exist_children;
    double log_density = 0.0;
    std::uint64_t version = 0;
    std::uint64_t density_version = 0;
    std::uint64_t checked = 0;
    const Expression* expr = nullptr;
    FramePtr env;  // If nodes: environment for branch regeneration

    NodeKind kind() const { return kind_of(role); }
    bool stochastic() const { return role == NodeRole::Stochastic; }
    // Value is a function of the parents' values.
    bool derived() const { return role != NodeRole::Constant && role != NodeRole::Stochastic; }
};

struct ScopeEntry {
    std::string scope;
    Value label;
    NodeId principal;
    NodeId scope_node;
};

class ScopeRegistry {
public:
    void add(ScopeEntry entry);
    bool has_scope(const std::string& scope) const;
    std::vector<const ScopeEntry*> find(const std::string& scope) const;
    std::vector<const ScopeEntry*> find(const std::string& scope, const Value& label) const;
    const std::vector<ScopeEntry>& entries() const { return entries_; }
    void erase_if(const std::function<bool(const ScopeEntry&)>& pred);

private:
    std::vector<ScopeEntry> entries_;
};

struct TraceStats {
    std::uint64_t stale_repairs = 0;
};

// Probabilistic execution trace.  Reads through value() and
// node_log_density() repair stale deterministic descendants on demand.
class Trace {
public:
    Trace() = default;

    // Evaluates an assume, observe or predict directive and returns its root node.
    NodeId eval_directive(const Directive& d, Rng& rng);

    std::size_t size() const { return nodes_.size(); }
    std::size_t live_count() const;
    const Node& node(NodeId id) const { return nodes_[id]; }
    bool contains(NodeId id) const { return id < nodes_.size() && nodes_[id].alive; }

    const Value& value(NodeId id);
    double node_log_density(NodeId id);
    double log_density();
    bool is_stale(NodeId id) const;
    void refresh_all();

    std::optional<NodeId> global(const std::string& name) const;
    const std::vector<std::pair<std::string, NodeId>>& predicts() const { return predicts_; }
    const std::vector<NodeId>& directive_roots() const { return roots_; }
    const ScopeRegistry& scopes() const { return scopes_; }
    const TraceStats& stats() const { return stats_; }
    std::vector<NodeId> stochastic_nodes() const;

    // Follows value-forwarding nodes down to the stochastic node they expose.
    std::optional<NodeId> stochastic_source(NodeId id) const;

    std::uint64_t structural_hash() const;
    std::string dump() const;
    // Throws InternalError describing the first violated structural invariant.
    void check_invariants() const;

    // Kernel interface used by detach/regenerate/restore.
    Node& mutable_node(NodeId id) { return nodes_[id]; }
    std::uint64_t next_version() { return ++clock_; }
    // Invalidates memoised freshness checks; required after any change that
    // can leave a derived node behind its parents.
    void touch() {
        ++clock_;
        ++epoch_;
    }
    void refresh(NodeId id);
    void refresh_density(NodeId id);
    void recompute_value(NodeId id);
    double recompute_density(NodeId id);
    void set_value(NodeId id, Value v);
    std::vector<Value> parameters(NodeId stochastic);
    const PrimitiveDistribution& distribution(NodeId stochastic) const;
    std::vector<NodeId> regenerate_branch(NodeId if_node, Rng& rng);
    void kill(std::span<const NodeId> ids);
    void revive(std::span<const NodeId> ids);
    void erase_dead(std::span<const NodeId> ids);
    void truncate(std::size_t new_size);

private:
    NodeId new_node(NodeRole role, const Expression* expr);
    void link(NodeId parent, NodeId child);
    void link_exist(NodeId parent, NodeId child);
    NodeId eval(const Expression& e, const FramePtr& env, Rng& rng);
    NodeId eval_symbol(const SymbolExpr& s, const Expression& e, const FramePtr& env);
    NodeId eval_if(const IfExpr& i, const Expression& e, const FramePtr& env, Rng& rng);
    NodeId eval_combination(const CombinationExpr& c, const Expression& e, const FramePtr& env, Rng& rng);
    NodeId eval_scope_include(const CombinationExpr& c, const Expression& e, const FramePtr& env, Rng& rng);
    NodeId eval_mem(const CombinationExpr& c, const Expression& e, const FramePtr& env, Rng& rng);
    NodeId apply(const ProcedurePtr& proc, NodeId op, const std::vector<NodeId>& args, const Expression* expr,
                 Rng& rng);
    NodeId apply_body(const ProcedurePtr& proc, const std::vector<NodeId>& args, const Expression* expr, Rng& rng);
    std::vector<Value> values_of(std::span<const NodeId> ids);
    std::optional<NodeId> registration_source(NodeId id) const;
    void forget_family(NodeId root);
    void observe(NodeId root, const Value& v);

    using MemoTable = std::unordered_map<std::vector<Value>, NodeId, ValueSequenceHash>;

    std::vector<Node> nodes_;
    std::unordered_map<std::string, NodeId> globals_;
    std::vector<MemoTable> memo_tables_;
    std::unordered_map<NodeId, std::pair<std::size_t, std::vector<Value>>> family_keys_;
    ScopeRegistry scopes_;
    std::vector<std::pair<std::string, NodeId>> predicts_;
    std::vector<NodeId> roots_;
    std::vector<ExprPtr> programs_;
    std::vector<std::vector<NodeId>> existence_scopes_;
    std::uint64_t clock_ = 0;
    std::uint64_t epoch_ = 1;
    double order_clock_ = 0.0;
    TraceStats stats_;
};

}  // namespace austere
