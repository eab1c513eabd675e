#include "austere/scaffold.hpp"

#include <algorithm>
#include <span>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "austere/errors.hpp"

namespace austere {

namespace {

struct ByOrder {
    const Trace* trace;
    bool operator()(NodeId a, NodeId b) const { return trace->node(a).order > trace->node(b).order; }
};

// Per-thread visit stamps indexed by node id; a new generation clears them.
class Marks {
public:
    explicit Marks(std::size_t n) {
        auto& s = state();
        if (s.stamps.size() < n) s.stamps.resize(n, 0);
        s.generation += 2;
        base_ = s.generation;
    }
    bool queued(NodeId id) const { return state().stamps[id] >= base_; }
    bool transient(NodeId id) const { return state().stamps[id] == base_ + 1; }
    void set_queued(NodeId id) {
        auto& v = state().stamps[id];
        if (v < base_) v = base_;
    }
    void set_transient(NodeId id) { state().stamps[id] = base_ + 1; }

private:
    struct State {
        std::vector<std::uint64_t> stamps;
        std::uint64_t generation = 0;
    };
    static State& state() {
        thread_local State s;
        return s;
    }
    std::uint64_t base_;
};

// Breadth-first closure in execution order from the seeds.  Children of
// `stop` are not expanded.
void build(const Trace& trace, NodeId principal, std::span<const NodeId> seeds, NodeId stop, Scaffold& out) {
    thread_local std::vector<NodeId> queue;
    queue.clear();
    const ByOrder by_order{&trace};
    auto enqueue = [&](NodeId id) {
        queue.push_back(id);
        std::push_heap(queue.begin(), queue.end(), by_order);
    };
    Marks marks(trace.size());
    auto push = [&](NodeId id) {
        if (trace.node(id).alive && !marks.queued(id)) {
            marks.set_queued(id);
            enqueue(id);
        }
    };
    for (NodeId s : seeds) push(s);
    out.principal = principal;
    out.target.clear();
    out.transient.clear();
    out.absorbing.clear();
    while (!queue.empty()) {
        std::pop_heap(queue.begin(), queue.end(), by_order);
        const NodeId x = queue.back();
        queue.pop_back();
        const Node& n = trace.node(x);
        if (!marks.transient(x) && x != principal && n.stochastic()) {
            out.absorbing.push_back(x);
            continue;
        }
        (marks.transient(x) ? out.transient : out.target).push_back(x);
        for (NodeId c : n.exist_children) {
            if (!trace.node(c).alive) continue;
            const bool was_queued = marks.queued(c);
            marks.set_transient(c);
            if (!was_queued) enqueue(c);
        }
        if (x == stop) continue;
        for (NodeId c : n.children) push(c);
    }
}

Scaffold build(const Trace& trace, NodeId principal, std::span<const NodeId> seeds, NodeId stop) {
    Scaffold out;
    out.target.reserve(8);
    out.absorbing.reserve(4);
    build(trace, principal, seeds, stop, out);
    return out;
}

}  // namespace

std::optional<ScaffoldRole> Scaffold::role_of(NodeId id) const {
    auto has = [id](const std::vector<NodeId>& v) { return std::find(v.begin(), v.end(), id) != v.end(); };
    if (has(target)) return ScaffoldRole::Target;
    if (has(transient)) return ScaffoldRole::Transient;
    if (has(absorbing)) return ScaffoldRole::Absorbing;
    return std::nullopt;
}

Scaffold construct_scaffold(const Trace& trace, NodeId principal) {
    if (!trace.contains(principal) || !trace.node(principal).stochastic())
        throw EvalError("principal " + std::to_string(principal) + " is not a live random choice");
    if (trace.node(principal).observed) throw EvalError("principal " + std::to_string(principal) + " is observed");
    return build(trace, principal, {&principal, 1}, kNoNode);
}

std::optional<Border> find_border(const Trace& trace, NodeId principal) {
    NodeId x = principal;
    while (true) {
        const Node& n = trace.node(x);
        if (!n.exist_children.empty()) return std::nullopt;
        if (n.children.size() >= 2) return Border{x, n.children.size()};
        if (n.children.empty()) return std::nullopt;
        const NodeId c = n.children.front();
        if (trace.node(c).stochastic()) return std::nullopt;
        x = c;
    }
}

Scaffold construct_global_section(const Trace& trace, NodeId principal, NodeId border) {
    return build(trace, principal, {&principal, 1}, border);
}

Scaffold construct_local_section(const Trace& trace, NodeId border, std::size_t i) {
    const auto& children = trace.node(border).children;
    if (i >= children.size()) throw InternalError("local section index out of range");
    return build(trace, kNoNode, {&children[i], 1}, kNoNode);
}

void construct_local_section(const Trace& trace, NodeId border, std::size_t i, Scaffold& out) {
    const auto& children = trace.node(border).children;
    if (i >= children.size()) throw InternalError("local section index out of range");
    build(trace, kNoNode, {&children[i], 1}, kNoNode, out);
}

const char* to_string(ScaffoldRole role) {
    switch (role) {
        case ScaffoldRole::Target: return "D";
        case ScaffoldRole::Transient: return "T";
        case ScaffoldRole::Absorbing: return "A";
    }
    return "?";
}

std::string dump_scaffold(const Scaffold& s, const Trace& trace) {
    std::vector<std::pair<NodeId, ScaffoldRole>> rows;
    for (NodeId id : s.target) rows.emplace_back(id, ScaffoldRole::Target);
    for (NodeId id : s.transient) rows.emplace_back(id, ScaffoldRole::Transient);
    for (NodeId id : s.absorbing) rows.emplace_back(id, ScaffoldRole::Absorbing);
    std::sort(rows.begin(), rows.end(),
              [&](const auto& a, const auto& b) { return trace.node(a.first).order < trace.node(b.first).order; });
    std::ostringstream out;
    for (const auto& [id, r] : rows) out << id << ' ' << to_string(r) << '\n';
    return out.str();
}

std::string dump_partition(const Trace& trace, NodeId principal) {
    const auto border = find_border(trace, principal);
    if (!border) return dump_scaffold(construct_scaffold(trace, principal), trace);
    std::vector<std::pair<NodeId, std::string>> rows;
    const Scaffold g = construct_global_section(trace, principal, border->node);
    for (const auto* list : {&g.target, &g.transient, &g.absorbing})
        for (NodeId id : *list) rows.emplace_back(id, "global");
    for (std::size_t i = 0; i < border->children; ++i) {
        const Scaffold l = construct_local_section(trace, border->node, i);
        for (const auto* list : {&l.target, &l.transient, &l.absorbing})
            for (NodeId id : *list) rows.emplace_back(id, "local_" + std::to_string(i));
    }
    std::sort(rows.begin(), rows.end(),
              [&](const auto& a, const auto& b) { return trace.node(a.first).order < trace.node(b.first).order; });
    std::ostringstream out;
    for (const auto& [id, label] : rows) out << id << ' ' << label << '\n';
    return out.str();
}

}  // namespace austere
