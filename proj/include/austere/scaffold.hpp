#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "austere/trace.hpp"

namespace austere {

enum class ScaffoldRole { Target, Transient, Absorbing };

// Nodes touched by a proposal to one principal.  Target (D) holds the
// principal and its deterministic descendants, Transient (T) the nodes whose
// existence hangs on D, Absorbing (A) the random choices whose density must
// be re-evaluated.  Each list is sorted by execution order.
struct Scaffold {
    NodeId principal = kNoNode;
    std::vector<NodeId> target;
    std::vector<NodeId> transient;
    std::vector<NodeId> absorbing;

    std::size_t size() const { return target.size() + transient.size() + absorbing.size(); }
    std::optional<ScaffoldRole> role_of(NodeId id) const;
};

Scaffold construct_scaffold(const Trace& trace, NodeId principal);

struct Border {
    NodeId node;
    std::size_t children;
};

// First node on the single-child deterministic chain below the principal that
// has two or more children.  Empty when the chain ends, reaches a random
// choice, or carries existential dependents first.
std::optional<Border> find_border(const Trace& trace, NodeId principal);

// Scaffold nodes that are not strict descendants of the border.
Scaffold construct_global_section(const Trace& trace, NodeId principal, NodeId border);

// Scaffold restricted to the i-th child of the border and its descendants.
Scaffold construct_local_section(const Trace& trace, NodeId border, std::size_t i);
// Same, refilling `out` in place so its storage is reused.
void construct_local_section(const Trace& trace, NodeId border, std::size_t i, Scaffold& out);

const char* to_string(ScaffoldRole role);

// One "id role" line per scaffold node in execution order.
std::string dump_scaffold(const Scaffold& s, const Trace& trace);
// One "id global" or "id local_i" line per node of the partition.
std::string dump_partition(const Trace& trace, NodeId principal);

}  // namespace austere
