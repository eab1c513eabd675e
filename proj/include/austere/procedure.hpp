#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "austere/distributions.hpp"
#include "austere/language.hpp"
#include "austere/value.hpp"

namespace austere {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

// Lexical frame created by a compound call.  Immutable once built; the chain
// ends at the trace's global environment.
struct Frame {
    std::vector<std::pair<std::string, NodeId>> bindings;
    std::shared_ptr<const Frame> parent;
};
using FramePtr = std::shared_ptr<const Frame>;

struct DeterministicPrimitive {
    std::string_view name;
    std::size_t min_arity;
    std::size_t max_arity;  // SIZE_MAX for variadic
    Value (*fn)(std::span<const Value>);
};

const DeterministicPrimitive* find_deterministic(std::string_view name);

struct CompoundProcedure {
    std::vector<std::string> params;
    const Expression* body;
    FramePtr env;
};

struct MemoizedProcedure {
    ProcedurePtr inner;
    std::size_t table;
};

struct Procedure {
    std::variant<const DeterministicPrimitive*, const PrimitiveDistribution*, CompoundProcedure,
                 MemoizedProcedure>
        impl;

    std::string name() const;
};

// Shared procedure value for a builtin symbol, or nullptr if no such builtin.
ProcedurePtr builtin_procedure(std::string_view name);

}  // namespace austere
