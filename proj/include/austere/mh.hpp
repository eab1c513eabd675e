#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "austere/regen.hpp"
#include "austere/rng.hpp"
#include "austere/trace.hpp"

namespace austere {

struct TransitionResult {
    bool accepted = false;
    double log_accept_ratio = 0.0;
    std::size_t nodes_touched = 0;
    std::int64_t wall_nanos = 0;
    double log_u = 0.0;
    // Populated by the subsampled kernel.
    std::size_t population = 0;
    std::size_t consumed = 0;
    bool fallback = false;
    double mu0 = 0.0;
    double mu_hat = 0.0;
};

// min(0, global + sum(locals)).
double acceptance_log_ratio(double global, std::span<const double> locals);

// Exact single-site MH over the full scaffold of `principal`.
TransitionResult mh_transition(Trace& trace, NodeId principal, const ProposalSpec& proposal, Rng& rng);

// Same transition with the uniform already drawn.
TransitionResult mh_transition_with_u(Trace& trace, NodeId principal, const ProposalSpec& proposal, double log_u,
                                      Rng& rng);

// Moves the principal to `value` and keeps the result regardless of its weight.
void set_principal_value(Trace& trace, NodeId principal, const Value& value);

}  // namespace austere
