#include "austere/mh.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "austere/errors.hpp"

namespace austere {

double acceptance_log_ratio(double global, std::span<const double> locals) {
    double total = global;
    for (double l : locals) total += l;
    if (std::isnan(total)) return -std::numeric_limits<double>::infinity();
    return std::min(0.0, total);
}

TransitionResult mh_transition(Trace& trace, NodeId principal, const ProposalSpec& proposal, Rng& rng) {
    const double log_u = std::log(rng.uniform01());
    return mh_transition_with_u(trace, principal, proposal, log_u, rng);
}

TransitionResult mh_transition_with_u(Trace& trace, NodeId principal, const ProposalSpec& proposal, double log_u,
                                      Rng& rng) {
    const auto start = std::chrono::steady_clock::now();
    FragmentUpdate update(trace, construct_scaffold(trace, principal), proposal);
    double w = update.detach();
    w += update.regenerate(rng);
    TransitionResult r;
    r.log_u = log_u;
    r.log_accept_ratio = acceptance_log_ratio(w, {});
    r.accepted = !update.aborted() && log_u <= r.log_accept_ratio;
    if (r.accepted)
        update.commit();
    else
        update.restore();
    r.nodes_touched = update.nodes_touched();
    r.wall_nanos =
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void set_principal_value(Trace& trace, NodeId principal, const Value& value) {
    const auto border = find_border(trace, principal);
    Scaffold fragment = border ? construct_global_section(trace, principal, border->node)
                               : construct_scaffold(trace, principal);
    FragmentUpdate update(trace, std::move(fragment), FixedValue{value});
    update.detach();
    Rng unused(0);
    update.regenerate(unused);
    if (update.aborted()) {
        update.restore();
        throw SupportError("value is outside the support of the principal");
    }
    update.commit();
}

}  // namespace austere
