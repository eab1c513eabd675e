#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "austere/rng.hpp"
#include "austere/scaffold.hpp"
#include "austere/trace.hpp"

namespace austere {

// Resample the principal from its prior; the q terms cancel exactly.
struct PriorResimulation {};
// Symmetric Gaussian random walk of the given width on every component.
struct GaussianDrift {
    double sigma;
};
// Deterministic move to a fixed value; used to pin proposals in benchmarks.
struct FixedValue {
    Value target;
};

using ProposalSpec = std::variant<PriorResimulation, GaussianDrift, FixedValue>;

// One detach / regenerate / (restore | commit) cycle over a scaffold fragment.
// The weights follow the single-site MH ratio: detach returns the old-state
// terms and regenerate the new-state terms, both in log space.
class FragmentUpdate {
public:
    FragmentUpdate(Trace& trace, Scaffold fragment, ProposalSpec proposal);

    // Refreshes and records the fragment, then releases it.
    double detach();
    // Proposes and re-evaluates the fragment.  Returns -inf when the proposal
    // leaves the support or a deterministic descendant becomes undefined.
    double regenerate(Rng& rng);
    // Puts the recorded state back bit for bit.  Throws InternalError if the
    // buffer was already consumed.
    void restore();
    // Keeps the proposed state and frees what the old state owned.
    void commit();

    // Swap the target values between the recorded and proposed states.
    void show_old();
    void show_new();

    const Scaffold& fragment() const { return fragment_; }
    std::size_t nodes_touched() const { return fragment_.size() + created_.size(); }
    bool aborted() const { return aborted_; }

private:
    enum class Stage { Fresh, Detached, Regenerated, Done };

    struct SavedValue {
        NodeId id;
        Value value;
        std::uint64_t version;
        std::vector<NodeId> parents;
        bool branch;
    };
    struct SavedDensity {
        NodeId id;
        double log_density;
        std::uint64_t density_version;
    };

    bool in_target(NodeId id) const;
    double regenerate_fragment(Rng& rng);
    Value propose(NodeId v, Rng& rng);
    void swap_targets();

    Trace& trace_;
    Scaffold fragment_;
    ProposalSpec proposal_;
    Stage stage_ = Stage::Fresh;
    bool aborted_ = false;
    bool showing_old_ = false;
    bool partial_ = false;  // some derived child of the target lies outside the fragment
    std::vector<NodeId> in_target_;  // sorted target ids for large targets
    std::vector<SavedValue> values_;
    std::vector<SavedDensity> densities_;
    std::vector<SavedValue> swapped_;
    std::vector<NodeId> created_;
    std::size_t size_before_regen_ = 0;
};

}  // namespace austere
