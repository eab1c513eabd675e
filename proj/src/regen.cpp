#include "austere/regen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "austere/errors.hpp"

namespace austere {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_prior(const ProposalSpec& p) { return std::holds_alternative<PriorResimulation>(p); }

constexpr std::size_t kLinearScan = 16;

// Small lists are scanned directly; larger ones are copied and sorted.
std::vector<NodeId> index_of(const std::vector<NodeId>& ids) {
    if (ids.size() <= kLinearScan) return {};
    std::vector<NodeId> out = ids;
    std::sort(out.begin(), out.end());
    return out;
}

bool contains(const std::vector<NodeId>& ids, const std::vector<NodeId>& index, NodeId id) {
    if (ids.size() <= kLinearScan) return std::find(ids.begin(), ids.end(), id) != ids.end();
    return std::binary_search(index.begin(), index.end(), id);
}

}  // namespace

FragmentUpdate::FragmentUpdate(Trace& trace, Scaffold fragment, ProposalSpec proposal)
    : trace_(trace), fragment_(std::move(fragment)), proposal_(std::move(proposal)) {
    if (const auto* d = std::get_if<GaussianDrift>(&proposal_); d && !(d->sigma > 0.0 && std::isfinite(d->sigma)))
        throw DomainError("drift width must be positive");
    in_target_ = index_of(fragment_.target);
    const std::vector<NodeId> transient = index_of(fragment_.transient);
    for (NodeId id : fragment_.target) {
        for (NodeId c : trace_.node(id).children) {
            if (trace_.node(c).derived() && !in_target(c) && !contains(fragment_.transient, transient, c)) {
                partial_ = true;
                return;
            }
        }
    }
}

bool FragmentUpdate::in_target(NodeId id) const { return contains(fragment_.target, in_target_, id); }

double FragmentUpdate::detach() {
    if (stage_ != Stage::Fresh) throw InternalError("fragment already detached");
    double w = 0.0;
    values_.reserve(fragment_.target.size());
    densities_.reserve(fragment_.target.size() + fragment_.absorbing.size());
    for (NodeId id : fragment_.target) {
        const Node& n = trace_.node(id);
        if (n.stochastic())
            trace_.refresh_density(id);
        else
            trace_.refresh(id);
        SavedValue s{id, n.value, n.version, {}, n.branch};
        if (n.role == NodeRole::If && in_target(n.parents[0])) s.parents = n.parents;
        values_.push_back(std::move(s));
        if (n.stochastic()) {
            densities_.push_back({id, n.log_density, n.density_version});
            if (!is_prior(proposal_)) w -= n.log_density;
        }
    }
    for (NodeId id : fragment_.absorbing) {
        const double lp = trace_.node_log_density(id);
        const Node& n = trace_.node(id);
        densities_.push_back({id, n.log_density, n.density_version});
        w -= lp;
    }
    for (NodeId id : fragment_.transient)
        if (trace_.node(id).observed)
            throw StructureChangeError("observed random choice " + std::to_string(id) + " would be resimulated");
    trace_.kill(fragment_.transient);
    for (auto it = fragment_.target.rbegin(); it != fragment_.target.rend(); ++it)
        trace_.mutable_node(*it).detached = true;
    stage_ = Stage::Detached;
    return w;
}

Value FragmentUpdate::propose(NodeId v, Rng& rng) {
    struct Visitor {
        FragmentUpdate& self;
        NodeId v;
        Rng& rng;
        Value operator()(const PriorResimulation&) const {
            return sample(self.trace_.distribution(v).family, self.trace_.parameters(v), rng);
        }
        Value operator()(const GaussianDrift& d) const {
            const Value& x = self.trace_.node(v).value;
            if (x.is_number()) return Value::real(x.as_real() + d.sigma * rng.normal());
            if (x.is_vector()) {
                RealVector out = x.as_vector();
                for (double& c : out) c += d.sigma * rng.normal();
                return Value::vector(std::move(out));
            }
            throw EvalError("drift proposals require a real or vector valued principal");
        }
        Value operator()(const FixedValue& f) const { return f.target; }
    };
    return std::visit(Visitor{*this, v, rng}, proposal_);
}

double FragmentUpdate::regenerate(Rng& rng) {
    if (stage_ != Stage::Detached) throw InternalError("regenerate requires a detached fragment");
    try {
        const double w = regenerate_fragment(rng);
        if (partial_) trace_.touch();
        return w;
    } catch (...) {
        if (partial_) trace_.touch();
        throw;
    }
}

double FragmentUpdate::regenerate_fragment(Rng& rng) {
    stage_ = Stage::Regenerated;
    size_before_regen_ = trace_.size();
    double w = 0.0;
    try {
        for (NodeId id : fragment_.target) {
            trace_.mutable_node(id).detached = false;
            const Node& n = trace_.node(id);
            if (n.stochastic()) {
                trace_.set_value(id, propose(id, rng));
                const double lp = trace_.recompute_density(id);
                if (!(lp > kNegInf)) {
                    aborted_ = true;
                    return kNegInf;
                }
                if (!is_prior(proposal_)) w += lp;
            } else if (n.role == NodeRole::If && in_target(n.parents[0])) {
                const auto fresh = trace_.regenerate_branch(id, rng);
                created_.insert(created_.end(), fresh.begin(), fresh.end());
            } else {
                trace_.recompute_value(id);
            }
        }
        for (NodeId id : fragment_.absorbing) {
            const double lp = trace_.recompute_density(id);
            if (!(lp > kNegInf)) {
                aborted_ = true;
                return kNegInf;
            }
            w += lp;
        }
    } catch (const DomainError&) {
        aborted_ = true;
        return kNegInf;
    } catch (const SupportError&) {
        aborted_ = true;
        return kNegInf;
    }
    return w;
}

void FragmentUpdate::swap_targets() {
    for (SavedValue& s : values_) {
        Node& n = trace_.mutable_node(s.id);
        std::swap(n.value, s.value);
        std::swap(n.version, s.version);
    }
    trace_.touch();
}

void FragmentUpdate::show_old() {
    if (stage_ != Stage::Regenerated || showing_old_ || !fragment_.transient.empty())
        throw InternalError("show_old requires a regenerated fragment without transient nodes");
    swap_targets();
    showing_old_ = true;
}

void FragmentUpdate::show_new() {
    if (!showing_old_) throw InternalError("show_new without show_old");
    swap_targets();
    showing_old_ = false;
}

void FragmentUpdate::restore() {
    if (stage_ == Stage::Done) throw InternalError("restore buffer already consumed");
    if (stage_ == Stage::Fresh) throw InternalError("nothing to restore");
    if (showing_old_) show_new();
    if (stage_ == Stage::Regenerated) trace_.truncate(size_before_regen_);
    trace_.revive(fragment_.transient);
    for (SavedValue& s : values_) {
        Node& n = trace_.mutable_node(s.id);
        n.value = std::move(s.value);
        n.version = s.version;
        n.branch = s.branch;
        n.detached = false;
        if (!s.parents.empty()) n.parents = std::move(s.parents);
    }
    for (const SavedDensity& d : densities_) {
        Node& n = trace_.mutable_node(d.id);
        n.log_density = d.log_density;
        n.density_version = d.density_version;
    }
    if (partial_) trace_.touch();
    stage_ = Stage::Done;
}

void FragmentUpdate::commit() {
    if (stage_ != Stage::Regenerated || aborted_) throw InternalError("commit requires a completed regeneration");
    if (showing_old_) show_new();
    trace_.erase_dead(fragment_.transient);
    if (partial_) trace_.touch();
    values_.clear();
    densities_.clear();
    stage_ = Stage::Done;
}

}  // namespace austere
