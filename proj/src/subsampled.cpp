#include "austere/subsampled.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "austere/distributions.hpp"
#include "austere/errors.hpp"

namespace austere {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Partial Fisher-Yates over [0, n) that stores only displaced entries.
class IndexSampler {
public:
    explicit IndexSampler(std::size_t n) : n_(n) {}

    std::size_t next(Rng& rng) {
        const std::size_t j = drawn_ + static_cast<std::size_t>(rng.below(n_ - drawn_));
        const std::size_t picked = at(j);
        swaps_[j] = at(drawn_);
        ++drawn_;
        return picked;
    }

private:
    std::size_t at(std::size_t i) const {
        const auto it = swaps_.find(i);
        return it == swaps_.end() ? i : it->second;
    }

    std::size_t n_;
    std::size_t drawn_ = 0;
    std::unordered_map<std::size_t, std::size_t> swaps_;
};

// Nodes claimed by some section of the current transition, stamped by id.
class Claims {
public:
    explicit Claims(std::size_t n) {
        auto& s = state();
        if (s.stamps.size() < n) s.stamps.resize(n, 0);
        stamp_ = ++s.generation;
    }
    // False when the node was already claimed.
    bool claim(NodeId id) {
        auto& stamps = state().stamps;
        if (id >= stamps.size()) stamps.resize(id + 1, 0);
        if (stamps[id] == stamp_) return false;
        stamps[id] = stamp_;
        return true;
    }

private:
    struct State {
        std::vector<std::uint64_t> stamps;
        std::uint64_t generation = 0;
    };
    static State& state() {
        thread_local State s;
        return s;
    }
    std::uint64_t stamp_;
};

// Local sections of one transition, recorded in shared buffers.  A local has
// deterministic targets and absorbing random choices only, so regenerating it
// recomputes values and densities without drawing anything.
class LocalSections {
public:
    // Records and detaches the section; returns minus its old log density.
    double detach(Trace& trace, const Scaffold& s) {
        double w = 0.0;
        for (NodeId id : s.target) {
            if (!trace.node(id).derived()) throw InternalError("local section targets a random choice");
            trace.refresh(id);
            const Node& n = trace.node(id);
            values_.push_back({id, n.value, n.version});
        }
        for (NodeId id : s.absorbing) {
            const double lp = trace.node_log_density(id);
            densities_.push_back({id, lp, trace.node(id).density_version});
            w -= lp;
        }
        for (NodeId id : s.target) trace.mutable_node(id).detached = true;
        sections_.push_back({values_.size() - s.target.size(), densities_.size() - s.absorbing.size()});
        touched_ += s.size();
        return w;
    }

    // Re-evaluates section k against the current trace; -inf when a density
    // or a derived value leaves its domain.
    double regenerate(Trace& trace, std::size_t k) {
        const auto [v_begin, d_begin] = sections_[k];
        const std::size_t v_end = k + 1 < sections_.size() ? sections_[k + 1].first : values_.size();
        const std::size_t d_end = k + 1 < sections_.size() ? sections_[k + 1].second : densities_.size();
        double w = 0.0;
        try {
            for (std::size_t i = v_begin; i < v_end; ++i) {
                trace.mutable_node(values_[i].id).detached = false;
                trace.recompute_value(values_[i].id);
            }
            for (std::size_t i = d_begin; i < d_end; ++i) {
                const double lp = trace.recompute_density(densities_[i].id);
                if (!(lp > kNegInf)) return kNegInf;
                w += lp;
            }
        } catch (const DomainError&) {
            return kNegInf;
        } catch (const SupportError&) {
            return kNegInf;
        }
        return w;
    }

    void restore(Trace& trace) {
        for (auto it = values_.rbegin(); it != values_.rend(); ++it) {
            Node& n = trace.mutable_node(it->id);
            n.value = std::move(it->value);
            n.version = it->version;
            n.detached = false;
        }
        for (const SavedDensity& d : densities_) {
            Node& n = trace.mutable_node(d.id);
            n.log_density = d.log_density;
            n.density_version = d.density_version;
        }
        clear();
    }

    void commit(Trace& trace) {
        for (const SavedValue& v : values_) trace.mutable_node(v.id).detached = false;
        clear();
    }

    std::size_t size() const { return sections_.size(); }
    std::size_t nodes_touched() const { return touched_; }

private:
    struct SavedValue {
        NodeId id;
        Value value;
        std::uint64_t version;
    };
    struct SavedDensity {
        NodeId id;
        double log_density;
        std::uint64_t density_version;
    };

    void clear() {
        values_.clear();
        densities_.clear();
        sections_.clear();
    }

    std::vector<SavedValue> values_;
    std::vector<SavedDensity> densities_;
    std::vector<std::pair<std::size_t, std::size_t>> sections_;  // first value and density of each section
    std::size_t touched_ = 0;
};

std::int64_t nanos_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double SequentialTestState::sample_sd() const {
    if (consumed < 2) return 0.0;
    return std::sqrt(std::max(0.0, m2 / static_cast<double>(consumed - 1)));
}

double SequentialTestState::standard_error() const {
    const double n = static_cast<double>(consumed);
    const double big_n = static_cast<double>(population);
    const double fpc = population > 1 ? std::max(0.0, 1.0 - (n - 1.0) / (big_n - 1.0)) : 0.0;
    return sample_sd() / std::sqrt(n) * std::sqrt(fpc);
}

SequentialTestResult sequential_test(double mu0, std::size_t population, const BatchEvaluator& evaluate,
                                     const SequentialTestConfig& config, Rng& rng) {
    if (config.batch == 0) throw DomainError("batch size must be positive");
    if (!(config.epsilon >= 0.0 && config.epsilon < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
    if (population == 0) throw DomainError("population must be non-empty");
    SequentialTestResult result;
    SequentialTestState& st = result.state;
    st.population = population;
    st.mu0 = mu0;
    IndexSampler sampler(population);
    std::vector<std::size_t> indices;
    std::vector<double> values;
    while (true) {
        const std::size_t k = std::min(config.batch, population - st.consumed);
        indices.resize(k);
        values.assign(k, 0.0);
        for (std::size_t& i : indices) i = sampler.next(rng);
        evaluate(indices, values);
        double batch_sum = 0.0;
        bool impossible = false;
        for (double l : values) {
            if (!(l > kNegInf)) impossible = true;
            ++st.consumed;
            st.sum += l;
            batch_sum += l;
            const double delta = l - st.mean;
            st.mean += delta / static_cast<double>(st.consumed);
            st.m2 += delta * (l - st.mean);
        }
        ++st.stages;
        if (impossible) {
            result.decision = Decision::H2;
            return result;
        }
        st.batch_means.push_back(batch_sum / static_cast<double>(k));
        const double mu_hat = st.mu_hat();
        if (st.consumed == population) {
            result.decision = mu_hat > mu0 ? Decision::H1 : Decision::H2;
            return result;
        }
        if (st.consumed < 2 || config.epsilon == 0.0) continue;
        const double s_l = st.sample_sd();
        if (s_l == 0.0) continue;
        const double s = st.standard_error();
        const double tail = student_t_tail(std::fabs(mu_hat - mu0) / s, static_cast<double>(st.consumed - 1));
        if (tail < config.epsilon) {
            result.decision = mu_hat > mu0 ? Decision::H1 : Decision::H2;
            return result;
        }
    }
}

SequentialTestResult sequential_test(double mu0, std::span<const double> population,
                                     const SequentialTestConfig& config, Rng& rng) {
    return sequential_test(
        mu0, population.size(),
        [population](std::span<const std::size_t> idx, std::span<double> out) {
            for (std::size_t k = 0; k < idx.size(); ++k) out[k] = population[idx[k]];
        },
        config, rng);
}

double SubsampledDiagnostics::normality_stat() const {
    const std::vector<double> xs(recent_batch_means.begin(), recent_batch_means.end());
    if (xs.size() < 20) return std::numeric_limits<double>::quiet_NaN();
    return normality_diagnostic(xs);
}

TransitionResult subsampled_mh_transition(Trace& trace, NodeId principal, const ProposalSpec& proposal,
                                          const SubsampledConfig& config, Rng& rng,
                                          SubsampledDiagnostics* diagnostics) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t repairs_before = trace.stats().stale_repairs;
    const double log_u = std::log(rng.uniform01());
    if (config.batch == 0) throw DomainError("batch size must be positive");

    auto finish = [&](TransitionResult r) {
        r.wall_nanos = nanos_since(start);
        if (diagnostics) {
            ++diagnostics->transitions;
            if (r.fallback) ++diagnostics->fallbacks;
            ++diagnostics->consumed_histogram[r.consumed];
            diagnostics->stale_repairs += trace.stats().stale_repairs - repairs_before;
        }
        return r;
    };
    auto fallback = [&](std::size_t population) {
        TransitionResult r = mh_transition_with_u(trace, principal, proposal, log_u, rng);
        r.fallback = true;
        r.population = population;
        r.consumed = population;
        return finish(r);
    };

    const auto border = find_border(trace, principal);
    if (!border || border->children < 2 * config.batch) return fallback(border ? border->children : 0);
    const std::size_t population = border->children;
    const NodeId b = border->node;

    Scaffold global_section = construct_global_section(trace, principal, b);
    if (!global_section.transient.empty()) return fallback(population);
    Claims claimed(trace.size());
    for (const auto* list : {&global_section.target, &global_section.absorbing})
        for (NodeId id : *list) claimed.claim(id);

    FragmentUpdate global(trace, std::move(global_section), proposal);
    double g = global.detach();
    g += global.regenerate(rng);
    TransitionResult r;
    r.log_u = log_u;
    r.population = population;
    if (global.aborted()) {
        global.restore();
        r.log_accept_ratio = kNegInf;
        r.nodes_touched = global.nodes_touched();
        return finish(r);
    }
    const double mu0 = (log_u - g) / static_cast<double>(population);

    LocalSections locals;
    Scaffold s;
    auto evaluate = [&](std::span<const std::size_t> indices, std::span<double> out) {
        const std::size_t first = locals.size();
        global.show_old();
        for (std::size_t k = 0; k < indices.size(); ++k) {
            construct_local_section(trace, b, indices[k], s);
            if (!s.transient.empty()) throw StructureChangeError("local section changes structure");
            for (const auto* list : {&s.target, &s.absorbing})
                for (NodeId id : *list)
                    if (!claimed.claim(id)) throw StructureChangeError("local sections overlap");
            out[k] = locals.detach(trace, s);
        }
        global.show_new();
        for (std::size_t k = 0; k < indices.size(); ++k) {
            const double w = locals.regenerate(trace, first + k);
            out[k] = w == kNegInf ? kNegInf : out[k] + w;
        }
    };

    SequentialTestResult test;
    try {
        test = sequential_test(mu0, population, evaluate, {config.batch, config.epsilon}, rng);
    } catch (const StructureChangeError&) {
        locals.restore(trace);
        global.restore();
        return fallback(population);
    }

    r.accepted = test.decision == Decision::H1;
    r.consumed = test.state.consumed;
    r.mu0 = mu0;
    r.mu_hat = test.state.mu_hat();
    r.log_accept_ratio = std::min(0.0, g + static_cast<double>(population) * r.mu_hat);
    r.nodes_touched = global.nodes_touched() + locals.nodes_touched();
    if (r.accepted) {
        global.commit();
        locals.commit(trace);
    } else {
        locals.restore(trace);
        global.restore();
    }
    if (diagnostics) {
        for (double m : test.state.batch_means) {
            diagnostics->recent_batch_means.push_back(m);
            if (diagnostics->recent_batch_means.size() > diagnostics->window)
                diagnostics->recent_batch_means.pop_front();
        }
    }
    return finish(r);
}

Value refresh_stale(Trace& trace, NodeId id) {
    if (trace.node(id).stochastic()) {
        trace.refresh_density(id);
        return trace.node(id).value;
    }
    return trace.value(id);
}

std::vector<ErrorRatePoint> empirical_error_curve(std::span<const double> population, double mu0,
                                                  std::span<const double> epsilons, std::size_t trials,
                                                  std::size_t batch, Rng& rng) {
    if (population.empty() || trials == 0) throw DomainError("error curve needs a population and trials");
    double total = 0.0;
    for (double l : population) total += l;
    const bool exact = total / static_cast<double>(population.size()) > mu0;
    std::vector<ErrorRatePoint> out;
    for (double eps : epsilons) {
        std::size_t errors = 0;
        double consumed = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto res = sequential_test(mu0, population, {batch, eps}, rng);
            if ((res.decision == Decision::H1) != exact) ++errors;
            consumed += static_cast<double>(res.state.consumed);
        }
        const double rate = static_cast<double>(errors) / static_cast<double>(trials);
        out.push_back({eps, rate, std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials)),
                       consumed / static_cast<double>(trials)});
    }
    return out;
}

double normality_diagnostic(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    if (xs.size() < 8) throw DomainError("normality diagnostic needs at least 8 samples");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 == 0.0) return std::numeric_limits<double>::infinity();
    const double b1 = m3 / std::pow(m2, 1.5);
    const double y = b1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
    const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                         ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
    const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
    const double alpha = std::sqrt(2.0 / (w2 - 1.0));
    const double ya = y / alpha;
    const double z1 = delta * std::log(ya + std::sqrt(ya * ya + 1.0));

    const double b2 = m4 / (m2 * m2);
    const double e = 3.0 * (n - 1.0) / (n + 1.0);
    const double var = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    const double x = (b2 - e) / std::sqrt(var);
    const double beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                         std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
    const double a = 6.0 + 8.0 / beta1 * (2.0 / beta1 + std::sqrt(1.0 + 4.0 / (beta1 * beta1)));
    const double term = (1.0 - 2.0 / a) / (1.0 + x * std::sqrt(2.0 / (a - 4.0)));
    const double z2 = ((1.0 - 2.0 / (9.0 * a)) - std::cbrt(term)) / std::sqrt(2.0 / (9.0 * a));
    return z1 * z1 + z2 * z2;
}

}  // namespace austere
