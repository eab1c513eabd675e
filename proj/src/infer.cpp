#include "austere/infer.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include <json.hpp>

#include "austere/errors.hpp"
#include "austere/stats.hpp"

namespace austere {

namespace {

std::size_t count_of(const Numeric& n, const char* what) {
    const double v = numeric_value(n);
    if (!(v >= 0.0) || std::floor(v) != v) throw ConfigError(std::string(what) + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

ProposalSpec to_proposal(const ProposalExpr& p, bool subsampled) {
    switch (p.kind) {
        case ProposalExpr::Kind::Default:
            if (subsampled) throw ConfigError("subsampled_mh needs an explicit proposal ('drift sigma or 'prior)");
            return PriorResimulation{};
        case ProposalExpr::Kind::Prior: return PriorResimulation{};
        case ProposalExpr::Kind::Drift: {
            const double sigma = numeric_value(p.sigma);
            if (!(sigma > 0.0)) throw ConfigError("drift width must be positive");
            return GaussianDrift{sigma};
        }
    }
    throw InternalError("unknown proposal kind");
}

struct Target {
    NodeId principal;
    std::string name;
};

std::vector<Target> resolve(const Trace& trace, const std::string& scope, const InferTarget& target, Rng& rng) {
    const auto entries = trace.scopes().find(scope);
    if (entries.empty()) throw UnknownScope("scope '" + scope + "' has no registered random choices");
    auto make = [&](const ScopeEntry* e) { return Target{e->principal, scope + "/" + e->label.to_string()}; };
    std::vector<Target> out;
    switch (target.kind) {
        case TargetKind::All:
            for (const ScopeEntry* e : entries) out.push_back(make(e));
            break;
        case TargetKind::One: out.push_back(make(entries[rng.below(entries.size())])); break;
        case TargetKind::Label: {
            const Value label = Value::real(numeric_value(target.label));
            const auto matches = trace.scopes().find(scope, label);
            if (matches.empty()) throw UnknownLabel("scope '" + scope + "' has no label " + label.to_string());
            for (const ScopeEntry* e : matches) out.push_back(make(e));
            break;
        }
    }
    return out;
}

void record_step(Trace& trace, const RunOptions& options, RunLog& log, std::int64_t wall, std::size_t consumed,
                 bool accepted) {
    const std::size_t iteration = log.steps++;
    log.kernel_nanos += wall;
    for (const auto& [label, node] : trace.predicts())
        log.samples.push_back({options.chain, iteration, label, trace.value(node), wall, consumed, accepted});
    for (const Watch& w : options.extra) {
        NodeId node = w.node;
        if (!w.scope.empty()) {
            const auto found = trace.scopes().find(w.scope, w.scope_label);
            if (found.empty()) throw UnknownLabel("watched scope '" + w.scope + "' is not registered");
            node = found.front()->scope_node;
        }
        log.samples.push_back({options.chain, iteration, w.label, trace.value(node), wall, consumed, accepted});
    }
}

template <typename Kernel>
void run_steps(Trace& trace, const std::string& scope, const InferTarget& target, std::size_t steps, bool subsampled,
               Rng& rng, const RunOptions& options, RunLog& log, Kernel&& kernel) {
    for (std::size_t s = 0; s < steps; ++s) {
        std::int64_t wall = 0;
        std::size_t consumed = 0;
        bool accepted = false;
        for (const Target& t : resolve(trace, scope, target, rng)) {
            const TransitionResult r = kernel(t.principal);
            wall += r.wall_nanos;
            consumed += r.consumed;
            accepted = accepted || r.accepted;
            if (options.record_transitions)
                log.transitions.push_back({log.transitions.size(), t.name, r, subsampled});
        }
        record_step(trace, options, log, wall, consumed, accepted);
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void run_infer(Trace& trace, const InferExpression& expr, Rng& rng, const RunOptions& options, RunLog& log) {
    if (const auto* mh = std::get_if<MHExpr>(&expr.node)) {
        const ProposalSpec proposal = to_proposal(mh->proposal, false);
        run_steps(trace, mh->scope, mh->target, count_of(mh->steps, "steps"), false, rng, options, log,
                  [&](NodeId v) { return mh_transition(trace, v, proposal, rng); });
    } else if (const auto* sm = std::get_if<SubsampledMHExpr>(&expr.node)) {
        const ProposalSpec proposal = to_proposal(sm->proposal, true);
        const std::size_t batch = count_of(sm->batch, "batch size");
        const double eps = numeric_value(sm->epsilon);
        if (batch == 0) throw ConfigError("batch size must be positive");
        if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
        const SubsampledConfig config{batch, eps};
        run_steps(trace, sm->scope, sm->target, count_of(sm->steps, "steps"), true, rng, options, log,
                  [&](NodeId v) { return subsampled_mh_transition(trace, v, proposal, config, rng, &log.diagnostics); });
    } else if (const auto* cyc = std::get_if<CycleExpr>(&expr.node)) {
        const std::size_t repeats = count_of(cyc->repeats, "cycle repeats");
        for (std::size_t r = 0; r < repeats; ++r)
            for (const InferExpression& k : cyc->kernels) run_infer(trace, k, rng, options, log);
    } else {
        const auto& u = std::get<UnsupportedExpr>(expr.node);
        throw UnsupportedKernel("inference kernel '" + u.kernel + "' is not supported");
    }
}

RunLog run_program(Trace& trace, const std::vector<Directive>& program, Rng& rng, const RunOptions& options) {
    RunLog log;
    for (const Directive& d : program) {
        if (const auto* i = std::get_if<InferDirective>(&d.node))
            run_infer(trace, i->expr, rng, options, log);
        else
            trace.eval_directive(d, rng);
    }
    return log;
}

void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& samples, bool timing) {
    out << "chain,iter,label,value,wall_ns,consumed,accepted\n";
    for (const SampleRecord& s : samples) {
        out << csv_field(s.chain) << ',' << s.iteration << ',' << csv_field(s.label) << ','
            << csv_field(s.value.to_string()) << ',' << (timing ? s.wall_nanos : 0) << ',' << s.consumed << ','
            << (s.accepted ? 1 : 0) << '\n';
    }
}

void write_transitions_csv(std::ostream& out, const std::vector<TransitionRecord>& transitions, bool timing) {
    out << "transition,principal,population,consumed,decision,log_u,mu0,mu_hat,fallback,wall_ns\n";
    for (const TransitionRecord& t : transitions) {
        const TransitionResult& r = t.result;
        out << t.index << ',' << csv_field(t.principal) << ',' << r.population << ',' << r.consumed << ','
            << (r.accepted ? "H1" : "H2") << ',' << Value::real(r.log_u).to_string() << ','
            << Value::real(r.mu0).to_string() << ',' << Value::real(r.mu_hat).to_string() << ','
            << (r.fallback ? 1 : 0) << ',' << (timing ? r.wall_nanos : 0) << '\n';
    }
}

std::string summarize_json(const std::vector<SampleRecord>& samples) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::vector<double>>> series;
    for (const SampleRecord& s : samples) {
        std::vector<double> xs;
        if (s.value.is_number())
            xs.push_back(s.value.as_real());
        else if (s.value.is_boolean())
            xs.push_back(s.value.as_bool() ? 1.0 : 0.0);
        else if (s.value.is_vector())
            xs = s.value.as_vector();
        else
            continue;
        auto& cols = series[s.label];
        if (cols.empty()) {
            order.push_back(s.label);
            cols.resize(xs.size());
        }
        if (cols.size() != xs.size()) continue;
        for (std::size_t k = 0; k < xs.size(); ++k) cols[k].push_back(xs[k]);
    }
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const std::string& label : order) {
        const auto& cols = series[label];
        auto stat = [&](auto f) {
            if (cols.size() == 1) return nlohmann::ordered_json(f(cols[0]));
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& c : cols) arr.push_back(f(c));
            return arr;
        };
        j[label] = {
            {"count", cols.empty() ? 0 : cols[0].size()},
            {"mean", stat([](const std::vector<double>& c) { return mean(c); })},
            {"std", stat([](const std::vector<double>& c) { return std::sqrt(variance(c)); })},
            {"ess", stat([](const std::vector<double>& c) { return effective_sample_size(c); })},
        };
    }
    return j.dump(2);
}

}  // namespace austere
