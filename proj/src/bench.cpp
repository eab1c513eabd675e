#include "austere/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <regex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "austere/errors.hpp"
#include "austere/mh.hpp"
#include "austere/trace.hpp"

namespace austere {

namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

std::int64_t nanos_since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

// Runs f(0..n-1) on up to `threads` workers; rethrows the first failure.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

Directive observe(ExprPtr expr, Value v) {
    return Directive{ObserveDirective{std::move(expr), make_constant(std::move(v))}, {}};
}

NodeId scope_principal(const Trace& trace, const std::string& scope) {
    const auto entries = trace.scopes().find(scope);
    if (entries.empty()) throw UnknownScope("scope '" + scope + "' has no registered random choices");
    return entries.front()->principal;
}

NodeId scope_node(const Trace& trace, const std::string& scope) {
    const auto entries = trace.scopes().find(scope);
    if (entries.empty()) throw UnknownScope("scope '" + scope + "' has no registered random choices");
    return entries.front()->scope_node;
}

Trace build_trace(const std::vector<Directive>& program, Rng rng) {
    Trace trace;
    for (const Directive& d : program) trace.eval_directive(d, rng);
    return trace;
}

double ess_per_sec(double ess, double seconds) { return seconds > 0.0 ? ess / seconds : 0.0; }

}  // namespace

Experiment parse_experiment(const std::string& name) {
    if (name == "sublinearity") return Experiment::Sublinearity;
    if (name == "sv") return Experiment::Sv;
    if (name == "conjugate") return Experiment::Conjugate;
    if (name == "error-curve") return Experiment::ErrorCurve;
    throw ConfigError("unknown experiment '" + name + "'");
}

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::Sublinearity: return "sublinearity";
        case Experiment::Sv: return "sv";
        case Experiment::Conjugate: return "conjugate";
        case Experiment::ErrorCurve: return "error-curve";
    }
    return "?";
}

ExperimentConfig normalized(ExperimentConfig c) {
    const Experiment e = c.experiment;
    if (c.n_grid.empty()) {
        if (e == Experiment::Sublinearity)
            for (double k : {3.0, 3.5, 4.0, 4.5, 5.0}) c.n_grid.push_back(std::round(std::pow(10.0, k)));
        else if (e == Experiment::Conjugate || e == Experiment::ErrorCurve)
            c.n_grid = {1e4};
    }
    if (c.eps_grid.empty()) c.eps_grid = {0.1, 0.01, 0.001};
    if (!c.epsilon) c.epsilon = e == Experiment::Sv ? 1e-3 : 0.01;
    if (!c.batch) c.batch = e == Experiment::Sv ? 25 : 100;
    if (!c.iterations) {
        switch (e) {
            case Experiment::Sublinearity: c.iterations = 300; break;
            case Experiment::Sv: c.iterations = 20000; break;
            case Experiment::Conjugate: c.iterations = 20000; break;
            case Experiment::ErrorCurve: c.iterations = 1; break;
        }
    }
    if (!c.burnin) c.burnin = e == Experiment::Sv ? 2000 : e == Experiment::Conjugate ? 1000 : 0;
    if (!c.sigma) {
        c.sigma = e == Experiment::Conjugate && !c.n_grid.empty() ? 2.4 / std::sqrt(c.n_grid.front() + 1.0) : 0.1;
    }

    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
    };
    for (double n : c.n_grid) {
        positive(n, "dataset size");
        if (std::floor(n) != n) throw ConfigError("dataset sizes must be integers");
    }
    if (!std::is_sorted(c.n_grid.begin(), c.n_grid.end())) throw ConfigError("the N grid must be ascending");
    for (double eps : c.eps_grid)
        if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("tolerances must lie in (0, 1)");
    if (!(*c.epsilon > 0.0 && *c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (*c.batch == 0) throw ConfigError("batch size must be positive");
    if (*c.iterations == 0) throw ConfigError("iterations must be positive");
    if (c.exact_iterations == 0) throw ConfigError("exact iterations must be positive");
    positive(*c.sigma, "drift width");
    positive(c.prior_variance, "prior variance");
    positive(c.phi_width, "phi drift width");
    positive(c.sig_width, "sig drift width");
    positive(c.sig, "sig");
    positive(c.state_ratio, "state ratio");
    positive(c.offset, "offset");
    if (!(c.phi > 0.0 && c.phi < 1.0)) throw ConfigError("phi must lie in (0, 1)");
    if (c.series == 0 || c.length == 0) throw ConfigError("series count and length must be positive");
    if (c.chains == 0 || c.threads == 0 || c.trials == 0) throw ConfigError("chains, threads and trials must be positive");
    return c;
}

LogisticData gen_logistic_data(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("dataset size must be positive");
    Rng rng = Rng(seed).split(0x10);
    LogisticData d;
    d.features.rows = n;
    d.features.cols = 3;
    d.features.data.reserve(3 * n);
    d.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double centre = rng.below(2) ? 1.0 : -1.0;
        const double x1 = centre + 0.8 * rng.normal();
        const double x2 = centre + 0.8 * rng.normal();
        const double x[3] = {x1, x2, 1.0};
        d.features.data.insert(d.features.data.end(), x, x + 3);
        d.labels.push_back(rng.uniform01() < linear_logistic(kLogisticTruth, x));
    }
    return d;
}

SvData gen_sv_data(std::size_t series, std::size_t length, double phi, double sig, std::uint64_t seed) {
    Rng rng = Rng(seed).split(0x20);
    SvData d;
    for (std::size_t s = 0; s < series; ++s) {
        std::vector<double> hs, xs;
        double h = 0.0;
        for (std::size_t t = 0; t < length; ++t) {
            h = phi * h + sig * rng.normal();
            hs.push_back(h);
            xs.push_back(std::exp(h / 2.0) * rng.normal());
        }
        d.h.push_back(std::move(hs));
        d.x.push_back(std::move(xs));
    }
    return d;
}

std::vector<Directive> logistic_program(const LogisticData& data, double prior_variance) {
    static const std::string text =
        "[assume w (scope_include 'w 0 (multivariate_normal {mu} {Sig}))]\n"
        "[assume y_x (lambda (x) (bernoulli (linear_logistic w x)))]\n";
    Matrix sig{3, 3, std::vector<double>(9, 0.0)};
    for (std::size_t k = 0; k < 3; ++k) sig.data[k * 3 + k] = prior_variance;
    Bindings b{{"mu", Value::vector({0.0, 0.0, 0.0})}, {"Sig", Value::matrix(sig)}};
    std::vector<Directive> program = desugar(parse_program(text), b);
    const ExprPtr y_x = make_symbol("y_x");
    for (std::size_t i = 0; i < data.features.rows; ++i) {
        program.push_back(observe(make_combination(y_x, {make_constant(Value::vector(data.features.row(i)))}),
                                  Value::boolean(data.labels[i])));
    }
    return program;
}

std::vector<Directive> sv_program(const SvData& data) {
    static const std::string text =
        "[assume sig (scope_include 'sig 0 (sqrt (inv_gamma 5 0.05)))]\n"
        "[assume phi (scope_include 'phi 0 (beta 5 1))]\n"
        "[assume h (mem (lambda (s t) (scope_include 'h (+ (* s {stride}) t)\n"
        "  (if (<= t 0) 0 (normal (* phi (h s (- t 1))) sig)))))]\n"
        "[assume x (lambda (s t) (normal 0 (exp (/ (h s t) 2))))]\n";
    std::size_t length = 0;
    for (const auto& xs : data.x) length = std::max(length, xs.size());
    Bindings b{{"stride", Value::real(static_cast<double>(length + 1))}};
    std::vector<Directive> program = desugar(parse_program(text), b);
    const ExprPtr x = make_symbol("x");
    for (std::size_t s = 0; s < data.x.size(); ++s) {
        for (std::size_t t = 0; t < data.x[s].size(); ++t) {
            program.push_back(observe(make_combination(x, {make_constant(Value::real(static_cast<double>(s + 1))),
                                                           make_constant(Value::real(static_cast<double>(t + 1)))}),
                                      Value::real(data.x[s][t])));
        }
    }
    return program;
}

std::vector<Directive> conjugate_program(std::span<const double> ys) {
    std::vector<Directive> program = parse_program("[assume x (scope_include 'x 0 (normal 0 1))]");
    const ExprPtr normal = make_symbol("normal");
    const ExprPtr x = make_symbol("x");
    const ExprPtr one = make_constant(Value::real(1.0));
    for (double y : ys) program.push_back(observe(make_combination(normal, {x, one}), Value::real(y)));
    return program;
}

std::string expand_loops(const std::string& text, const std::map<std::string, long long>& sizes) {
    static const std::regex header(R"(^([ \t]*)for\s+([A-Za-z_][A-Za-z0-9_]*)\s+in\s+(\S+?)\s*\.\.\.\s*(\S+?)\s*:\s*(#.*)?$)");
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        for (std::string line; std::getline(in, line);) lines.push_back(line);
    }
    auto bound = [&](const std::string& token) -> long long {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(token, &used);
            if (used == token.size()) return v;
        } catch (const std::exception&) {
        }
        const auto it = sizes.find(token);
        if (it == sizes.end()) throw UnboundParameter(token);
        return it->second;
    };
    auto indent_of = [](const std::string& line) {
        const std::size_t k = line.find_first_not_of(" \t");
        return k == std::string::npos ? std::string::npos : k;
    };
    std::function<std::string(std::size_t, std::size_t)> expand = [&](std::size_t begin, std::size_t end) {
        std::string out;
        for (std::size_t i = begin; i < end; ++i) {
            std::smatch m;
            if (!std::regex_match(lines[i], m, header)) {
                out += lines[i] + '\n';
                continue;
            }
            const std::size_t outer = m[1].length();
            std::size_t j = i + 1;
            while (j < lines.size()) {
                const std::size_t ind = indent_of(lines[j]);
                if (ind != std::string::npos && ind <= outer) break;
                ++j;
            }
            const std::string body = expand(i + 1, j);
            const std::regex var("\\b" + m[2].str() + "\\b");
            for (long long v = bound(m[3].str()), hi = bound(m[4].str()); v <= hi; ++v)
                out += std::regex_replace(body, var, std::to_string(v));
            i = j - 1;
        }
        return out;
    };
    std::string out = expand(0, lines.size());
    if (!text.empty() && text.back() != '\n' && !out.empty()) out.pop_back();
    return out;
}

// --- sublinearity ---------------------------------------------------------

SublinearityReport run_sublinearity(const ExperimentConfig& raw) {
    const ExperimentConfig c = normalized(raw);
    const RealVector current(std::begin(kLogisticTruth), std::end(kLogisticTruth));
    RealVector proposed = current;
    {
        Rng z = Rng(c.seed).split(0x30);
        for (double& w : proposed) w += *c.sigma * z.normal();
    }
    const SubsampledConfig sub{*c.batch, *c.epsilon};
    SublinearityReport report;
    report.rows.resize(c.n_grid.size());
    parallel_for(c.n_grid.size(), c.threads, [&](std::size_t g) {
        const auto n = static_cast<std::size_t>(c.n_grid[g]);
        const Rng base = Rng(c.seed).split(0x100 + g);
        Trace trace = build_trace(logistic_program(gen_logistic_data(n, c.seed), c.prior_variance), base.split(1));
        const NodeId w = scope_principal(trace, "w");
        set_principal_value(trace, w, Value::vector(current));
        Rng rng = base.split(2);
        SublinearityRow row;
        row.n = n;
        std::size_t fallbacks = 0, accepts = 0;
        double consumed = 0.0, wall = 0.0;
        for (std::size_t it = 0; it < *c.iterations; ++it) {
            const TransitionResult r = subsampled_mh_transition(trace, w, FixedValue{Value::vector(proposed)}, sub, rng);
            consumed += static_cast<double>(r.consumed);
            wall += static_cast<double>(r.wall_nanos);
            fallbacks += r.fallback;
            accepts += r.accepted;
            if (r.accepted) set_principal_value(trace, w, Value::vector(current));
        }
        const double iters = static_cast<double>(*c.iterations);
        row.mean_consumed = consumed / iters;
        row.mean_wall_ns = wall / iters;
        row.fallback_rate = static_cast<double>(fallbacks) / iters;
        row.accept_rate = static_cast<double>(accepts) / iters;
        double exact_wall = 0.0, touched = 0.0;
        for (std::size_t it = 0; it < c.exact_iterations; ++it) {
            const TransitionResult r = mh_transition(trace, w, FixedValue{Value::vector(proposed)}, rng);
            exact_wall += static_cast<double>(r.wall_nanos);
            touched += static_cast<double>(r.nodes_touched);
            if (r.accepted) set_principal_value(trace, w, Value::vector(current));
        }
        row.exact_wall_ns = exact_wall / static_cast<double>(c.exact_iterations);
        row.exact_nodes_touched = touched / static_cast<double>(c.exact_iterations);
        report.rows[g] = row;
    });
    if (report.rows.size() >= 2) {
        std::vector<double> ns, consumed, touched, wall, exact_wall;
        for (const auto& r : report.rows) {
            ns.push_back(static_cast<double>(r.n));
            consumed.push_back(r.mean_consumed);
            touched.push_back(r.exact_nodes_touched);
            wall.push_back(r.mean_wall_ns);
            exact_wall.push_back(r.exact_wall_ns);
        }
        report.consumed_slope = log_log_slope(ns, consumed);
        report.exact_nodes_slope = log_log_slope(ns, touched);
        report.wall_slope = log_log_slope(ns, wall);
        report.exact_wall_slope = log_log_slope(ns, exact_wall);
    }
    return report;
}

void write_sublinearity_csv(std::ostream& out, const SublinearityReport& report, bool timing) {
    out << "N,mean_consumed,mean_wall_ns,exact_wall_ns,exact_nodes_touched,fallback_rate,accept_rate\n";
    for (const auto& r : report.rows) {
        out << r.n << ',' << Value::real(r.mean_consumed).to_string() << ','
            << Value::real(timing ? r.mean_wall_ns : 0.0).to_string() << ','
            << Value::real(timing ? r.exact_wall_ns : 0.0).to_string() << ','
            << Value::real(r.exact_nodes_touched).to_string() << ',' << Value::real(r.fallback_rate).to_string()
            << ',' << Value::real(r.accept_rate).to_string() << '\n';
    }
}

std::string sublinearity_json(const SublinearityReport& report, const ExperimentConfig& raw) {
    const ExperimentConfig c = normalized(raw);
    Json j;
    j["experiment"] = "sublinearity";
    j["seed"] = c.seed;
    j["epsilon"] = *c.epsilon;
    j["batch"] = *c.batch;
    j["drift"] = *c.sigma;
    j["iterations"] = *c.iterations;
    j["consumed_slope"] = report.consumed_slope;
    j["exact_nodes_slope"] = report.exact_nodes_slope;
    j["wall_slope"] = report.wall_slope;
    j["exact_wall_slope"] = report.exact_wall_slope;
    Json rows = Json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"N", r.n},
                        {"mean_consumed", r.mean_consumed},
                        {"consumed_fraction", r.mean_consumed / static_cast<double>(r.n)},
                        {"fallback_rate", r.fallback_rate}});
    j["rows"] = rows;
    return j.dump(2);
}

// --- stochastic volatility ------------------------------------------------

namespace {

struct SvChainPlan {
    std::string id;
    bool subsampled;
    Rng rng;
};

SvChain run_sv_chain(const ExperimentConfig& c, const std::vector<Directive>& program, const SvChainPlan& plan) {
    Trace trace = build_trace(program, plan.rng.split(1));
    Rng rng = plan.rng.split(2);
    std::vector<NodeId> states;
    for (const ScopeEntry* e : trace.scopes().find("h")) states.push_back(e->principal);
    const NodeId phi = scope_principal(trace, "phi");
    const NodeId sig = scope_principal(trace, "sig");
    const NodeId phi_out = scope_node(trace, "phi");
    const NodeId sig_out = scope_node(trace, "sig");
    const SubsampledConfig sub{*c.batch, *c.epsilon};
    const ProposalSpec phi_move = GaussianDrift{c.phi_width};
    const ProposalSpec sig_move = GaussianDrift{c.sig_width};
    SubsampledDiagnostics diag;

    SvChain chain;
    chain.id = plan.id;
    chain.subsampled = plan.subsampled;
    auto param_step = [&](NodeId v, const ProposalSpec& move) {
        return plan.subsampled ? subsampled_mh_transition(trace, v, move, sub, rng, &diag)
                               : mh_transition(trace, v, move, rng);
    };

    double credit = 0.0;
    std::size_t phi_accepts = 0, sig_accepts = 0;
    double consumed_total = 0.0;
    const std::size_t total = *c.burnin + *c.iterations;
    for (std::size_t it = 0; it < total; ++it) {
        const auto start = Clock::now();
        double state_work = 0.0;
        for (NodeId v : states) {
            const TransitionResult r = mh_transition(trace, v, PriorResimulation{}, rng);
            state_work += static_cast<double>(r.nodes_touched);
        }
        chain.state_updates += states.size();
        credit += state_work / c.state_ratio;
        std::size_t consumed = 0;
        bool accepted = false;
        while (credit > 0.0) {
            const TransitionResult rp = param_step(phi, phi_move);
            const TransitionResult rs = param_step(sig, sig_move);
            credit -= static_cast<double>(rp.nodes_touched + rs.nodes_touched);
            phi_accepts += rp.accepted;
            sig_accepts += rs.accepted;
            accepted = accepted || rp.accepted || rs.accepted;
            if (plan.subsampled) consumed += rp.consumed + rs.consumed;
            chain.param_updates += 2;
        }
        consumed_total += static_cast<double>(consumed);
        const std::int64_t wall = nanos_since(start);
        if (it < *c.burnin) continue;
        chain.kernel_nanos += wall;
        const Value phi_value = trace.value(phi_out);
        const Value sig_value = trace.value(sig_out);
        chain.phi.push_back(phi_value.as_real());
        chain.sig.push_back(sig_value.as_real());
        const std::size_t iter = it - *c.burnin;
        chain.records.push_back({chain.id, iter, "phi", phi_value, wall, consumed, accepted});
        chain.records.push_back({chain.id, iter, "sig", sig_value, wall, consumed, accepted});
    }
    const double updates = std::max<double>(1.0, static_cast<double>(chain.param_updates / 2));
    chain.phi_accept = static_cast<double>(phi_accepts) / updates;
    chain.sig_accept = static_cast<double>(sig_accepts) / updates;
    chain.mean_consumed = plan.subsampled ? consumed_total / (2.0 * updates) : 0.0;
    chain.fallbacks = diag.fallbacks;
    chain.normality = plan.subsampled ? diag.normality_stat() : 0.0;
    return chain;
}

SvKernelSummary summarize_kernel(const std::vector<SvChain>& chains, bool subsampled, std::vector<double>& phi_all,
                                 std::vector<double>& sig_all) {
    SvKernelSummary s;
    for (const SvChain& ch : chains) {
        if (ch.subsampled != subsampled) continue;
        phi_all.insert(phi_all.end(), ch.phi.begin(), ch.phi.end());
        sig_all.insert(sig_all.end(), ch.sig.begin(), ch.sig.end());
        s.phi_ess += effective_sample_size(ch.phi);
        s.sig_ess += effective_sample_size(ch.sig);
        s.seconds += static_cast<double>(ch.kernel_nanos) * 1e-9;
    }
    s.phi_mean = mean(phi_all);
    s.sig_mean = mean(sig_all);
    s.phi_ess_per_sec = ess_per_sec(s.phi_ess, s.seconds);
    s.sig_ess_per_sec = ess_per_sec(s.sig_ess, s.seconds);
    return s;
}

}  // namespace

SvReport run_sv(const ExperimentConfig& raw) {
    const ExperimentConfig c = normalized(raw);
    const SvData data = gen_sv_data(c.series, c.length, c.phi, c.sig, c.seed);
    const std::vector<Directive> program = sv_program(data);
    std::vector<SvChainPlan> plans;
    const Rng master(c.seed);
    for (std::size_t k = 0; k < c.chains; ++k) {
        plans.push_back({"exact-" + std::to_string(k), false, master.split(0x200 + 2 * k)});
        plans.push_back({"subsampled-" + std::to_string(k), true, master.split(0x201 + 2 * k)});
    }
    SvReport report;
    report.chains.resize(plans.size());
    parallel_for(plans.size(), c.threads,
                 [&](std::size_t i) { report.chains[i] = run_sv_chain(c, program, plans[i]); });
    std::vector<double> phi_exact, sig_exact, phi_sub, sig_sub;
    report.exact = summarize_kernel(report.chains, false, phi_exact, sig_exact);
    report.subsampled = summarize_kernel(report.chains, true, phi_sub, sig_sub);
    report.ks_phi = ks_two_sample(phi_exact, phi_sub, report.exact.phi_ess, report.subsampled.phi_ess);
    report.ks_sig = ks_two_sample(sig_exact, sig_sub, report.exact.sig_ess, report.subsampled.sig_ess);
    report.notes = {
        std::to_string(c.series) + " series of length " + std::to_string(c.length) + " (desk scale)",
        "latent states updated by single-site MH with prior proposals instead of particle Gibbs",
        "observation scale exp(h/2)",
    };
    return report;
}

void write_sv_csv(std::ostream& out, const SvReport& report, bool timing) {
    std::vector<SampleRecord> all;
    for (const SvChain& ch : report.chains) all.insert(all.end(), ch.records.begin(), ch.records.end());
    write_samples_csv(out, all, timing);
}

std::string sv_json(const SvReport& report, const ExperimentConfig& raw) {
    const ExperimentConfig c = normalized(raw);
    auto kernel = [](const SvKernelSummary& s) {
        return Json{{"phi_mean", s.phi_mean},
                    {"sig_mean", s.sig_mean},
                    {"phi_ess", s.phi_ess},
                    {"sig_ess", s.sig_ess},
                    {"seconds", s.seconds},
                    {"phi_ess_per_sec", s.phi_ess_per_sec},
                    {"sig_ess_per_sec", s.sig_ess_per_sec}};
    };
    Json j;
    j["experiment"] = "sv";
    j["notes"] = report.notes;
    j["seed"] = c.seed;
    j["series"] = c.series;
    j["length"] = c.length;
    j["epsilon"] = *c.epsilon;
    j["batch"] = *c.batch;
    j["iterations"] = *c.iterations;
    j["burnin"] = *c.burnin;
    j["phi_width"] = c.phi_width;
    j["sig_width"] = c.sig_width;
    j["state_ratio"] = c.state_ratio;
    j["exact"] = kernel(report.exact);
    j["subsampled"] = kernel(report.subsampled);
    j["ks_phi"] = {{"statistic", report.ks_phi.statistic}, {"p_value", report.ks_phi.p_value}};
    j["ks_sig"] = {{"statistic", report.ks_sig.statistic}, {"p_value", report.ks_sig.p_value}};
    j["ess_per_sec_ratio"] = {
        {"phi", report.exact.phi_ess_per_sec > 0 ? report.subsampled.phi_ess_per_sec / report.exact.phi_ess_per_sec : 0.0},
        {"sig", report.exact.sig_ess_per_sec > 0 ? report.subsampled.sig_ess_per_sec / report.exact.sig_ess_per_sec : 0.0}};
    Json chains = Json::array();
    for (const SvChain& ch : report.chains) {
        chains.push_back({{"id", ch.id},
                          {"state_updates", ch.state_updates},
                          {"param_updates", ch.param_updates},
                          {"phi_accept", ch.phi_accept},
                          {"sig_accept", ch.sig_accept},
                          {"mean_consumed", ch.mean_consumed},
                          {"fallbacks", ch.fallbacks},
                          {"normality", std::isfinite(ch.normality) ? Json(ch.normality) : Json(nullptr)},
                          {"seconds", static_cast<double>(ch.kernel_nanos) * 1e-9}});
    }
    j["chains"] = chains;
    return j.dump(2);
}

// --- conjugate check ------------------------------------------------------

ConjugateReport run_conjugate_check(const ExperimentConfig& raw) {
    const ExperimentConfig c = normalized(raw);
    ConjugateReport report;
    report.n = static_cast<std::size_t>(c.n_grid.front());
    std::vector<double> ys(report.n);
    {
        Rng data = Rng(c.seed).split(0x40);
        for (double& y : ys) y = 0.5 + data.normal();
    }
    double sum = 0.0;
    for (double y : ys) sum += y;
    report.analytic_mean = sum / (1.0 + static_cast<double>(report.n));
    report.analytic_variance = 1.0 / (1.0 + static_cast<double>(report.n));
    const std::vector<Directive> program = conjugate_program(ys);

    auto run = [&](bool subsampled, Rng rng) {
        Trace trace = build_trace(program, rng.split(1));
        Rng step = rng.split(2);
        const NodeId x = scope_principal(trace, "x");
        const NodeId out = scope_node(trace, "x");
        const SubsampledConfig sub{*c.batch, *c.epsilon};
        const ProposalSpec move = GaussianDrift{*c.sigma};
        SubsampledDiagnostics diag;
        ConjugateKernelReport k;
        std::size_t accepts = 0;
        double consumed = 0.0;
        for (std::size_t it = 0; it < *c.burnin + *c.iterations; ++it) {
            const TransitionResult r =
                subsampled ? subsampled_mh_transition(trace, x, move, sub, step, &diag) : mh_transition(trace, x, move, step);
            if (it < *c.burnin) continue;
            k.kernel_nanos += r.wall_nanos;
            accepts += r.accepted;
            consumed += static_cast<double>(subsampled ? r.consumed : report.n);
            k.samples.push_back(trace.value(out).as_real());
        }
        const double iters = static_cast<double>(*c.iterations);
        k.mean = mean(k.samples);
        k.variance = variance(k.samples);
        k.ess = effective_sample_size(k.samples);
        k.mean_se = std::sqrt(k.variance / k.ess);
        k.variance_se = k.variance * std::sqrt(2.0 / k.ess);
        k.mean_within_4se = std::fabs(k.mean - report.analytic_mean) <= 4.0 * k.mean_se;
        k.variance_within_4se = std::fabs(k.variance - report.analytic_variance) <= 4.0 * k.variance_se;
        k.accept_rate = static_cast<double>(accepts) / iters;
        k.mean_consumed = consumed / iters;
        k.fallback_rate = subsampled && diag.transitions
                              ? static_cast<double>(diag.fallbacks) / static_cast<double>(diag.transitions)
                              : 0.0;
        k.normality = subsampled ? diag.normality_stat() : 0.0;
        return k;
    };
    const Rng master(c.seed);
    std::vector<ConjugateKernelReport> results(2);
    parallel_for(2, c.threads, [&](std::size_t i) { results[i] = run(i == 1, master.split(0x300 + i)); });
    report.exact = std::move(results[0]);
    report.subsampled = std::move(results[1]);
    report.ks = ks_two_sample(report.exact.samples, report.subsampled.samples, report.exact.ess, report.subsampled.ess);
    report.fallback_dominated = report.subsampled.fallback_rate > 0.5;
    return report;
}

std::string conjugate_json(const ConjugateReport& report, const ExperimentConfig& raw) {
    const ExperimentConfig c = normalized(raw);
    auto kernel = [](const ConjugateKernelReport& k) {
        return Json{{"mean", k.mean},
                    {"variance", k.variance},
                    {"ess", k.ess},
                    {"mean_se", k.mean_se},
                    {"variance_se", k.variance_se},
                    {"mean_within_4se", k.mean_within_4se},
                    {"variance_within_4se", k.variance_within_4se},
                    {"accept_rate", k.accept_rate},
                    {"mean_consumed", k.mean_consumed},
                    {"fallback_rate", k.fallback_rate},
                    {"normality", std::isfinite(k.normality) ? Json(k.normality) : Json(nullptr)},
                    {"seconds", static_cast<double>(k.kernel_nanos) * 1e-9}};
    };
    Json j;
    j["experiment"] = "conjugate";
    j["seed"] = c.seed;
    j["N"] = report.n;
    j["epsilon"] = *c.epsilon;
    j["batch"] = *c.batch;
    j["drift"] = *c.sigma;
    j["analytic_mean"] = report.analytic_mean;
    j["analytic_variance"] = report.analytic_variance;
    j["exact"] = kernel(report.exact);
    j["subsampled"] = kernel(report.subsampled);
    j["ks"] = {{"statistic", report.ks.statistic}, {"p_value", report.ks.p_value}};
    j["fallback_dominated"] = report.fallback_dominated;
    return j.dump(2);
}

// --- error curve ----------------------------------------------------------

ErrorCurveReport run_error_curve(const ExperimentConfig& raw) {
    const ExperimentConfig c = normalized(raw);
    ErrorCurveReport report;
    report.n = static_cast<std::size_t>(c.n_grid.front());
    std::vector<double> population(report.n);
    Rng rng = Rng(c.seed).split(0x50);
    for (double& l : population) l = rng.normal();
    report.population_mean = mean(population);
    report.mu0 = report.population_mean - c.offset * std::sqrt(variance(population));
    Rng test = Rng(c.seed).split(0x51);
    report.points = empirical_error_curve(population, report.mu0, c.eps_grid, c.trials, *c.batch, test);
    return report;
}

void write_error_curve_csv(std::ostream& out, const ErrorCurveReport& report) {
    out << "eps,error_rate,se,mean_consumed\n";
    for (const ErrorRatePoint& p : report.points) {
        out << Value::real(p.epsilon).to_string() << ',' << Value::real(p.error_rate).to_string() << ','
            << Value::real(p.standard_error).to_string() << ',' << Value::real(p.mean_consumed).to_string() << '\n';
    }
}

}  // namespace austere
