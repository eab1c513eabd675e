#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "austere/bench.hpp"
#include "austere/errors.hpp"
#include "austere/infer.hpp"
#include "austere/language.hpp"
#include "austere/trace.hpp"

namespace {

using namespace austere;
namespace fs = std::filesystem;

constexpr int kConfigExit = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

std::string sibling_json(const std::string& path) { return fs::path(path).replace_extension(".json").string(); }

Value scalar_value(const nlohmann::json& j) {
    if (j.is_boolean()) return Value::boolean(j.get<bool>());
    if (j.is_number()) return Value::real(j.get<double>());
    throw ConfigError("unsupported binding value " + j.dump());
}

bool all_numbers(const nlohmann::json& j) {
    return std::all_of(j.begin(), j.end(), [](const nlohmann::json& e) { return e.is_number(); });
}

// Numbers and booleans bind as values, numeric arrays as vectors, arrays of
// equal-length numeric arrays as matrices, anything else as a sequence.
Binding binding_value(const nlohmann::json& j) {
    if (!j.is_array()) return scalar_value(j);
    if (!j.empty() && all_numbers(j)) return Value::vector(j.get<std::vector<double>>());
    const bool rows = !j.empty() && std::all_of(j.begin(), j.end(), [&](const nlohmann::json& r) {
        return r.is_array() && !r.empty() && r.size() == j.front().size() && all_numbers(r);
    });
    if (rows) {
        Matrix m{j.size(), j.front().size(), {}};
        for (const auto& r : j)
            for (const auto& x : r) m.data.push_back(x.get<double>());
        return Value::matrix(std::move(m));
    }
    std::vector<Value> seq;
    for (const auto& e : j) {
        const Binding b = binding_value(e);
        if (!std::holds_alternative<Value>(b)) throw ConfigError("nested sequences are not supported");
        seq.push_back(std::get<Value>(b));
    }
    return seq;
}

void parse_bind(const std::string& text, Bindings& bindings, std::map<std::string, long long>& sizes) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--bind expects name=value, got '" + text + "'");
    const std::string name = text.substr(0, eq);
    std::string raw = text.substr(eq + 1);
    if (!raw.empty() && raw.front() == '@') raw = read_file(raw.substr(1));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("binding '" + name + "' is not valid JSON: " + e.what());
    }
    if (j.is_number_integer()) sizes[name] = j.get<long long>();
    bindings[name] = binding_value(j);
}

struct RunArgs {
    std::string model;
    std::vector<std::string> binds;
    std::uint64_t seed = 0;
    std::string out;
    std::string diag;
    std::string chain = "0";
    bool no_timing = false;
};

int run_model(const RunArgs& a) {
    Bindings bindings;
    std::map<std::string, long long> sizes;
    for (const std::string& b : a.binds) parse_bind(b, bindings, sizes);
    const std::string text = expand_loops(read_file(a.model), sizes);
    const std::vector<Directive> program = desugar(parse_program(text), bindings);
    Trace trace;
    Rng rng(a.seed);
    RunOptions options;
    options.chain = a.chain;
    options.record_transitions = !a.diag.empty();
    const RunLog log = run_program(trace, program, rng, options);
    std::ostringstream csv;
    write_samples_csv(csv, log.samples, !a.no_timing);
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        write_file(a.out, csv.str());
        write_file(sibling_json(a.out), summarize_json(log.samples) + "\n");
    }
    if (!a.diag.empty()) {
        std::ostringstream t;
        write_transitions_csv(t, log.transitions, !a.no_timing);
        write_file(a.diag, t.str());
    }
    std::cerr << "steps " << log.steps << ", transitions " << log.transitions.size() << ", fallbacks "
              << log.diagnostics.fallbacks << "\n";
    return 0;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse number '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

struct BenchArgs {
    std::string experiment;
    std::string out;
    std::string n_grid;
    std::string eps_grid;
    bool no_timing = false;
};

int run_bench(ExperimentConfig config, const BenchArgs& a) {
    config.experiment = parse_experiment(a.experiment);
    if (!a.n_grid.empty()) config.n_grid = parse_list(a.n_grid);
    if (!a.eps_grid.empty()) config.eps_grid = parse_list(a.eps_grid);
    config = normalized(config);
    const bool timing = !a.no_timing;
    auto emit = [&](const std::string& primary, const std::string& json) {
        if (a.out.empty()) {
            std::cout << primary;
        } else {
            write_file(a.out, primary);
            if (!json.empty()) write_file(sibling_json(a.out), json + "\n");
        }
    };
    switch (config.experiment) {
        case Experiment::Sublinearity: {
            const SublinearityReport r = run_sublinearity(config);
            std::ostringstream csv;
            write_sublinearity_csv(csv, r, timing);
            emit(csv.str(), sublinearity_json(r, config));
            std::cerr << "consumed slope " << r.consumed_slope << ", exact nodes slope " << r.exact_nodes_slope
                      << "\n";
            break;
        }
        case Experiment::Sv: {
            const SvReport r = run_sv(config);
            for (const std::string& note : r.notes) std::cerr << "note: " << note << "\n";
            std::ostringstream csv;
            write_sv_csv(csv, r, timing);
            emit(csv.str(), sv_json(r, config));
            std::cerr << "KS p phi " << r.ks_phi.p_value << ", sig " << r.ks_sig.p_value << "\n"
                      << "ESS/s exact phi " << r.exact.phi_ess_per_sec << " sig " << r.exact.sig_ess_per_sec
                      << "; subsampled phi " << r.subsampled.phi_ess_per_sec << " sig "
                      << r.subsampled.sig_ess_per_sec << "\n";
            break;
        }
        case Experiment::Conjugate: {
            const ConjugateReport r = run_conjugate_check(config);
            emit(conjugate_json(r, config) + "\n", "");
            break;
        }
        case Experiment::ErrorCurve: {
            const ErrorCurveReport r = run_error_curve(config);
            std::ostringstream csv;
            write_error_curve_csv(csv, r);
            emit(csv.str(), "");
            break;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"austere: trace-based probabilistic programs with exact and subsampled MH"};
    app.require_subcommand(1);

    RunArgs run;
    CLI::App* run_cmd = app.add_subcommand("run", "Evaluate a model file and write samples");
    run_cmd->add_option("model", run.model, "Model file")->required();
    run_cmd->add_option("--bind", run.binds, "External parameter name=JSON (or name=@file.json)");
    run_cmd->add_option("--seed", run.seed, "Master seed");
    run_cmd->add_option("--out", run.out, "Samples CSV (summary JSON is written next to it)");
    run_cmd->add_option("--diag", run.diag, "Per-transition diagnostics CSV");
    run_cmd->add_option("--chain", run.chain, "Chain id written to the samples");
    run_cmd->add_flag("--no-timing", run.no_timing, "Write zero wall times for byte-stable output");

    ExperimentConfig config;
    BenchArgs bench;
    double eps = 0.0, sigma = 0.0;
    std::size_t batch = 0, iters = 0, burnin = 0;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Run a benchmark experiment");
    bench_cmd->add_option("experiment", bench.experiment, "sublinearity | sv | conjugate | error-curve")
        ->required()
        ->check(CLI::IsMember({"sublinearity", "sv", "conjugate", "error-curve"}));
    bench_cmd->add_option("--seed", config.seed, "Master seed");
    auto* eps_opt = bench_cmd->add_option("--eps", eps, "Sequential test tolerance");
    auto* batch_opt = bench_cmd->add_option("--batch", batch, "Mini-batch size m");
    bench_cmd->add_option("--out", bench.out, "Output path");
    bench_cmd->add_option("--n-grid", bench.n_grid, "Comma-separated dataset sizes");
    bench_cmd->add_option("--eps-grid", bench.eps_grid, "Comma-separated tolerances (error-curve)");
    auto* iters_opt = bench_cmd->add_option("--iters", iters, "Iterations (post burn-in)");
    auto* burnin_opt = bench_cmd->add_option("--burnin", burnin, "Burn-in iterations");
    auto* sigma_opt = bench_cmd->add_option("--sigma", sigma, "Drift width (sublinearity, conjugate)");
    bench_cmd->add_option("--exact-iters", config.exact_iterations, "Exact baseline transitions per N");
    bench_cmd->add_option("--prior-variance", config.prior_variance, "Logistic weight prior variance");
    bench_cmd->add_option("--phi-width", config.phi_width, "SV drift width for phi");
    bench_cmd->add_option("--sig-width", config.sig_width, "SV drift width for sig^2");
    bench_cmd->add_option("--series", config.series, "SV series count");
    bench_cmd->add_option("--length", config.length, "SV series length");
    bench_cmd->add_option("--state-ratio", config.state_ratio, "SV state-to-parameter work ratio");
    bench_cmd->add_option("--chains", config.chains, "Chains per kernel (sv)");
    bench_cmd->add_option("--threads", config.threads, "Worker threads");
    bench_cmd->add_option("--offset", config.offset, "Error-curve mu0 offset in standard deviations");
    bench_cmd->add_option("--trials", config.trials, "Error-curve trials per tolerance");
    bench_cmd->add_flag("--no-timing", bench.no_timing, "Write zero wall times");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigExit;
    }

    try {
        if (*run_cmd) return run_model(run);
        if (*eps_opt) config.epsilon = eps;
        if (*batch_opt) config.batch = batch;
        if (*iters_opt) config.iterations = iters;
        if (*burnin_opt) config.burnin = burnin;
        if (*sigma_opt) config.sigma = sigma;
        return run_bench(config, bench);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const UnboundParameter& e) {
        std::cerr << "unbound parameter: " << e.what() << "\n";
        return kConfigExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
