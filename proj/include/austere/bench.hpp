#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "austere/infer.hpp"
#include "austere/language.hpp"
#include "austere/stats.hpp"
#include "austere/subsampled.hpp"
#include "austere/value.hpp"

namespace austere {

enum class Experiment { Sublinearity, Sv, Conjugate, ErrorCurve };

Experiment parse_experiment(const std::string& name);
const char* to_string(Experiment e);

struct ExperimentConfig {
    Experiment experiment = Experiment::Sublinearity;
    std::uint64_t seed = 0;
    // Unset fields take the experiment's default in normalized().
    std::optional<double> epsilon;
    std::optional<std::size_t> batch;
    std::vector<double> n_grid;    // dataset sizes; conjugate and error-curve use the first entry
    std::vector<double> eps_grid;  // error-curve tolerances
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> burnin;
    std::size_t exact_iterations = 20;
    std::optional<double> sigma;  // drift width for logistic weights and the conjugate mean
    double prior_variance = 0.1;  // logistic weight prior N(0, v I)
    double phi_width = 0.1;
    double sig_width = 0.004;  // drift on the variance sig^2
    std::size_t series = 50;
    std::size_t length = 5;
    double phi = 0.95;
    double sig = 0.1;
    double state_ratio = 10.0;  // state-update work per unit of parameter-update work
    std::size_t chains = 4;  // per kernel (sv)
    std::size_t threads = 1;
    double offset = 0.05;  // error-curve: mean minus mu0, in population standard deviations
    std::size_t trials = 10000;
};

// Fills unset grids with the experiment's defaults and rejects invalid values
// with ConfigError.
ExperimentConfig normalized(ExperimentConfig config);

// --- synthetic data -------------------------------------------------------

struct LogisticData {
    Matrix features;  // N x 3, last column is the constant 1
    std::vector<bool> labels;
};

constexpr double kLogisticTruth[3] = {1.0, 0.5, -0.2};

LogisticData gen_logistic_data(std::size_t n, std::uint64_t seed);

struct SvData {
    std::vector<std::vector<double>> x;  // observations, per series
    std::vector<std::vector<double>> h;  // latent log-volatilities
};

SvData gen_sv_data(std::size_t series, std::size_t length, double phi, double sig, std::uint64_t seed);

// --- model programs -------------------------------------------------------

// Weights in scope 'w, label 0, with prior N(0, prior_variance I).
std::vector<Directive> logistic_program(const LogisticData& data, double prior_variance);

// Latent states in scope 'h labelled s * (length + 1) + t; parameters in
// scopes 'phi and 'sig.  Series and time indices start at 1; h(s, 0) = 0.
std::vector<Directive> sv_program(const SvData& data);

// Mean in scope 'x; prior N(0, 1), unit-variance observations.
std::vector<Directive> conjugate_program(std::span<const double> ys);

// Replaces `for VAR in A...B:` headers by copies of the indented body with
// VAR substituted as a whole word.  Bounds are integers or names in `sizes`.
std::string expand_loops(const std::string& text, const std::map<std::string, long long>& sizes = {});

// --- experiments ----------------------------------------------------------

struct SublinearityRow {
    std::size_t n = 0;
    double mean_consumed = 0.0;
    double mean_wall_ns = 0.0;
    double exact_wall_ns = 0.0;
    double exact_nodes_touched = 0.0;
    double fallback_rate = 0.0;
    double accept_rate = 0.0;
};

struct SublinearityReport {
    std::vector<SublinearityRow> rows;
    double consumed_slope = 0.0;
    double exact_nodes_slope = 0.0;
    double wall_slope = 0.0;
    double exact_wall_slope = 0.0;
};

SublinearityReport run_sublinearity(const ExperimentConfig& config);
void write_sublinearity_csv(std::ostream& out, const SublinearityReport& report, bool timing = true);
std::string sublinearity_json(const SublinearityReport& report, const ExperimentConfig& config);

struct SvChain {
    std::string id;
    bool subsampled = false;
    std::vector<double> phi;  // post-burn-in samples
    std::vector<double> sig;
    std::int64_t kernel_nanos = 0;
    std::size_t state_updates = 0;
    std::size_t param_updates = 0;
    double phi_accept = 0.0;
    double sig_accept = 0.0;
    double mean_consumed = 0.0;
    std::size_t fallbacks = 0;
    double normality = 0.0;
    std::vector<SampleRecord> records;
};

struct SvKernelSummary {
    double phi_mean = 0.0;
    double sig_mean = 0.0;
    double phi_ess = 0.0;
    double sig_ess = 0.0;
    double seconds = 0.0;
    double phi_ess_per_sec = 0.0;
    double sig_ess_per_sec = 0.0;
};

struct SvReport {
    std::vector<SvChain> chains;
    SvKernelSummary exact;
    SvKernelSummary subsampled;
    KsResult ks_phi{};
    KsResult ks_sig{};
    std::vector<std::string> notes;
};

SvReport run_sv(const ExperimentConfig& config);
void write_sv_csv(std::ostream& out, const SvReport& report, bool timing = true);
std::string sv_json(const SvReport& report, const ExperimentConfig& config);

struct ConjugateKernelReport {
    double mean = 0.0;
    double variance = 0.0;
    double ess = 0.0;
    double mean_se = 0.0;
    double variance_se = 0.0;
    bool mean_within_4se = false;
    bool variance_within_4se = false;
    double accept_rate = 0.0;
    double mean_consumed = 0.0;
    double fallback_rate = 0.0;
    double normality = 0.0;
    std::int64_t kernel_nanos = 0;
    std::vector<double> samples;
};

struct ConjugateReport {
    std::size_t n = 0;
    double analytic_mean = 0.0;
    double analytic_variance = 0.0;
    ConjugateKernelReport exact;
    ConjugateKernelReport subsampled;
    KsResult ks{};
    bool fallback_dominated = false;
};

ConjugateReport run_conjugate_check(const ExperimentConfig& config);
std::string conjugate_json(const ConjugateReport& report, const ExperimentConfig& config);

struct ErrorCurveReport {
    std::size_t n = 0;
    double mu0 = 0.0;
    double population_mean = 0.0;
    std::vector<ErrorRatePoint> points;
};

// Gaussian l-population of size N with mu0 placed `offset` standard
// deviations below its mean.
ErrorCurveReport run_error_curve(const ExperimentConfig& config);
void write_error_curve_csv(std::ostream& out, const ErrorCurveReport& report);

}  // namespace austere
