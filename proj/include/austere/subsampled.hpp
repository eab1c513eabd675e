#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "austere/mh.hpp"
#include "austere/regen.hpp"
#include "austere/rng.hpp"
#include "austere/trace.hpp"

namespace austere {

enum class Decision { H1, H2 };  // H1: accept the proposal, H2: keep the current state

struct SequentialTestConfig {
    std::size_t batch = 100;
    double epsilon = 0.01;  // 0 disables early stopping
};

struct SequentialTestState {
    std::size_t population = 0;
    std::size_t consumed = 0;
    std::size_t stages = 0;
    double mu0 = 0.0;
    double sum = 0.0;
    double mean = 0.0;  // running mean (Welford)
    double m2 = 0.0;    // running sum of squared deviations
    std::vector<double> batch_means;

    double mu_hat() const { return consumed ? sum / static_cast<double>(consumed) : 0.0; }
    double sample_sd() const;
    // s_l / sqrt(n) with the finite population correction.
    double standard_error() const;
};

struct SequentialTestResult {
    Decision decision = Decision::H2;
    SequentialTestState state;
};

// Fills out[k] with l_{indices[k]}.
using BatchEvaluator = std::function<void(std::span<const std::size_t> indices, std::span<double> out)>;

// Sequential t-test of mean(l) against mu0 on batches drawn without replacement.
SequentialTestResult sequential_test(double mu0, std::size_t population, const BatchEvaluator& evaluate,
                                     const SequentialTestConfig& config, Rng& rng);
SequentialTestResult sequential_test(double mu0, std::span<const double> population,
                                     const SequentialTestConfig& config, Rng& rng);

struct SubsampledConfig {
    std::size_t batch = 100;
    double epsilon = 0.01;
};

struct SubsampledDiagnostics {
    std::map<std::size_t, std::size_t> consumed_histogram;
    std::size_t transitions = 0;
    std::size_t fallbacks = 0;
    std::uint64_t stale_repairs = 0;
    std::deque<double> recent_batch_means;
    std::size_t window = 500;

    // Omnibus normality statistic over the recent batch means.
    double normality_stat() const;
};

// Austerity MH: the global section is always evaluated, local sections are
// materialised lazily until the sequential test decides.  Falls back to the
// exact kernel when no border exists, when N < 2m, or when sections overlap.
TransitionResult subsampled_mh_transition(Trace& trace, NodeId principal, const ProposalSpec& proposal,
                                          const SubsampledConfig& config, Rng& rng,
                                          SubsampledDiagnostics* diagnostics = nullptr);

// Reads a node, repairing it and its stale ancestors.
Value refresh_stale(Trace& trace, NodeId id);

struct ErrorRatePoint {
    double epsilon;
    double error_rate;
    double standard_error;
    double mean_consumed;
};

// Fraction of sequential decisions that disagree with the exhaustive one.
std::vector<ErrorRatePoint> empirical_error_curve(std::span<const double> population, double mu0,
                                                  std::span<const double> epsilons, std::size_t trials,
                                                  std::size_t batch, Rng& rng);

// D'Agostino-Pearson K^2; approximately chi-square with 2 dof under normality.
double normality_diagnostic(std::span<const double> samples);

}  // namespace austere
