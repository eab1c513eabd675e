#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace austere {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased

// Effective sample size with Geyer's initial positive sequence truncation.
double effective_sample_size(std::span<const double> xs);

struct KsResult {
    double statistic;
    double p_value;
};

// Two-sample Kolmogorov-Smirnov test.  The effective sizes, when given,
// replace the raw counts in the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double effective_a = 0.0,
                       double effective_b = 0.0);

// Kolmogorov distribution upper tail Q(lambda).
double kolmogorov_q(double lambda);

// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace austere
