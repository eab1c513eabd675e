#include <doctest.h>

#include <cmath>
#include <vector>

#include "austere/rng.hpp"
#include "austere/stats.hpp"
#include "austere/subsampled.hpp"

using namespace austere;

TEST_CASE("mean and unbiased variance") {
    const std::vector<double> xs{1, 2, 3, 4};
    CHECK(mean(xs) == 2.5);
    CHECK(variance(xs) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("effective sample size of independent draws is near n") {
    Rng rng(3);
    std::vector<double> xs(20000);
    for (double& x : xs) x = rng.normal();
    CHECK(effective_sample_size(xs) == doctest::Approx(20000).epsilon(0.1));
}

TEST_CASE("effective sample size of an AR(1) chain") {
    // For x_t = rho x_{t-1} + e_t the integrated autocorrelation time is (1 + rho) / (1 - rho).
    // A single chain's estimate spreads by about 4%; average eight of them.
    const double rho = 0.9;
    std::vector<double> xs(200000);
    double total = 0.0;
    for (std::uint64_t seed = 11; seed < 19; ++seed) {
        Rng rng(seed);
        double x = 0.0;
        for (double& v : xs) {
            x = rho * x + rng.normal();
            v = x;
        }
        total += effective_sample_size(xs);
    }
    const double expected = xs.size() * (1 - rho) / (1 + rho);
    CHECK(total / 8.0 == doctest::Approx(expected).epsilon(0.1));
}

// Reference values from scipy.special.kolmogorov.
TEST_CASE("kolmogorov tail") {
    CHECK(kolmogorov_q(0.5) == doctest::Approx(0.9639452436648751).epsilon(1e-9));
    CHECK(kolmogorov_q(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-9));
    CHECK(kolmogorov_q(1.36) == doctest::Approx(0.049485876755377876).epsilon(1e-9));
    CHECK(kolmogorov_q(2.0) == doctest::Approx(0.0006709252557796953).epsilon(1e-9));
}

TEST_CASE("two-sample KS statistic") {
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) a.push_back(0.1 * i);
    for (int i = 0; i < 25; ++i) b.push_back(0.13 * i + 0.2);
    const KsResult r = ks_two_sample(a, b);
    CHECK(r.statistic == doctest::Approx(0.44));  // scipy.stats.ks_2samp
    const double ne = 20.0 * 25.0 / 45.0;
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * 0.44;
    CHECK(r.p_value == doctest::Approx(kolmogorov_q(lambda)));
    const KsResult eff = ks_two_sample(a, b, 5.0, 5.0);
    CHECK(eff.statistic == r.statistic);
    CHECK(eff.p_value > r.p_value);
}

TEST_CASE("identical samples are not distinguished") {
    std::vector<double> a{0.3, 0.1, 0.2, 0.5};
    const KsResult r = ks_two_sample(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("log-log slope") {
    const std::vector<double> x{10, 100, 1000};
    const std::vector<double> y{3, 30, 300};
    CHECK(log_log_slope(x, y) == doctest::Approx(1.0));
    const std::vector<double> z{5, 5 * std::sqrt(10.0), 50};
    CHECK(log_log_slope(x, z) == doctest::Approx(0.5));
}

// Reference statistics from scipy.stats.normaltest.
TEST_CASE("normality omnibus statistic") {
    std::vector<double> xs, ys;
    for (int i = 1; i <= 30; ++i) xs.push_back(static_cast<double>((i * i) % 17));
    for (int i = 0; i < 40; ++i) ys.push_back(std::sin(i) * 3.0 + i * 0.1);
    CHECK(normality_diagnostic(xs) == doctest::Approx(16.666741455771618).epsilon(1e-9));
    CHECK(normality_diagnostic(ys) == doctest::Approx(2.86225804272832).epsilon(1e-9));
}
