#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "austere/distributions.hpp"
#include "austere/errors.hpp"
#include "austere/rng.hpp"

using namespace austere;

namespace {

double lp(std::string_view name, std::vector<Value> params, Value x) {
    return log_pdf(find_distribution(name)->family, params, x);
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

// Reference log densities computed with scipy.stats.
TEST_CASE("log densities match reference values") {
    CHECK(lp("normal", {Value::real(1.0), Value::real(2.0)}, Value::real(0.3)) ==
          doctest::Approx(-1.6733357137646179).epsilon(1e-12));
    CHECK(lp("gamma", {Value::real(2.0), Value::real(3.0)}, Value::real(0.7)) ==
          doctest::Approx(-0.25945036660251297).epsilon(1e-12));
    CHECK(lp("beta", {Value::real(5.0), Value::real(1.0)}, Value::real(0.9)) ==
          doctest::Approx(1.1879958498027952).epsilon(1e-12));
    CHECK(lp("beta", {Value::real(2.0), Value::real(3.0)}, Value::real(0.25)) ==
          doctest::Approx(0.523248143764548).epsilon(1e-12));
    CHECK(lp("inv_gamma", {Value::real(5.0), Value::real(0.05)}, Value::real(0.012)) ==
          doctest::Approx(4.213709910380254).epsilon(1e-12));
    CHECK(lp("bernoulli", {Value::real(0.3)}, Value::boolean(true)) == doctest::Approx(-1.2039728043259361));
    CHECK(lp("uniform_continuous", {Value::real(1.0), Value::real(3.0)}, Value::real(2.0)) ==
          doctest::Approx(-0.6931471805599453));
    Matrix s{2, 2, {2.0, 0.3, 0.3, 1.0}};
    CHECK(lp("multivariate_normal", {Value::vector({0.5, -1.0}), Value::matrix(s)}, Value::vector({1.0, 0.0})) ==
          doctest::Approx(-2.6718998916270964).epsilon(1e-12));
}

TEST_CASE("values outside the support have zero density") {
    CHECK(lp("beta", {Value::real(5.0), Value::real(1.0)}, Value::real(1.2)) == kNegInf);
    CHECK(lp("beta", {Value::real(5.0), Value::real(1.0)}, Value::real(-0.1)) == kNegInf);
    CHECK(lp("gamma", {Value::real(2.0), Value::real(1.0)}, Value::real(-1.0)) == kNegInf);
    CHECK(lp("inv_gamma", {Value::real(5.0), Value::real(0.05)}, Value::real(0.0)) == kNegInf);
    CHECK(lp("uniform_continuous", {Value::real(0.0), Value::real(1.0)}, Value::real(2.0)) == kNegInf);
    CHECK(lp("bernoulli", {Value::real(1.0)}, Value::boolean(false)) == kNegInf);
}

TEST_CASE("invalid parameters raise DomainError") {
    CHECK_THROWS_AS(lp("normal", {Value::real(0.0), Value::real(-1.0)}, Value::real(0.0)), DomainError);
    CHECK_THROWS_AS(lp("bernoulli", {Value::real(1.5)}, Value::boolean(true)), DomainError);
    CHECK_THROWS_AS(lp("beta", {Value::real(0.0), Value::real(1.0)}, Value::real(0.5)), DomainError);
    Matrix not_pd{2, 2, {1.0, 2.0, 2.0, 1.0}};
    CHECK_THROWS_AS(lp("multivariate_normal", {Value::vector({0, 0}), Value::matrix(not_pd)}, Value::vector({0, 0})),
                    DomainError);
    Matrix eye{2, 2, {1.0, 0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(lp("multivariate_normal", {Value::vector({0, 0, 0}), Value::matrix(eye)}, Value::vector({0, 0})),
                    DimensionMismatch);
}

TEST_CASE("sampling moments") {
    Rng rng(42);
    const int n = 200000;
    auto moments = [&](std::string_view name, std::vector<Value> params) {
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = sample(find_distribution(name)->family, params, rng).as_real();
            s += x;
            s2 += x * x;
        }
        const double m = s / n;
        return std::pair{m, s2 / n - m * m};
    };
    const auto [nm, nv] = moments("normal", {Value::real(1.0), Value::real(2.0)});
    CHECK(nm == doctest::Approx(1.0).epsilon(0.02));
    CHECK(nv == doctest::Approx(4.0).epsilon(0.02));
    // gamma(shape 3, rate 2): mean 1.5, variance 0.75
    const auto [gm, gv] = moments("gamma", {Value::real(3.0), Value::real(2.0)});
    CHECK(gm == doctest::Approx(1.5).epsilon(0.02));
    CHECK(gv == doctest::Approx(0.75).epsilon(0.03));
    // inverse gamma(5, 0.05): mean 0.0125, variance 0.05^2 / (16 * 3)
    const auto [im, iv] = moments("inv_gamma", {Value::real(5.0), Value::real(0.05)});
    CHECK(im == doctest::Approx(0.0125).epsilon(0.02));
    CHECK(iv == doctest::Approx(0.0025 / 48.0).epsilon(0.06));
    // beta(5, 1): mean 5/6, variance 5 / (36 * 7)
    const auto [bm, bv] = moments("beta", {Value::real(5.0), Value::real(1.0)});
    CHECK(bm == doctest::Approx(5.0 / 6.0).epsilon(0.01));
    CHECK(bv == doctest::Approx(5.0 / 252.0).epsilon(0.03));
}

TEST_CASE("bernoulli sampling frequency") {
    Rng rng(7);
    int hits = 0;
    for (int i = 0; i < 100000; ++i) hits += sample(Family::Bernoulli, std::vector<Value>{Value::real(0.3)}, rng).as_bool();
    CHECK(hits / 100000.0 == doctest::Approx(0.3).epsilon(0.02));
}

// Reference tails computed with scipy.stats.t.sf.
TEST_CASE("student t upper tail") {
    CHECK(student_t_tail(2.0, 10) == doctest::Approx(0.036694017385370196).epsilon(1e-10));
    CHECK(student_t_tail(0.5, 3) == doctest::Approx(0.3257239824240755).epsilon(1e-10));
    CHECK(student_t_tail(3.4, 99) == doctest::Approx(0.00048634535943366497).epsilon(1e-9));
    CHECK(student_t_tail(-1.0, 5) == doctest::Approx(0.8183912661754387).epsilon(1e-10));
}

TEST_CASE("linear logistic") {
    const double w[] = {1.0, 0.5, -0.2};
    const double x[] = {0.5, -1.0, 1.0};
    CHECK(linear_logistic(w, x) == doctest::Approx(0.45016600268752216));
    const double big[] = {800.0};
    const double one[] = {1.0};
    const double minus[] = {-1.0};
    CHECK(linear_logistic(big, one) == 1.0);
    CHECK(linear_logistic(big, minus) == 0.0);
    const double two[] = {1.0, 2.0};
    CHECK_THROWS_AS(linear_logistic(w, two), DimensionMismatch);
}

TEST_CASE("rng streams") {
    Rng a(5), b(5);
    for (int i = 0; i < 10; ++i) CHECK(a() == b());
    Rng parent(5);
    const auto before = parent.counter();
    Rng c1 = parent.split(1), c2 = parent.split(1), c3 = parent.split(2);
    CHECK(parent.counter() == before);
    CHECK(c1() == c2());
    CHECK(c1() != c3());
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        CHECK(a.below(7) < 7);
    }
}
