#include "austere/distributions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/distributions/students_t.hpp>

#include "austere/errors.hpp"

namespace austere {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;

const std::array<PrimitiveDistribution, 7> kDistributions{{
    {"bernoulli", Family::Bernoulli, 1},
    {"normal", Family::Normal, 2},
    {"gamma", Family::Gamma, 2},
    {"beta", Family::Beta, 2},
    {"inv_gamma", Family::InverseGamma, 2},
    {"uniform_continuous", Family::Uniform, 2},
    {"multivariate_normal", Family::MultivariateNormal, 2},
}};

double positive(const Value& v, const char* what) {
    const double x = v.as_real();
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite");
    return x;
}

double finite(const Value& v, const char* what) {
    const double x = v.as_real();
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
    return x;
}

double probability(const Value& v) {
    const double p = v.as_real();
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bernoulli weight must lie in [0, 1]");
    return p;
}

double gamma_draw(double shape, double rate, Rng& rng) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

struct Gaussian {
    Eigen::VectorXd mean;
    Eigen::LLT<Eigen::MatrixXd> chol;
};

Gaussian gaussian(std::span<const Value> params) {
    const RealVector& mu = params[0].as_vector();
    const Matrix& sigma = params[1].as_matrix();
    if (sigma.rows != mu.size() || sigma.cols != mu.size())
        throw DimensionMismatch("multivariate_normal covariance does not match mean dimension");
    Gaussian g;
    g.mean = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    Eigen::MatrixXd s(sigma.rows, sigma.cols);
    for (std::size_t r = 0; r < sigma.rows; ++r)
        for (std::size_t c = 0; c < sigma.cols; ++c) s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sigma(r, c);
    g.chol.compute(s);
    if (g.chol.info() != Eigen::Success) throw DomainError("multivariate_normal covariance is not positive definite");
    return g;
}

}  // namespace

const PrimitiveDistribution* find_distribution(std::string_view name) {
    for (const auto& d : kDistributions)
        if (d.name == name) return &d;
    return nullptr;
}

bool in_support(Family family, const Value& x) {
    switch (family) {
        case Family::Bernoulli: return x.is_boolean();
        case Family::Normal:
        case Family::Uniform: return x.is_number() && std::isfinite(x.as_real());
        case Family::Gamma:
        case Family::InverseGamma: return x.is_number() && x.as_real() > 0.0 && std::isfinite(x.as_real());
        case Family::Beta: return x.is_number() && x.as_real() > 0.0 && x.as_real() < 1.0;
        case Family::MultivariateNormal:
            if (!x.is_vector()) return false;
            for (double v : x.as_vector())
                if (!std::isfinite(v)) return false;
            return true;
    }
    return false;
}

double log_pdf(Family family, std::span<const Value> params, const Value& x) {
    switch (family) {
        case Family::Bernoulli: {
            const double p = probability(params[0]);
            if (!x.is_boolean()) return kNegInf;
            return x.as_bool() ? std::log(p) : std::log1p(-p);
        }
        case Family::Normal: {
            const double mu = finite(params[0], "normal mean");
            const double sd = positive(params[1], "normal standard deviation");
            if (!in_support(family, x)) return kNegInf;
            const double z = (x.as_real() - mu) / sd;
            return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
        }
        case Family::Gamma: {
            const double a = positive(params[0], "gamma shape");
            const double b = positive(params[1], "gamma rate");
            if (!in_support(family, x)) return kNegInf;
            const double v = x.as_real();
            return a * std::log(b) + (a - 1.0) * std::log(v) - b * v - std::lgamma(a);
        }
        case Family::Beta: {
            const double a = positive(params[0], "beta shape");
            const double b = positive(params[1], "beta shape");
            if (!in_support(family, x)) return kNegInf;
            const double v = x.as_real();
            return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(v) +
                   (b - 1.0) * std::log1p(-v);
        }
        case Family::InverseGamma: {
            const double a = positive(params[0], "inv_gamma shape");
            const double b = positive(params[1], "inv_gamma scale");
            if (!in_support(family, x)) return kNegInf;
            const double v = x.as_real();
            return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(v) - b / v;
        }
        case Family::Uniform: {
            const double lo = finite(params[0], "uniform bound");
            const double hi = finite(params[1], "uniform bound");
            if (!(lo < hi)) throw DomainError("uniform_continuous requires low < high");
            if (!x.is_number()) return kNegInf;
            const double v = x.as_real();
            if (!(v >= lo && v <= hi)) return kNegInf;
            return -std::log(hi - lo);
        }
        case Family::MultivariateNormal: {
            const Gaussian g = gaussian(params);
            if (!x.is_vector()) return kNegInf;
            const RealVector& xv = x.as_vector();
            if (xv.size() != static_cast<std::size_t>(g.mean.size()))
                throw DimensionMismatch("multivariate_normal value has wrong dimension");
            if (!in_support(family, x)) return kNegInf;
            const Eigen::VectorXd diff =
                Eigen::Map<const Eigen::VectorXd>(xv.data(), g.mean.size()) - g.mean;
            const Eigen::VectorXd z = g.chol.matrixL().solve(diff);
            const Eigen::MatrixXd l = g.chol.matrixL();
            double log_det = 0.0;
            for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += std::log(l(i, i));
            return -0.5 * z.squaredNorm() - log_det - static_cast<double>(xv.size()) * kHalfLog2Pi;
        }
    }
    throw InternalError("unknown distribution family");
}

Value sample(Family family, std::span<const Value> params, Rng& rng) {
    switch (family) {
        case Family::Bernoulli: return Value::boolean(rng.uniform01() < probability(params[0]));
        case Family::Normal: {
            const double mu = finite(params[0], "normal mean");
            const double sd = positive(params[1], "normal standard deviation");
            return Value::real(mu + sd * rng.normal());
        }
        case Family::Gamma:
            return Value::real(gamma_draw(positive(params[0], "gamma shape"), positive(params[1], "gamma rate"), rng));
        case Family::Beta: {
            const double ga = gamma_draw(positive(params[0], "beta shape"), 1.0, rng);
            const double gb = gamma_draw(positive(params[1], "beta shape"), 1.0, rng);
            return Value::real(ga / (ga + gb));
        }
        case Family::InverseGamma: {
            const double g = gamma_draw(positive(params[0], "inv_gamma shape"), positive(params[1], "inv_gamma scale"), rng);
            return Value::real(1.0 / g);
        }
        case Family::Uniform: {
            const double lo = finite(params[0], "uniform bound");
            const double hi = finite(params[1], "uniform bound");
            if (!(lo < hi)) throw DomainError("uniform_continuous requires low < high");
            return Value::real(lo + (hi - lo) * rng.uniform01());
        }
        case Family::MultivariateNormal: {
            const Gaussian g = gaussian(params);
            Eigen::VectorXd z(g.mean.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
            const Eigen::VectorXd x = g.mean + g.chol.matrixL() * z;
            return Value::vector(RealVector(x.data(), x.data() + x.size()));
        }
    }
    throw InternalError("unknown distribution family");
}

double student_t_tail(double t, double dof) {
    if (!(dof > 0.0)) throw DomainError("student t degrees of freedom must be positive");
    if (std::isnan(t)) throw DomainError("student t statistic is NaN");
    if (t == std::numeric_limits<double>::infinity()) return 0.0;
    if (t == -std::numeric_limits<double>::infinity()) return 1.0;
    const boost::math::students_t_distribution<double> dist(dof);
    return boost::math::cdf(boost::math::complement(dist, t));
}

double linear_logistic(std::span<const double> w, std::span<const double> x) {
    if (w.size() != x.size()) throw DimensionMismatch("linear_logistic weight and feature lengths differ");
    double z = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * x[i];
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace austere
