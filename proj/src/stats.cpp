#include "austere/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "austere/errors.hpp"

namespace austere {

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double effective_sample_size(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 4) return static_cast<double>(n);
    const double m = mean(xs);
    std::size_t size = 1;
    while (size < 2 * n) size <<= 1;
    std::vector<double> padded(size, 0.0);
    for (std::size_t i = 0; i < n; ++i) padded[i] = xs[i] - m;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> freq;
    fft.fwd(freq, padded);
    for (auto& f : freq) f = std::complex<double>(std::norm(f), 0.0);
    std::vector<double> acov;
    fft.inv(acov, freq);
    const double c0 = acov[0];
    if (!(c0 > 0.0)) return static_cast<double>(n);
    // Sum autocorrelation pairs while they stay positive.
    double tau = -1.0;
    for (std::size_t k = 0; k + 1 < n; k += 2) {
        const double pair = (acov[k] + acov[k + 1]) / c0;
        if (pair <= 0.0) break;
        tau += 2.0 * pair;
    }
    tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
    return static_cast<double>(n) / tau;
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double effective_a,
                       double effective_b) {
    if (a.empty() || b.empty()) throw DomainError("KS test needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    const double na = effective_a > 0.0 ? effective_a : nx;
    const double nb = effective_b > 0.0 ? effective_b : ny;
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs two or more paired points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double mx = mean(lx), my = mean(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace austere
