#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls into the library's special-function layer.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace oracle
{

namespace detail
{
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

/// Adaptive Simpson quadrature of a smooth integrand on [a, b], split into
/// `panels` pieces first so that narrow features are not missed.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-14,
                        int panels = 64)
{
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * h;
        const double hi = lo + h;
        const double flo = f(lo), fhi = f(hi), fm = f(0.5 * (lo + hi));
        const double whole = h / 6.0 * (flo + 4.0 * fm + fhi);
        total += detail::simpson_step(f, lo, hi, flo, fm, fhi, whole, tol / panels, 40);
    }
    return total;
}

/// Beta(a, b) CDF by quadrature after x = t^2 (removes the a < 1 endpoint singularity).
inline double beta_cdf(double a, double b, double x)
{
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    auto g = [&](double t) {
        if (t <= 0.0)
            return a == 0.5 ? 2.0 * std::exp(-log_beta) : 0.0;
        const double t2 = t * t;
        return 2.0 * std::exp((2.0 * a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t2) - log_beta);
    };
    return integrate(g, 0.0, std::sqrt(x));
}

/// Chi-square(d) CDF by quadrature after x = t^2.
inline double chisq_cdf(int d, double x)
{
    const double k = 0.5 * d;
    const double log_norm = k * std::log(2.0) + std::lgamma(k);
    auto g = [&](double t) {
        if (t <= 0.0)
            return d == 1 ? 2.0 * std::exp(-log_norm) : 0.0;
        const double u = t * t;
        return 2.0 * t * std::exp((k - 1.0) * std::log(u) - 0.5 * u - log_norm);
    };
    return integrate(g, 0.0, std::sqrt(x));
}

inline double normal_cdf(double x)
{
    auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    return x >= 0.0 ? 0.5 + integrate(phi, 0.0, x) : 0.5 - integrate(phi, x, 0.0);
}

/// Bisection root of a monotone increasing function.
inline double bisect(const std::function<double(double)>& f, double target, double lo, double hi, int iters = 200)
{
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_sf(double lambda)
{
    if (lambda < 0.2)
        return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS test; returns (D, asymptotic p-value with Stephens' correction).
inline std::pair<double, double> ks_test(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (i + 1.0) / n - f, f - i / n});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

/// Two-sample KS distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v)
            ++i;
        while (j < b.size() && b[j] <= v)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

/// Naive Pearson correlation, two passes, no clamping.
inline double pearson(const Eigen::MatrixXd& x, Eigen::Index i, Eigen::Index j)
{
    const Eigen::Index n = x.rows();
    double mi = 0, mj = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
        mi += x(r, i);
        mj += x(r, j);
    }
    mi /= n;
    mj /= n;
    double sij = 0, sii = 0, sjj = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
        sij += (x(r, i) - mi) * (x(r, j) - mj);
        sii += (x(r, i) - mi) * (x(r, i) - mi);
        sjj += (x(r, j) - mj) * (x(r, j) - mj);
    }
    return sij / std::sqrt(sii * sjj);
}

/// Divisor-n covariance by a double loop.
inline double covariance(const Eigen::MatrixXd& x, Eigen::Index i, Eigen::Index j)
{
    const Eigen::Index n = x.rows();
    double mi = 0, mj = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
        mi += x(r, i);
        mj += x(r, j);
    }
    mi /= n;
    mj /= n;
    double s = 0;
    for (Eigen::Index r = 0; r < n; ++r)
        s += (x(r, i) - mi) * (x(r, j) - mj);
    return s / n;
}

/// The five-term display for the limiting variance of the top-gamma sum, written
/// out term by term from chi-square(1, 3, 5) tails at the threshold v.
inline double sigma2_display(double v)
{
    const double t1 = 1.0 - chisq_cdf(1, v), t3 = 1.0 - chisq_cdf(3, v), t5 = 1.0 - chisq_cdf(5, v);
    const double bracket = t3 - v * t1;
    return 3.0 * t5 - 2.0 * v * t3 + v * v * t1 - bracket * bracket;
}

} // namespace oracle
