#include "ltest/special_functions.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>

namespace ltest::special
{
namespace
{

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 20000;
constexpr double kHalfLog2Pi = 0.91893853320467274178; // 0.5 * ln(2 pi)

// Stirling remainder: log_gamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2], z >= 10.
double stirling_remainder(double z)
{
    const double r = 1.0 / z;
    const double r2 = r * r;
    return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
}

double lanczos_log_gamma(double x)
{
    static constexpr std::array<double, 9> coef = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5)
        return std::log(std::numbers::pi / std::abs(std::sin(std::numbers::pi * x))) - lanczos_log_gamma(1.0 - x);
    x -= 1.0;
    double a = coef[0];
    const double t = x + 7.5;
    for (int i = 1; i < 9; ++i)
        a += coef[i] / (x + i);
    return kHalfLog2Pi + (x + 0.5) * std::log(t) - t + std::log(a);
}

// log Gamma(b) - log Gamma(a + b) for b >= 10, without subtracting two large numbers.
double log_gamma_ratio(double b, double a)
{
    return -(b - 0.5) * std::log1p(a / b) - a * std::log(a + b) + a + stirling_remainder(b) -
           stirling_remainder(a + b);
}

// log of x^a (1-x)^b / B(a,b).
double log_beta_front(double a, double b, double x)
{
    if (a >= 10.0 && b >= 10.0) {
        const double s = a + b;
        const double x0 = a / s;
        const double dx = x - x0;
        const double t1 = a * std::log1p(dx / x0);
        const double t2 = b * std::log1p(-dx / (1.0 - x0));
        const double corr = stirling_remainder(a) + stirling_remainder(b) - stirling_remainder(s);
        return t1 + t2 + 0.5 * std::log(a * b / s) - kHalfLog2Pi - corr;
    }
    return a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x)
{
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

void check_beta_args(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("incomplete beta requires a > 0 and b > 0");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("incomplete beta requires x in [0,1]");
}

// (lower, upper) tails of the Beta(a,b) law at x.
std::pair<double, double> beta_tails(double a, double b, double x)
{
    check_beta_args(a, b, x);
    if (x == 0.0)
        return {0.0, 1.0};
    if (x == 1.0)
        return {1.0, 0.0};
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double lower = std::exp(log_beta_front(a, b, x)) * beta_continued_fraction(a, b, x) / a;
        return {lower, 1.0 - lower};
    }
    const double upper = std::exp(log_beta_front(b, a, 1.0 - x)) * beta_continued_fraction(b, a, 1.0 - x) / b;
    return {1.0 - upper, upper};
}

// (lower P, upper Q) regularized incomplete gamma.
std::pair<double, double> gamma_tails(double a, double x)
{
    if (!(a > 0.0))
        throw std::domain_error("incomplete gamma requires a > 0");
    if (!(x >= 0.0))
        throw std::domain_error("incomplete gamma requires x >= 0");
    if (x == 0.0)
        return {0.0, 1.0};
    if (std::isinf(x))
        return {1.0, 0.0};
    const double log_front = -x + a * std::log(x) - log_gamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double del = 1.0 / a;
        double sum = del;
        for (int i = 0; i < kMaxIterations; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * kEps) {
                const double lower = sum * std::exp(log_front);
                return {lower, 1.0 - lower};
            }
        }
        throw NumericError("incomplete gamma series did not converge");
    }
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            const double upper = std::exp(log_front) * h;
            return {1.0 - upper, upper};
        }
    }
    throw NumericError("incomplete gamma continued fraction did not converge");
}

// Bisection on [lo, hi] down to a relative width of 1e-8, then at most five
// safeguarded Newton steps; falls back to bisection if Newton stalls.
double invert_cdf(const std::function<double(double)>& cdf, const std::function<double(double)>& pdf, double lo,
                  double hi, double level, double tol)
{
    auto scale = [](double v) { return std::max(1.0, std::abs(v)); };
    int guard = 0;
    while (hi - lo > 1e-8 * std::max(0.5 * (lo + hi), 1e-300)) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < level ? lo : hi) = mid;
        if (++guard > 4000)
            throw NumericError("quantile bisection did not converge");
    }
    double x = 0.5 * (lo + hi);
    for (int step = 0; step < 5; ++step) {
        const double f = cdf(x) - level;
        (f < 0.0 ? lo : hi) = x;
        const double slope = pdf(x);
        double next = (slope > 0.0 && std::isfinite(slope)) ? x - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        const double dx = std::abs(next - x);
        x = next;
        if (dx <= tol * scale(x))
            return x;
    }
    for (int i = 0; i < 400; ++i) {
        if (hi - lo <= tol * scale(x))
            return x;
        x = 0.5 * (lo + hi);
        (cdf(x) < level ? lo : hi) = x;
    }
    throw NumericError("quantile refinement did not converge");
}

void check_level(double level)
{
    if (!(level > 0.0 && level < 1.0))
        throw std::domain_error("quantile level must lie in (0,1)");
}

void check_dof(int d)
{
    if (d < 1)
        throw std::domain_error("chi-square degrees of freedom must be >= 1");
}

} // namespace

double log_gamma(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("log_gamma requires x > 0");
    if (x >= 10.0)
        return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + stirling_remainder(x);
    return lanczos_log_gamma(x);
}

double log_beta(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("log_beta requires a > 0 and b > 0");
    if (a > b)
        std::swap(a, b);
    if (a >= 10.0) {
        const double s = a + b;
        const double corr = stirling_remainder(a) + stirling_remainder(b) - stirling_remainder(s);
        return (a - 0.5) * std::log(a / s) + (b - 0.5) * std::log1p(-a / s) - 0.5 * std::log(s) + kHalfLog2Pi +
               corr;
    }
    if (b >= 10.0)
        return log_gamma(a) + log_gamma_ratio(b, a);
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

Probability reg_inc_beta(double a, double b, double x)
{
    return Probability::clamped(beta_tails(a, b, x).first);
}

Probability reg_inc_beta_upper(double a, double b, double x)
{
    return Probability::clamped(beta_tails(a, b, x).second);
}

double beta_pdf(double a, double b, double x)
{
    check_beta_args(a, b, x);
    if (x == 0.0 || x == 1.0) {
        const double e = (x == 0.0) ? a : b;
        if (e < 1.0)
            return std::numeric_limits<double>::infinity();
        if (e > 1.0)
            return 0.0;
        return std::exp(-log_beta(a, b));
    }
    return std::exp(log_beta_front(a, b, x)) / (x * (1.0 - x));
}

double beta_quantile(double a, double b, double level, double tol)
{
    check_beta_args(a, b, 0.5);
    check_level(level);
    if (!(tol > 0.0))
        throw std::domain_error("quantile tolerance must be positive");
    return invert_cdf([&](double x) { return beta_tails(a, b, x).first; },
                      [&](double x) { return beta_pdf(a, b, x); }, 0.0, 1.0, level, tol);
}

double beta_quantile(double a, double b, const QuantileRequest& request)
{
    request.validate();
    return beta_quantile(a, b, request.level, request.tolerance);
}

Probability reg_inc_gamma_lower(double a, double x)
{
    return Probability::clamped(gamma_tails(a, x).first);
}

Probability reg_inc_gamma_upper(double a, double x)
{
    return Probability::clamped(gamma_tails(a, x).second);
}

Probability chisq_cdf(int d, double x)
{
    check_dof(d);
    if (!(x >= 0.0))
        throw std::domain_error("chi-square CDF requires x >= 0");
    return reg_inc_gamma_lower(0.5 * d, 0.5 * x);
}

Probability chisq_sf(int d, double x)
{
    check_dof(d);
    if (!(x >= 0.0))
        throw std::domain_error("chi-square survival requires x >= 0");
    return reg_inc_gamma_upper(0.5 * d, 0.5 * x);
}

double chisq_pdf(int d, double x)
{
    check_dof(d);
    if (!(x >= 0.0))
        throw std::domain_error("chi-square density requires x >= 0");
    const double k = 0.5 * d;
    if (x == 0.0)
        return d == 1 ? std::numeric_limits<double>::infinity() : (d == 2 ? 0.5 : 0.0);
    return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::numbers::ln2 - log_gamma(k));
}

double chisq_quantile(int d, double level, double tol)
{
    check_dof(d);
    check_level(level);
    if (!(tol > 0.0))
        throw std::domain_error("quantile tolerance must be positive");
    auto cdf = [d](double x) { return gamma_tails(0.5 * d, 0.5 * x).first; };
    double hi = std::max(1.0, static_cast<double>(d));
    while (cdf(hi) < level) {
        hi *= 2.0;
        if (hi > 1e300)
            throw NumericError("chi-square quantile bracket overflow");
    }
    return invert_cdf(cdf, [d](double x) { return chisq_pdf(d, x); }, 0.0, hi, level, tol);
}

double chisq_quantile(int d, const QuantileRequest& request)
{
    request.validate();
    return chisq_quantile(d, request.level, request.tolerance);
}

double lambda_intensity(double x)
{
    return std::exp(-0.5 * x) / std::sqrt(8.0 * std::numbers::pi);
}

Probability lambda_cdf(double x)
{
    if (std::isnan(x))
        throw std::domain_error("lambda_cdf of NaN");
    return Probability::clamped(std::exp(-lambda_intensity(x)));
}

Probability lambda_sf(double x)
{
    if (std::isnan(x))
        throw std::domain_error("lambda_sf of NaN");
    return Probability::clamped(-std::expm1(-lambda_intensity(x)));
}

double lambda_quantile(double level)
{
    check_level(level);
    return -2.0 * std::log(-std::log(level) * std::sqrt(8.0 * std::numbers::pi));
}

Probability std_normal_cdf(double x)
{
    return Probability::clamped(0.5 * std::erfc(-x / std::numbers::sqrt2));
}

Probability std_normal_sf(double x)
{
    return Probability::clamped(0.5 * std::erfc(x / std::numbers::sqrt2));
}

Probability cauchy_cdf(double x)
{
    return Probability::clamped(0.5 + std::atan(x) / std::numbers::pi);
}

Probability cauchy_sf(double x)
{
    if (x > 1.0)
        return Probability::clamped(std::atan(1.0 / x) / std::numbers::pi);
    return Probability::clamped(0.5 - std::atan(x) / std::numbers::pi);
}

} // namespace ltest::special
