#include "ltest/lstatistic.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ltest
{
namespace
{

void check_gamma(double gamma)
{
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::domain_error("gamma must lie in (0,1]");
}

void check_order(int l)
{
    if (l < 1 || l > 4)
        throw std::domain_error("moment order must be 1, 2, 3 or 4");
}

constexpr std::array<double, 5> kBinomialRow[5] = {
    {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};

// Sum_{m=0}^{l} C(l,m) (-x)^{l-m} moment[m] tail[m], the binomial expansion of
// E[(Y - x)^l 1(Y >= x)] in terms of truncated raw moments.
double truncated_moment(int l, double x, const std::array<double, 5>& moment, const std::array<double, 5>& tail)
{
    double total = 0.0;
    for (int m = 0; m <= l; ++m)
        total += kBinomialRow[l][m] * std::pow(-x, l - m) * moment[m] * tail[m];
    return total;
}

} // namespace

std::size_t diverging_k(double gamma, std::size_t p_star)
{
    check_gamma(gamma);
    const double x = gamma * static_cast<double>(p_star);
    const double nearest = std::round(x);
    const double k = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
    return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

double t_k(const CorrSpectrum& spectrum, std::size_t k)
{
    if (k < 1 || k > spectrum.values.size())
        throw std::out_of_range("T_k requires 1 <= k <= available spectrum length");
    return std::accumulate(spectrum.values.begin(), spectrum.values.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
}

double t_k(const DataMatrix& data, std::size_t k)
{
    return t_k(spectrum(data, TopK{k}), k);
}

double bp(Index p)
{
    if (p < 3)
        throw std::domain_error("b_p requires p >= 3");
    const double lp = std::log(static_cast<double>(p));
    return 4.0 * lp - std::log(lp);
}

FixedKLaw::FixedKLaw(Index p_, int s_) : p(p_), b_p(bp(p_)), s(s_)
{
    if (s < 1)
        throw std::domain_error("order index s must be >= 1");
}

Probability FixedKLaw::cdf(double x) const
{
    return sth_max_cdf(x, s);
}

Probability sth_max_cdf(double x, int s)
{
    if (s < 1)
        throw std::domain_error("order index s must be >= 1");
    if (std::isnan(x))
        throw std::domain_error("sth_max_cdf of NaN");
    const double mu = special::lambda_intensity(x);
    if (std::isinf(mu))
        return Probability(0.0);
    if (mu == 0.0)
        return Probability(1.0);
    if (s == 1)
        return special::lambda_cdf(x);
    // Near 1 the complement P(N >= s) is small and accurate; 1 - it keeps the
    // CDF monotone to the last bit.
    if (mu < s)
        return Probability::clamped(1.0 - special::reg_inc_gamma_lower(static_cast<double>(s), mu));
    if (s > 30)
        return special::reg_inc_gamma_upper(static_cast<double>(s), mu);
    // Poisson probabilities in log space: no overflow of mu^i or i!.
    const double log_mu = std::log(mu);
    double total = 0.0;
    for (int i = 0; i < s; ++i)
        total += std::exp(-mu + i * log_mu - special::log_gamma(i + 1.0));
    return Probability::clamped(total);
}

Probability joint_top2_cdf(double x1, double x2)
{
    if (std::isnan(x1) || std::isnan(x2))
        throw std::domain_error("joint_top2_cdf of NaN");
    if (x1 < x2)
        throw std::domain_error("joint_top2_cdf requires x1 >= x2");
    const double mu2 = special::lambda_intensity(x2);
    if (std::isinf(mu2))
        return Probability(0.0);
    const double mu1 = special::lambda_intensity(x1);
    return Probability::clamped(std::exp(-mu2) * (1.0 + mu2 - mu1));
}

double moment_A(int l, Index n, double x)
{
    check_order(l);
    if (n < 3)
        throw std::domain_error("moment_A requires n >= 3");
    if (!(x >= 0.0))
        throw std::domain_error("moment_A requires x >= 0");
    const double nn = static_cast<double>(n);
    if (x >= nn)
        return 0.0;
    // E[(n B)^m] for B ~ Beta(1/2, (n-2)/2), with the matching Beta(m + 1/2, (n-2)/2) tails.
    const std::array<double, 5> moment = {
        1.0,
        nn / (nn - 1.0),
        3.0 * nn * nn / ((nn - 1.0) * (nn + 1.0)),
        15.0 * nn * nn * nn / ((nn - 1.0) * (nn + 1.0) * (nn + 3.0)),
        105.0 * nn * nn * nn * nn / ((nn - 1.0) * (nn + 1.0) * (nn + 3.0) * (nn + 5.0)),
    };
    const double b = 0.5 * (nn - 2.0);
    std::array<double, 5> tail{};
    for (int m = 0; m <= l; ++m)
        tail[m] = special::reg_inc_beta_upper(m + 0.5, b, x / nn);
    return truncated_moment(l, x, moment, tail);
}

double moment_A_limit(int l, double x)
{
    check_order(l);
    if (!(x >= 0.0))
        throw std::domain_error("moment_A_limit requires x >= 0");
    const std::array<double, 5> moment = {1.0, 1.0, 3.0, 15.0, 105.0};
    std::array<double, 5> tail{};
    for (int m = 0; m <= l; ++m)
        tail[m] = special::chisq_sf(2 * m + 1, x);
    return truncated_moment(l, x, moment, tail);
}

DivergingKLaw diverging_law(double gamma, Index n, Index p)
{
    check_gamma(gamma);
    if (n < 3 || p < 2)
        throw std::domain_error("diverging_law requires n >= 3 and p >= 2");
    DivergingKLaw law;
    law.gamma = gamma;
    law.n = n;
    law.p = p;
    const std::size_t p_star = pair_count(p);
    law.k = diverging_k(gamma, p_star);
    if (gamma < 1.0) {
        law.v_gamma_n = static_cast<double>(n) * special::beta_quantile(0.5, 0.5 * (n - 2.0), 1.0 - gamma);
        law.v_gamma = special::chisq_quantile(1, 1.0 - gamma);
    }
    law.mu_per_pair = moment_A(1, n, law.v_gamma_n) + gamma * law.v_gamma_n;
    law.mu = static_cast<double>(p_star) * law.mu_per_pair;
    const double a1 = moment_A_limit(1, law.v_gamma);
    law.sigma2 = moment_A_limit(2, law.v_gamma) - a1 * a1;
    return law;
}

TestOutcome diverging_p_value(const DataMatrix& data, double gamma)
{
    const DivergingKLaw law = diverging_law(gamma, data.n(), data.p());
    const double stat = t_k(data, law.k);
    const double z = (stat - law.mu) / std::sqrt(static_cast<double>(pair_count(data.p())) * law.sigma2);
    return {"T_" + std::to_string(law.k), stat, Calibration::asymptotic, special::std_normal_sf(z)};
}

double empirical_threshold(const CorrSpectrum& spectrum, double gamma)
{
    if (!spectrum.is_full())
        throw std::invalid_argument("empirical_threshold requires a full spectrum");
    return spectrum.values.at(diverging_k(gamma, spectrum.p_star) - 1);
}

TestOutcome max_statistic_test(const DataMatrix& data)
{
    const double stat = t_k(data, 1) - bp(data.p());
    return {"T_1", stat, Calibration::asymptotic, special::lambda_sf(stat)};
}

} // namespace ltest
