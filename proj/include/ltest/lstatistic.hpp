#pragma once

#include "ltest/correlation.hpp"
#include "ltest/data.hpp"
#include "ltest/outcome.hpp"
#include "ltest/special_functions.hpp"

#include <cstddef>

namespace ltest
{

/// ceil(gamma * p_star), with gamma * p_star values within 1e-9 (relative) of
/// an integer treated as that integer so binary-inexact fractions such as 0.1
/// do not round up by one.
std::size_t diverging_k(double gamma, std::size_t p_star);

/// Sum of the k largest values of n * rho_ij^2.
double t_k(const DataMatrix& data, std::size_t k);
/// Same, from an already ordered spectrum holding at least k values.
double t_k(const CorrSpectrum& spectrum, std::size_t k);

/// Centring of the maximum: 4 log p - log log p, p >= 3.
double bp(Index p);

/// Limit law of the s-th largest n * rho^2 after centring by b_p.
struct FixedKLaw
{
    Index p;
    double b_p;
    int s;

    FixedKLaw(Index p, int s);

    double centered(double scaled_squared_correlation) const noexcept { return scaled_squared_correlation - b_p; }
    Probability cdf(double x) const;
};

/// Lambda(x) * sum_{i<s} {log Lambda^{-1}(x)}^i / i!, i.e. the probability that
/// a Poisson count with mean log Lambda^{-1}(x) is below s.
Probability sth_max_cdf(double x, int s);

/// Joint limit of (first, second) largest, both centred: x1 >= x2.
Probability joint_top2_cdf(double x1, double x2);

/// E[{n B - x}^l 1(n B >= x)] with B ~ Beta(1/2, (n-2)/2), l = 1..4.
double moment_A(int l, Index n, double x);
/// Large-n limit of moment_A, built from chi-square tails.
double moment_A_limit(int l, double x);

/// Normalization of T_{ceil(gamma p*)} under the null.
struct DivergingKLaw
{
    double gamma = 1.0;
    Index n = 0;
    Index p = 0;
    std::size_t k = 0;
    double v_gamma_n = 0.0; // (1-gamma) quantile of n Beta(1/2, (n-2)/2)
    double v_gamma = 0.0;   // (1-gamma) quantile of chi-square(1)
    double mu_per_pair = 0.0; // A_{1,n}(v_gamma_n) + gamma v_gamma_n
    double mu = 0.0;          // p* times mu_per_pair
    double sigma2 = 0.0;
};

DivergingKLaw diverging_law(double gamma, Index n, Index p);

/// Asymptotic normal calibration of T_{ceil(gamma p*)}; upper tail.
TestOutcome diverging_p_value(const DataMatrix& data, double gamma);

/// The ceil(gamma p*)-th largest value of a full spectrum.
double empirical_threshold(const CorrSpectrum& spectrum, double gamma);

/// k = 1 asymptotic test: statistic T_1 - b_p, p-value 1 - Lambda(statistic).
TestOutcome max_statistic_test(const DataMatrix& data);

} // namespace ltest
