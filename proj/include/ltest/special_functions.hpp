#pragma once

#include <stdexcept>
#include <string>

namespace ltest
{

/// Thrown when an iterative numeric routine fails to converge.
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A value in [0, 1]. NaN is rejected at construction.
class Probability
{
public:
    constexpr Probability() = default;

    explicit Probability(double value) : value_(value)
    {
        if (!(value >= 0.0 && value <= 1.0))
            throw std::domain_error("probability outside [0,1]: " + std::to_string(value));
    }

    /// Clamp rounding excursions (e.g. 1 + 1e-16) back into [0,1]; NaN still throws.
    static Probability clamped(double value)
    {
        if (value != value)
            throw std::domain_error("probability is NaN");
        return Probability(value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value));
    }

    constexpr double value() const noexcept { return value_; }
    constexpr operator double() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

/// Quantile level in (0,1) with an absolute tolerance on the argument axis
/// (relative once the argument exceeds 1).
struct QuantileRequest
{
    double level;
    double tolerance = 1e-12;

    void validate() const
    {
        if (!(level > 0.0 && level < 1.0))
            throw std::domain_error("quantile level must lie in (0,1)");
        if (!(tolerance > 0.0))
            throw std::domain_error("quantile tolerance must be positive");
    }
};

namespace special
{

// log Gamma for x > 0 (Lanczos, reentrant; std::lgamma writes the global signgam).
double log_gamma(double x);
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a,b).
Probability reg_inc_beta(double a, double b, double x);
/// 1 - I_x(a,b), evaluated without cancellation in the upper tail.
Probability reg_inc_beta_upper(double a, double b, double x);
double beta_pdf(double a, double b, double x);
double beta_quantile(double a, double b, double level, double tol = 1e-12);
double beta_quantile(double a, double b, const QuantileRequest& request);

/// Regularized lower incomplete gamma P(a,x) and its complement Q(a,x).
Probability reg_inc_gamma_lower(double a, double x);
Probability reg_inc_gamma_upper(double a, double x);

Probability chisq_cdf(int d, double x);
Probability chisq_sf(int d, double x);
double chisq_pdf(int d, double x);
double chisq_quantile(int d, double level, double tol = 1e-12);
double chisq_quantile(int d, const QuantileRequest& request);

/// Type-I extreme-value law of the centred maximum squared correlation:
/// Lambda(x) = exp{-(8 pi)^{-1/2} exp(-x/2)}.
Probability lambda_cdf(double x);
Probability lambda_sf(double x);
/// log Lambda^{-1}(x) = (8 pi)^{-1/2} exp(-x/2), the Poisson intensity above x.
double lambda_intensity(double x);
double lambda_quantile(double level);

Probability std_normal_cdf(double x);
Probability std_normal_sf(double x);
Probability cauchy_cdf(double x);
Probability cauchy_sf(double x);

} // namespace special
} // namespace ltest
