#include "ltest/baselines.hpp"

#include "ltest/correlation.hpp"
#include "ltest/lstatistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ltest
{

BaselineOutcome t_sc_from_sum(double sum_scaled_squares, Index n, Index p)
{
    const auto p_star = static_cast<double>(pair_count(p));
    const auto nn = static_cast<double>(n);
    const double stat = (sum_scaled_squares - p_star) / std::sqrt(2.0 * p_star * (nn - 1.0) / (nn + 2.0));
    return {BaselineMethod::SC, stat, special::std_normal_sf(stat), Calibration::asymptotic};
}

BaselineOutcome t_sc(const DataMatrix& data)
{
    std::vector<double> values;
    scaled_squared_correlations(data.values(), values);
    return t_sc_from_sum(std::accumulate(values.begin(), values.end(), 0.0), data.n(), data.p());
}

BaselineOutcome t_j_from_max(double max_scaled_square, Index p)
{
    const double stat = max_scaled_square - bp(p);
    return {BaselineMethod::J, stat, special::lambda_sf(stat), Calibration::asymptotic};
}

BaselineOutcome t_j(const DataMatrix& data)
{
    if (data.p() < 3)
        throw std::domain_error("T_J requires p >= 3");
    std::vector<double> values;
    scaled_squared_correlations(data.values(), values);
    return t_j_from_max(*std::max_element(values.begin(), values.end()), data.p());
}

BaselineOutcome t_lx(const DataMatrix& data, const NullEnsemble& null, PValueMode mode)
{
    const double stat = covariance_spectrum4(data);
    const auto& reps = null.replicates("T_LX");
    return {BaselineMethod::LX, stat, perm_p_value(stat, reps, mode), Calibration::permutation};
}

BaselineOutcome t_f_from(Probability p_sc, Probability p_j)
{
    const double m = std::min(p_sc.value(), p_j.value());
    return {BaselineMethod::F, m, Probability::clamped(m * (2.0 - m)), Calibration::asymptotic};
}

BaselineOutcome t_f(const DataMatrix& data)
{
    if (data.p() < 3)
        throw std::domain_error("T_F requires p >= 3");
    std::vector<double> values;
    scaled_squared_correlations(data.values(), values);
    const auto sc = t_sc_from_sum(std::accumulate(values.begin(), values.end(), 0.0), data.n(), data.p());
    const auto j = t_j_from_max(*std::max_element(values.begin(), values.end()), data.p());
    return t_f_from(sc.p_value, j.p_value);
}

} // namespace ltest
