#pragma once

#include "ltest/data.hpp"
#include "ltest/outcome.hpp"
#include "ltest/permutation.hpp"
#include "ltest/special_functions.hpp"

#include <string_view>

namespace ltest
{

enum class BaselineMethod
{
    SC, // sum of squared correlations
    J,  // maximum squared correlation
    LX, // L4 norm of covariances
    F,  // min-p of SC and J
};

constexpr std::string_view to_string(BaselineMethod m) noexcept
{
    switch (m) {
    case BaselineMethod::SC: return "T_SC";
    case BaselineMethod::J: return "T_J";
    case BaselineMethod::LX: return "T_LX";
    case BaselineMethod::F: return "T_F";
    }
    return "?";
}

struct BaselineOutcome
{
    BaselineMethod method;
    double statistic = 0.0;
    Probability p_value;
    Calibration calibration = Calibration::asymptotic;

    TestOutcome as_test_outcome() const { return {std::string(to_string(method)), statistic, calibration, p_value}; }
};

/// (sum_{i<j} n rho_ij^2 - p*) / sqrt(2 p* (n-1)/(n+2)); p-value 1 - Phi.
BaselineOutcome t_sc(const DataMatrix& data);
BaselineOutcome t_sc_from_sum(double sum_scaled_squares, Index n, Index p);

/// max n rho_ij^2 - b_p; p-value 1 - Lambda.
BaselineOutcome t_j(const DataMatrix& data);
BaselineOutcome t_j_from_max(double max_scaled_square, Index p);

/// Sum of fourth powers of covariances, calibrated against the ensemble's "T_LX" replicates.
BaselineOutcome t_lx(const DataMatrix& data, const NullEnsemble& null, PValueMode mode = PValueMode::strict);

/// min(p_SC, p_J), with p-value 1 - (1 - min)^2: the law of the minimum of two
/// independent uniforms, relying on the asymptotic independence of SC and J.
BaselineOutcome t_f(const DataMatrix& data);
BaselineOutcome t_f_from(Probability p_sc, Probability p_j);

} // namespace ltest
