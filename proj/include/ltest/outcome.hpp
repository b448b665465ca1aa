#pragma once

#include "ltest/special_functions.hpp"

#include <string>
#include <string_view>

namespace ltest
{

enum class Calibration
{
    asymptotic,
    permutation,
};

constexpr std::string_view to_string(Calibration c) noexcept
{
    return c == Calibration::asymptotic ? "asymptotic" : "permutation";
}

/// A statistic, how it was calibrated, and its upper-tail p-value.
struct TestOutcome
{
    std::string method;
    double statistic = 0.0;
    Calibration calibration = Calibration::asymptotic;
    Probability p_value;
};

} // namespace ltest
