#pragma once

#include "ltest/data.hpp"
#include "ltest/permutation.hpp"
#include "ltest/rng.hpp"
#include "ltest/special_functions.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ltest
{

/// Denominator for the dyadic fractions of the grid. The combination formula
/// can be read with fractions of p or of p*; p* is the default.
enum class GridBase
{
    pair_count,
    variable_count,
};

/// The k values combined by the adaptive test: one small fixed k plus the
/// diverging k_i = ceil(gamma_i * base) with gamma_i = 2^{-i}.
struct KGrid
{
    std::size_t fixed_k = 5;
    std::size_t k_min = 16;
    std::vector<double> gammas;   // 2^{-i}, descending (or k_i / p* for explicit grids)
    std::vector<std::size_t> ks;  // strictly decreasing diverging k values

    std::size_t K() const noexcept { return ks.size(); }
    /// fixed_k followed by every diverging k.
    std::vector<std::size_t> all_k() const;
};

KGrid default_grid(Index p, std::size_t fixed_k = 5, std::size_t k_min = 16, GridBase base = GridBase::pair_count);
/// A user-supplied diverging k list; sorted descending, must be distinct and exceed fixed_k.
KGrid explicit_grid(Index p, std::size_t fixed_k, std::vector<std::size_t> ks);

std::vector<StatisticRequest> grid_requests(const KGrid& grid);

struct CombinedComponent
{
    std::string id;
    std::size_t k = 0;
    double statistic = 0.0;
    Probability p_value;         // as computed from the ensemble
    Probability clipped_p_value; // as entered into the combination
};

struct CombinedOutcome
{
    std::vector<CombinedComponent> components;
    double t_c = 0.0;
    Probability p_c;
};

/// Clamp into [1/(2B), 1 - 1/(2B)] so the tangent transform stays finite.
double clip_p_value(double p, std::size_t B);

/// Equal-weight Cauchy combination of p-values in (0,1):
/// T_C = mean tan{(1/2 - p_i) pi}, p_C = 1 - G(T_C).
CombinedOutcome cauchy_combine(std::span<const double> pvals);

/// Combine the grid's permutation p-values given observed statistics (ordered
/// as grid.all_k()) and an ensemble holding every T_k of the grid.
CombinedOutcome combine_from_ensemble(const KGrid& grid, std::span<const double> observed, const NullEnsemble& null,
                                      PValueMode mode = PValueMode::strict);

/// The full adaptive procedure: one null ensemble for all T_k, permutation
/// p-values, clipping, Cauchy combination.
CombinedOutcome adaptive_test(const DataMatrix& data, const KGrid& grid, std::size_t B, RngSpec seed,
                              unsigned threads = 1, PValueMode mode = PValueMode::strict);

} // namespace ltest
