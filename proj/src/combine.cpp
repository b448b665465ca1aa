#include "ltest/combine.hpp"

#include "ltest/lstatistic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ltest
{
namespace
{

// tan{(1/2 - p) pi}, via cot(p pi) in the tails for accuracy near 0 and 1.
double cauchy_transform(double p)
{
    if (p < 0.25)
        return 1.0 / std::tan(p * std::numbers::pi);
    if (p > 0.75)
        return -1.0 / std::tan((1.0 - p) * std::numbers::pi);
    return std::tan((0.5 - p) * std::numbers::pi);
}

} // namespace

std::vector<std::size_t> KGrid::all_k() const
{
    std::vector<std::size_t> out{fixed_k};
    out.insert(out.end(), ks.begin(), ks.end());
    return out;
}

KGrid default_grid(Index p, std::size_t fixed_k, std::size_t k_min, GridBase base)
{
    if (p < 3)
        throw std::invalid_argument("the adaptive grid requires p >= 3");
    const std::size_t p_star = pair_count(p);
    const double denom = base == GridBase::pair_count ? static_cast<double>(p_star) : static_cast<double>(p);
    KGrid grid;
    grid.fixed_k = fixed_k;
    grid.k_min = k_min;
    for (int i = 1; i < 64; ++i) {
        const double gamma = std::ldexp(1.0, -i);
        const auto k = static_cast<std::size_t>(std::ceil(gamma * denom));
        if (k < k_min || k < 1)
            break;
        grid.gammas.push_back(gamma);
        grid.ks.push_back(k);
    }
    if (grid.ks.empty())
        throw std::invalid_argument("p = " + std::to_string(p) + " yields no diverging k >= " +
                                    std::to_string(k_min) + "; supply an explicit k-list");
    if (fixed_k < 1 || fixed_k >= grid.ks.back() || fixed_k > p_star)
        throw std::invalid_argument("fixed k must lie in [1, min diverging k)");
    return grid;
}

KGrid explicit_grid(Index p, std::size_t fixed_k, std::vector<std::size_t> ks)
{
    const std::size_t p_star = pair_count(p);
    if (ks.empty())
        throw std::invalid_argument("explicit grid needs at least one k");
    std::sort(ks.begin(), ks.end(), std::greater<>());
    if (std::adjacent_find(ks.begin(), ks.end()) != ks.end())
        throw std::invalid_argument("explicit grid k values must be distinct");
    if (ks.front() > p_star)
        throw std::invalid_argument("grid k exceeds p* = " + std::to_string(p_star));
    if (fixed_k < 1 || fixed_k >= ks.back())
        throw std::invalid_argument("fixed k must lie in [1, min diverging k)");
    KGrid grid;
    grid.fixed_k = fixed_k;
    grid.k_min = ks.back();
    grid.ks = std::move(ks);
    for (auto k : grid.ks)
        grid.gammas.push_back(static_cast<double>(k) / static_cast<double>(p_star));
    return grid;
}

std::vector<StatisticRequest> grid_requests(const KGrid& grid)
{
    std::vector<StatisticRequest> requests;
    for (auto k : grid.all_k())
        requests.push_back(request_tk(k));
    return requests;
}

double clip_p_value(double p, std::size_t B)
{
    if (B < 1)
        throw std::invalid_argument("clipping requires B >= 1");
    const double lo = 0.5 / static_cast<double>(B);
    return std::clamp(p, lo, 1.0 - lo);
}

CombinedOutcome cauchy_combine(std::span<const double> pvals)
{
    if (pvals.empty())
        throw std::invalid_argument("Cauchy combination needs at least one p-value");
    double total = 0.0;
    for (double p : pvals) {
        if (!(p > 0.0 && p < 1.0))
            throw std::domain_error("Cauchy combination requires p-values in (0,1); clip first");
        total += cauchy_transform(p);
    }
    CombinedOutcome out;
    out.t_c = total / static_cast<double>(pvals.size());
    out.p_c = special::cauchy_sf(out.t_c);
    return out;
}

CombinedOutcome combine_from_ensemble(const KGrid& grid, std::span<const double> observed, const NullEnsemble& null,
                                      PValueMode mode)
{
    const auto ks = grid.all_k();
    if (observed.size() != ks.size())
        throw std::invalid_argument("observed statistics do not match the grid");
    std::vector<CombinedComponent> components;
    std::vector<double> clipped;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const std::string id = "T_" + std::to_string(ks[i]);
        const Probability p = perm_p_value(observed[i], null.replicates(id), mode);
        const double c = clip_p_value(p, null.B);
        clipped.push_back(c);
        components.push_back({id, ks[i], observed[i], p, Probability(c)});
    }
    CombinedOutcome out = cauchy_combine(clipped);
    out.components = std::move(components);
    return out;
}

CombinedOutcome adaptive_test(const DataMatrix& data, const KGrid& grid, std::size_t B, RngSpec seed,
                              unsigned threads, PValueMode mode)
{
    if (grid.ks.empty() || grid.ks.front() > pair_count(data.p()))
        throw std::invalid_argument("grid does not fit the data dimension");
    const auto requests = grid_requests(grid);
    const auto observed = evaluate_requests(data, requests);
    const NullEnsemble null = build_null(data, requests, B, seed, threads);
    return combine_from_ensemble(grid, observed, null, mode);
}

} // namespace ltest
