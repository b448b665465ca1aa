#include "ltest/correlation.hpp"

#include <numeric>
#include <stdexcept>

namespace ltest
{
namespace
{

CorrSpectrum ordered_spectrum(const DataMatrix& data, std::optional<std::size_t> top_k)
{
    CorrSpectrum result;
    result.n = data.n();
    result.p = data.p();
    result.p_star = pair_count(data.p());
    result.top_k = top_k;

    std::vector<double> raw;
    scaled_squared_correlations(data.values(), raw);

    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto before = [&raw](std::size_t a, std::size_t b) { return raw[a] > raw[b] || (raw[a] == raw[b] && a < b); };

    const std::size_t k = top_k.value_or(raw.size());
    if (k < raw.size())
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), before);
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), before);
    order.resize(k);

    result.values.reserve(k);
    for (std::size_t idx : order)
        result.values.push_back(raw[idx]);
    result.pairs = std::move(order);
    return result;
}

} // namespace

double correlation(const DataMatrix& data, PairIndex pair)
{
    flat_index(pair, data.p()); // range check
    const auto x = data.values().col(pair.i - 1);
    const auto y = data.values().col(pair.j - 1);
    const Vector xc = x.array() - x.mean();
    const Vector yc = y.array() - y.mean();
    return centered_correlation(xc, yc);
}

CorrSpectrum spectrum(const DataMatrix& data)
{
    return ordered_spectrum(data, std::nullopt);
}

CorrSpectrum spectrum(const DataMatrix& data, TopK mode)
{
    const std::size_t p_star = pair_count(data.p());
    if (mode.k < 1 || mode.k > p_star)
        throw std::out_of_range("top-k request k = " + std::to_string(mode.k) + " outside [1, " +
                                std::to_string(p_star) + "]");
    return ordered_spectrum(data, mode.k);
}

double covariance_spectrum4(const DataMatrix& data)
{
    const ColumnStats stats = column_stats(data);
    Matrix centered = data.values();
    centered.rowwise() -= stats.mean.transpose();
    const Index p = data.p();
    Matrix cov = Matrix::Zero(p, p);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(data.n()));
    double total = 0.0;
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j) {
            const double c2 = cov(j, i) * cov(j, i);
            total += c2 * c2;
        }
    }
    return total;
}

} // namespace ltest
