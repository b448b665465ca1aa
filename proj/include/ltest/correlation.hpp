#pragma once

#include "ltest/data.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace ltest
{

/// Per-column sample mean and centred Euclidean norm ||X_i - mean_i||.
struct ColumnStats
{
    Vector mean;
    Vector centered_norm;
};

template <class Derived>
ColumnStats column_stats(const Eigen::MatrixBase<Derived>& x)
{
    ColumnStats stats;
    stats.mean = x.colwise().mean().transpose().template cast<double>();
    stats.centered_norm.resize(x.cols());
    for (Index j = 0; j < x.cols(); ++j)
        stats.centered_norm(j) = (x.col(j).template cast<double>().array() - stats.mean(j)).matrix().norm();
    return stats;
}

inline ColumnStats column_stats(const DataMatrix& data)
{
    return column_stats(data.values());
}

/// Columns centred and scaled to unit norm; U^T U is then the correlation matrix.
template <class Derived>
Matrix standardize_columns(const Eigen::MatrixBase<Derived>& x)
{
    const ColumnStats stats = column_stats(x);
    Matrix u = x.template cast<double>();
    u.rowwise() -= stats.mean.transpose();
    u.array().rowwise() /= stats.centered_norm.transpose().array();
    return u;
}

/// Pearson correlation from one pass over two centred columns, as
/// s_xy / sqrt(s_xx s_yy); identical columns give exactly 1.
template <class A, class B>
double centered_correlation(const Eigen::MatrixBase<A>& xc, const Eigen::MatrixBase<B>& yc)
{
    return std::clamp(xc.dot(yc) / std::sqrt(xc.dot(xc) * yc.dot(yc)), -1.0, 1.0);
}

/// n * rho_ij^2 for every pair (i < j), written in flat pair order into `out`.
///
/// The correlation matrix is formed as a symmetric rank update of the
/// standardized columns; |rho| is clamped to 1 before squaring so every
/// value stays in [0, n]. Near-perfect correlations are recomputed with a
/// direct pass so exactly collinear columns give exactly n.
template <class Derived>
void scaled_squared_correlations(const Eigen::MatrixBase<Derived>& x, std::vector<double>& out)
{
    const Index n = x.rows();
    const Index p = x.cols();
    const Matrix u = standardize_columns(x);
    Matrix gram = Matrix::Zero(p, p);
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(u.transpose());
    out.resize(pair_count(p));
    std::size_t k = 0;
    const double scale = static_cast<double>(n);
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j) {
            double r = std::clamp(gram(j, i), -1.0, 1.0);
            if (std::abs(r) > 1.0 - 1e-9) {
                const Vector xi = x.col(i).template cast<double>().array() - x.col(i).template cast<double>().mean();
                const Vector xj = x.col(j).template cast<double>().array() - x.col(j).template cast<double>().mean();
                r = centered_correlation(xi, xj);
            }
            out[k++] = scale * r * r;
        }
    }
}

/// Pearson correlation of one pair, from a direct pass over the centred columns.
double correlation(const DataMatrix& data, PairIndex pair);

/// Requests the k largest values instead of the whole ordered spectrum.
struct TopK
{
    std::size_t k;
};

/// The values n * rho_ij^2 in nonincreasing order, or the k largest of them.
/// Equal values are ordered by flat pair index.
struct CorrSpectrum
{
    Index n = 0;
    Index p = 0;
    std::size_t p_star = 0;
    std::optional<std::size_t> top_k; // empty: full spectrum
    std::vector<double> values;
    std::vector<std::size_t> pairs; // flat pair index of each value

    bool is_full() const noexcept { return !top_k.has_value(); }
    PairIndex pair(std::size_t rank) const { return pair_at(pairs.at(rank), p); }
};

CorrSpectrum spectrum(const DataMatrix& data);
CorrSpectrum spectrum(const DataMatrix& data, TopK mode);

/// Partially reorder `values` so that the first k entries are the k largest,
/// in nonincreasing order (expected linear-time selection plus a k log k sort).
inline void select_top_descending(std::vector<double>& values, std::size_t k)
{
    k = std::min(k, values.size());
    if (k == 0)
        return;
    if (k < values.size())
        std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end(),
                         std::greater<>());
    std::sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), std::greater<>());
}

/// Sum over pairs of the fourth power of the divisor-n sample covariance.
double covariance_spectrum4(const DataMatrix& data);

} // namespace ltest
