#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltest
{

using Matrix = Eigen::MatrixXd; // column-major
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : std::runtime_error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row), column_(column)
    {
    }

    /// 1-based line number in the file and 1-based field number.
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class DegenerateColumnError : public std::invalid_argument
{
public:
    DegenerateColumnError(const std::string& column_name, Index column)
        : std::invalid_argument("column '" + column_name + "' has zero sample variance"), column_(column)
    {
    }

    /// 0-based column index.
    Index column() const noexcept { return column_; }

private:
    Index column_;
};

/// n x p observation matrix: rows are samples, columns are variables.
/// Immutable once built; construction rejects n < 3, p < 2, non-finite
/// entries and constant columns.
class DataMatrix
{
public:
    explicit DataMatrix(Matrix values, std::vector<std::string> names = {});

    Index n() const noexcept { return values_.rows(); }
    Index p() const noexcept { return values_.cols(); }
    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Build without validation; the caller guarantees the invariants already hold
    /// (e.g. a per-column reordering of a validated matrix).
    static DataMatrix trusted(Matrix values, std::vector<std::string> names);

private:
    struct TrustedTag
    {
    };
    DataMatrix(TrustedTag, Matrix values, std::vector<std::string> names);

    Matrix values_;
    std::vector<std::string> names_;
};

/// Unordered variable pair (i, j), 1-based, i < j.
///
/// Pairs are enumerated row-major: (1,2), (1,3), ..., (1,p), (2,3), ...
struct PairIndex
{
    Index i;
    Index j;

    friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

constexpr std::size_t pair_count(Index p) noexcept
{
    return static_cast<std::size_t>(p) * static_cast<std::size_t>(p - 1) / 2;
}

/// 0-based flat position of a pair in the row-major enumeration.
std::size_t flat_index(PairIndex pair, Index p);
PairIndex pair_at(std::size_t flat, Index p);

/// Comma-separated numeric file, optional single header row.
DataMatrix load_csv(const std::filesystem::path& path, bool has_header);
DataMatrix parse_csv(const std::string& text, bool has_header);

} // namespace ltest
