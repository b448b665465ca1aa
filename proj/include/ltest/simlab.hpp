#pragma once

#include "ltest/combine.hpp"
#include "ltest/data.hpp"
#include "ltest/permutation.hpp"
#include "ltest/rng.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ltest
{

/// Zero-mean, unit-variance innovation law for the independent-component model.
struct InnovationDist
{
    enum class Kind
    {
        gaussian,
        uniform_unit_var,      // U(-sqrt 3, sqrt 3)
        student_standardized,  // t_nu * sqrt((nu - 2) / nu)
    };

    Kind kind = Kind::gaussian;
    double nu = 5.0;

    static InnovationDist gaussian() { return {Kind::gaussian, 5.0}; }
    static InnovationDist uniform() { return {Kind::uniform_unit_var, 5.0}; }
    static InnovationDist student(double nu);
    /// "gaussian", "uniform" or "t=<nu>".
    static InnovationDist parse(std::string_view text);

    std::string label() const;
    double draw(RngStream& stream) const;
};

/// Block alternative: the first m variables have Toeplitz correlation
/// {theta / (m (m-1))}^{|i-j|/4}; the rest are independent.
struct AlternativeSpec
{
    int m = 2;
    double theta = 1.5;

    std::size_t sparsity() const noexcept { return static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2; }
    void validate(Index p) const;
};

class NotPsdError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// The m x m block of the alternative covariance.
Matrix block_sigma(const AlternativeSpec& alt);

/// Symmetric square root via eigendecomposition. Eigenvalues down to
/// -1e-8 * ||sigma|| are clamped to zero; anything more negative throws.
template <class Derived>
Matrix sym_sqrt(const Eigen::MatrixBase<Derived>& sigma)
{
    if (sigma.rows() != sigma.cols())
        throw std::invalid_argument("sym_sqrt requires a square matrix");
    const Matrix s = sigma.template cast<double>();
    const double scale = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("sym_sqrt requires a symmetric matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    const Vector& lambda = eig.eigenvalues();
    const double norm = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
    if (lambda.minCoeff() < -1e-8 * norm)
        throw NotPsdError("matrix is not positive semidefinite (eigenvalue " + std::to_string(lambda.minCoeff()) +
                          ")");
    const Vector root = lambda.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

/// n i.i.d. draws of X = Sigma^{1/2} Z with Sigma = blockdiag(Sigma_1, I) (or I under the null).
DataMatrix gen_data(Index n, Index p, const InnovationDist& dist, const std::optional<AlternativeSpec>& alt,
                    RngStream& stream);

/// A test to run inside an experiment or from the command line.
struct MethodSpec
{
    enum class Kind
    {
        tk,
        tgamma,
        tc,
        sc,
        j,
        lx,
        f,
    };

    Kind kind = Kind::tc;
    std::size_t k = 0;
    double gamma = 0.0;

    /// One of: t5, tk=<int>, tgamma=<float>, tc, sc, j, lx, f.
    static MethodSpec parse(std::string_view text);
    static std::vector<MethodSpec> parse_list(std::string_view csv);

    std::string label() const;
    std::string token() const;
    bool uses_permutation() const noexcept;

    friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

struct ExperimentConfig
{
    Index n = 100;
    Index p = 100;
    InnovationDist dist;
    std::optional<AlternativeSpec> alternative;
    std::vector<MethodSpec> methods; // empty: default set for p
    std::vector<double> alphas{0.05};
    std::size_t R = 1000;
    std::size_t B = 400;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t fixed_k = 5;
    std::vector<std::size_t> grid_ks; // empty: default dyadic grid
    GridBase grid_base = GridBase::pair_count;
    PValueMode p_value_mode = PValueMode::strict;

    void validate() const;
    KGrid grid() const;
    /// methods, or T_5, every grid T_k, T_C, T_SC, T_J and T_F when unset.
    std::vector<MethodSpec> resolved_methods() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& config);

struct ReportRow
{
    std::string method;
    Index n = 0;
    Index p = 0;
    std::string dist;
    int m = 0;           // 0: null
    std::size_t s = 0;   // sparsity m(m-1)/2
    double alpha = 0.05;
    double estimate = 0.0;
    double stderr_ = 0.0;
};

struct ExperimentReport
{
    std::string kind; // "size" or "power"
    nlohmann::json config;
    std::vector<ReportRow> rows;
    double wall_seconds = 0.0;

    const ReportRow& find(std::string_view method, int m, double alpha) const;
};

/// Per-replicate output of every method on one matrix.
struct MethodValues
{
    std::vector<double> p_values; // empty when not requested
    std::vector<double> scores;   // larger means more evidence against independence
};

MethodValues evaluate_methods(const DataMatrix& data, const std::vector<MethodSpec>& methods, const KGrid& grid,
                              std::size_t B, RngSpec permutation_seed, PValueMode mode, bool want_p_values);

/// Fraction of R null replicates with p-value <= alpha, per method and alpha.
ExperimentReport empirical_size(const ExperimentConfig& config);

/// Size-corrected power: critical values are the empirical (1 - alpha)
/// quantiles of each method's score over R null replicates; power is the
/// fraction of R alternative replicates whose score exceeds it. An empty
/// optional in `alternatives` reruns the null.
ExperimentReport size_corrected_power(const ExperimentConfig& config,
                                      const std::vector<std::optional<AlternativeSpec>>& alternatives);

} // namespace ltest
