#pragma once

#include "ltest/data.hpp"
#include "ltest/rng.hpp"
#include "ltest/special_functions.hpp"

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ltest
{

/// Independently permute every column (without replacement).
DataMatrix permute_columns(const DataMatrix& data, RngStream& stream);

/// One matrix plus a lazily computed, descending prefix of its n * rho^2 values.
/// All spectrum-based statistics on a replicate share a single correlation pass.
class ReplicateContext
{
public:
    explicit ReplicateContext(const DataMatrix& data) : data_(data) {}

    const DataMatrix& data() const noexcept { return data_; }

    /// Make sure the k largest values are sorted (call with the largest k first).
    void prepare_top(std::size_t k);
    /// Sum of the k largest n * rho^2 values.
    double top_sum(std::size_t k);
    /// Sum of all p* values (flat pair order).
    double total();

private:
    const DataMatrix& data_;
    std::vector<double> values_;
    std::vector<double> prefix_sums_;
    double total_ = 0.0;
    bool computed_ = false;

    void compute();
};

/// A named statistic evaluated on each permuted replicate. Evaluation must be
/// deterministic given the matrix.
struct StatisticRequest
{
    std::string id;
    std::size_t top_k_needed = 0; // largest spectrum prefix the statistic reads
    std::function<double(ReplicateContext&)> evaluate;
};

StatisticRequest request_tk(std::size_t k);
/// T_{ceil(gamma p*)}; its identifier is the resolved "T_<k>".
StatisticRequest request_tgamma(double gamma, Index p);
StatisticRequest request_tlx();

std::vector<double> evaluate_requests(const DataMatrix& data, std::span<const StatisticRequest> requests);

/// B permutation replicates of one or more statistics under a recorded seed.
/// Replicate b is drawn from stream seed.child(b).
struct NullEnsemble
{
    std::size_t B = 0;
    RngSpec seed;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values; // values[i] has length B, for ids[i]
    Index n = 0;
    Index p = 0;
    std::string data_fingerprint;

    bool contains(const std::string& id) const;
    const std::vector<double>& replicates(const std::string& id) const;
};

/// Content hash of the matrix (FNV-1a over dimensions and IEEE bytes).
std::string data_fingerprint(const DataMatrix& data);

NullEnsemble build_null(const DataMatrix& data, std::span<const StatisticRequest> requests, std::size_t B,
                        RngSpec seed, unsigned threads = 1);

enum class PValueMode
{
    strict,       // #{T* > T} / B
    conservative, // (1 + #{T* >= T}) / (B + 1)
};

Probability perm_p_value(double observed, std::span<const double> replicates, PValueMode mode = PValueMode::strict);

void to_json(nlohmann::json& j, const NullEnsemble& ensemble);
void from_json(const nlohmann::json& j, NullEnsemble& ensemble);

} // namespace ltest
