#include "ltest/permutation.hpp"

#include "ltest/correlation.hpp"
#include "ltest/lstatistic.hpp"
#include "ltest/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace ltest
{

DataMatrix permute_columns(const DataMatrix& data, RngStream& stream)
{
    const Index n = data.n();
    const Matrix& in = data.values();
    Matrix out(n, data.p());
    for (Index j = 0; j < data.p(); ++j) {
        const auto perm = stream.permutation(static_cast<std::size_t>(n));
        for (Index r = 0; r < n; ++r)
            out(r, j) = in(static_cast<Index>(perm[static_cast<std::size_t>(r)]), j);
    }
    return DataMatrix::trusted(std::move(out), data.names());
}

void ReplicateContext::compute()
{
    if (computed_)
        return;
    scaled_squared_correlations(data_.values(), values_);
    total_ = std::accumulate(values_.begin(), values_.end(), 0.0);
    computed_ = true;
}

double ReplicateContext::total()
{
    compute();
    return total_;
}

void ReplicateContext::prepare_top(std::size_t k)
{
    compute();
    if (k < 1 || k > values_.size())
        throw std::out_of_range("top-k request outside [1, p*]");
    if (k <= prefix_sums_.size())
        return;
    select_top_descending(values_, k);
    prefix_sums_.resize(k);
    double running = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        running += values_[i];
        prefix_sums_[i] = running;
    }
}

double ReplicateContext::top_sum(std::size_t k)
{
    prepare_top(k);
    return prefix_sums_[k - 1];
}

StatisticRequest request_tk(std::size_t k)
{
    if (k < 1)
        throw std::out_of_range("T_k requires k >= 1");
    return {"T_" + std::to_string(k), k, [k](ReplicateContext& ctx) { return ctx.top_sum(k); }};
}

StatisticRequest request_tgamma(double gamma, Index p)
{
    return request_tk(diverging_k(gamma, pair_count(p)));
}

StatisticRequest request_tlx()
{
    return {"T_LX", 0, [](ReplicateContext& ctx) { return covariance_spectrum4(ctx.data()); }};
}

namespace
{

std::vector<double> evaluate_on(ReplicateContext& ctx, std::span<const StatisticRequest> requests)
{
    std::size_t max_k = 0;
    for (const auto& r : requests)
        max_k = std::max(max_k, r.top_k_needed);
    if (max_k > 0)
        ctx.prepare_top(max_k);
    std::vector<double> out;
    out.reserve(requests.size());
    for (const auto& r : requests)
        out.push_back(r.evaluate(ctx));
    return out;
}

} // namespace

std::vector<double> evaluate_requests(const DataMatrix& data, std::span<const StatisticRequest> requests)
{
    ReplicateContext ctx(data);
    return evaluate_on(ctx, requests);
}

bool NullEnsemble::contains(const std::string& id) const
{
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

const std::vector<double>& NullEnsemble::replicates(const std::string& id) const
{
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end())
        throw std::invalid_argument("null ensemble has no replicates for statistic '" + id + "'");
    return values[static_cast<std::size_t>(it - ids.begin())];
}

std::string data_fingerprint(const DataMatrix& data)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto feed = [&h](const void* bytes, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(bytes);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 0x100000001B3ULL;
        }
    };
    const std::int64_t dims[2] = {static_cast<std::int64_t>(data.n()), static_cast<std::int64_t>(data.p())};
    feed(dims, sizeof dims);
    feed(data.values().data(), static_cast<std::size_t>(data.values().size()) * sizeof(double));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

NullEnsemble build_null(const DataMatrix& data, std::span<const StatisticRequest> requests, std::size_t B,
                        RngSpec seed, unsigned threads)
{
    if (B < 1)
        throw std::invalid_argument("null ensemble requires B >= 1");
    NullEnsemble ensemble;
    ensemble.B = B;
    ensemble.seed = seed;
    ensemble.n = data.n();
    ensemble.p = data.p();
    ensemble.data_fingerprint = data_fingerprint(data);
    for (const auto& r : requests)
        ensemble.ids.push_back(r.id);
    ensemble.values.assign(requests.size(), std::vector<double>(B));

    parallel_for(B, threads, [&](std::size_t b) {
        RngStream stream(seed.child(b));
        const DataMatrix permuted = permute_columns(data, stream);
        ReplicateContext ctx(permuted);
        const auto row = evaluate_on(ctx, requests);
        for (std::size_t i = 0; i < row.size(); ++i)
            ensemble.values[i][b] = row[i];
    });
    return ensemble;
}

Probability perm_p_value(double observed, std::span<const double> replicates, PValueMode mode)
{
    if (replicates.empty())
        throw std::invalid_argument("permutation p-value needs at least one replicate");
    const auto B = static_cast<double>(replicates.size());
    if (mode == PValueMode::strict) {
        const auto exceed = std::count_if(replicates.begin(), replicates.end(), [&](double t) { return observed < t; });
        return Probability::clamped(static_cast<double>(exceed) / B);
    }
    const auto at_least = std::count_if(replicates.begin(), replicates.end(), [&](double t) { return t >= observed; });
    return Probability::clamped((1.0 + static_cast<double>(at_least)) / (B + 1.0));
}

void to_json(nlohmann::json& j, const NullEnsemble& e)
{
    nlohmann::json stats = nlohmann::json::array();
    for (std::size_t i = 0; i < e.ids.size(); ++i)
        stats.push_back({{"id", e.ids[i]}, {"values", e.values[i]}});
    j = {{"format", "ltest-null-ensemble"},
         {"version", 1},
         {"B", e.B},
         {"seed", {{"master_seed", e.seed.master_seed}, {"stream_index", e.seed.stream_index}}},
         {"n", e.n},
         {"p", e.p},
         {"data_fingerprint", e.data_fingerprint},
         {"statistics", stats}};
}

void from_json(const nlohmann::json& j, NullEnsemble& e)
{
    if (j.value("format", std::string{}) != "ltest-null-ensemble")
        throw std::invalid_argument("not an ltest null ensemble document");
    e.B = j.at("B").get<std::size_t>();
    e.seed.master_seed = j.at("seed").at("master_seed").get<std::uint64_t>();
    e.seed.stream_index = j.at("seed").at("stream_index").get<std::uint64_t>();
    e.n = j.at("n").get<Index>();
    e.p = j.at("p").get<Index>();
    e.data_fingerprint = j.at("data_fingerprint").get<std::string>();
    e.ids.clear();
    e.values.clear();
    for (const auto& s : j.at("statistics")) {
        e.ids.push_back(s.at("id").get<std::string>());
        e.values.push_back(s.at("values").get<std::vector<double>>());
        if (e.values.back().size() != e.B)
            throw std::invalid_argument("statistic '" + e.ids.back() + "' does not hold B replicates");
    }
}

} // namespace ltest
