#include "ltest/simlab.hpp"

#include "ltest/baselines.hpp"
#include "ltest/correlation.hpp"
#include "ltest/lstatistic.hpp"
#include "ltest/parallel.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

namespace ltest
{
namespace
{

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double parse_double(std::string_view text, std::string_view what)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
    return v;
}

std::size_t parse_size(std::string_view text, std::string_view what)
{
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
    return v;
}

// Stream families under the experiment's master seed.
enum Family : std::uint64_t
{
    null_data = 0,
    null_permutation = 1,
    alt_data = 2,
    alt_permutation = 3,
};

RngSpec family_spec(std::uint64_t seed, Family family, std::size_t replicate)
{
    return RngSpec{seed, 0}.child(family).child(replicate);
}

// Scores (or p-values) for R replicates, row-major: values[r * methods + i].
std::vector<double> run_replicates(const ExperimentConfig& config, const std::vector<MethodSpec>& methods,
                                   const KGrid& grid, const std::optional<AlternativeSpec>& alt, Family data_family,
                                   Family perm_family, bool want_p_values)
{
    std::vector<double> out(config.R * methods.size());
    parallel_for(config.R, std::max(1u, config.threads), [&](std::size_t r) {
        RngStream stream(family_spec(config.seed, data_family, r));
        const DataMatrix data = gen_data(config.n, config.p, config.dist, alt, stream);
        const MethodValues v = evaluate_methods(data, methods, grid, config.B, family_spec(config.seed, perm_family, r),
                                                config.p_value_mode, want_p_values);
        const auto& src = want_p_values ? v.p_values : v.scores;
        std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(r * methods.size()));
    });
    return out;
}

} // namespace

InnovationDist InnovationDist::student(double nu)
{
    if (!(nu > 2.0))
        throw std::invalid_argument("standardized t requires nu > 2");
    return {Kind::student_standardized, nu};
}

InnovationDist InnovationDist::parse(std::string_view text)
{
    if (text == "gaussian" || text == "normal")
        return gaussian();
    if (text == "uniform")
        return uniform();
    if (text.starts_with("t="))
        return student(parse_double(text.substr(2), "t degrees of freedom"));
    throw std::invalid_argument("unknown distribution '" + std::string(text) + "' (gaussian|uniform|t=<nu>)");
}

std::string InnovationDist::label() const
{
    switch (kind) {
    case Kind::gaussian: return "gaussian";
    case Kind::uniform_unit_var: return "uniform";
    case Kind::student_standardized: return "t=" + format_number(nu);
    }
    return "?";
}

double InnovationDist::draw(RngStream& stream) const
{
    switch (kind) {
    case Kind::gaussian: return stream.normal();
    case Kind::uniform_unit_var: return std::sqrt(3.0) * (2.0 * stream.uniform() - 1.0);
    case Kind::student_standardized: return stream.student_t(nu) * std::sqrt((nu - 2.0) / nu);
    }
    return 0.0;
}

void AlternativeSpec::validate(Index p) const
{
    if (m < 2)
        throw std::invalid_argument("block size m must be >= 2");
    if (m > p)
        throw std::invalid_argument("block size m exceeds p");
    if (!(theta > 0.0) || !(theta < static_cast<double>(m) * (m - 1)))
        throw std::invalid_argument("theta must lie in (0, m(m-1))");
}

Matrix block_sigma(const AlternativeSpec& alt)
{
    if (alt.m < 2)
        throw std::invalid_argument("block size m must be >= 2");
    const double base = alt.theta / (static_cast<double>(alt.m) * (alt.m - 1));
    Matrix sigma(alt.m, alt.m);
    for (int i = 0; i < alt.m; ++i)
        for (int j = 0; j < alt.m; ++j)
            sigma(i, j) = i == j ? 1.0 : std::pow(base, std::abs(i - j) / 4.0);
    return sigma;
}

DataMatrix gen_data(Index n, Index p, const InnovationDist& dist, const std::optional<AlternativeSpec>& alt,
                    RngStream& stream)
{
    if (n < 3 || p < 2)
        throw std::invalid_argument("gen_data requires n >= 3 and p >= 2");
    Matrix z(n, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i)
            z(i, j) = dist.draw(stream);
    if (alt) {
        alt->validate(p);
        const Matrix root = sym_sqrt(block_sigma(*alt));
        const Matrix block = z.leftCols(alt->m) * root; // rows: (root Z_k)^T, root symmetric
        z.leftCols(alt->m) = block;
    }
    return DataMatrix(std::move(z));
}

MethodSpec MethodSpec::parse(std::string_view text)
{
    MethodSpec m;
    if (text == "t5") {
        m.kind = Kind::tk;
        m.k = 5;
    } else if (text.starts_with("tk=")) {
        m.kind = Kind::tk;
        m.k = parse_size(text.substr(3), "k");
        if (m.k < 1)
            throw std::invalid_argument("tk requires k >= 1");
    } else if (text.starts_with("tgamma=")) {
        m.kind = Kind::tgamma;
        m.gamma = parse_double(text.substr(7), "gamma");
        if (!(m.gamma > 0.0 && m.gamma <= 1.0))
            throw std::invalid_argument("tgamma requires gamma in (0,1]");
    } else if (text == "tc") {
        m.kind = Kind::tc;
    } else if (text == "sc") {
        m.kind = Kind::sc;
    } else if (text == "j") {
        m.kind = Kind::j;
    } else if (text == "lx") {
        m.kind = Kind::lx;
    } else if (text == "f") {
        m.kind = Kind::f;
    } else {
        throw std::invalid_argument("unknown method '" + std::string(text) +
                                    "' (t5, tk=<int>, tgamma=<float>, tc, sc, j, lx, f)");
    }
    return m;
}

std::vector<MethodSpec> MethodSpec::parse_list(std::string_view csv)
{
    std::vector<MethodSpec> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = csv.find(',', start);
        const auto token = csv.substr(start, comma == std::string_view::npos ? csv.npos : comma - start);
        if (!token.empty())
            out.push_back(parse(token));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    if (out.empty())
        throw std::invalid_argument("empty method list");
    return out;
}

std::string MethodSpec::label() const
{
    switch (kind) {
    case Kind::tk: return "T_" + std::to_string(k);
    case Kind::tgamma: return "T_gamma=" + format_number(gamma);
    case Kind::tc: return "T_C";
    case Kind::sc: return "T_SC";
    case Kind::j: return "T_J";
    case Kind::lx: return "T_LX";
    case Kind::f: return "T_F";
    }
    return "?";
}

std::string MethodSpec::token() const
{
    switch (kind) {
    case Kind::tk: return k == 5 ? "t5" : "tk=" + std::to_string(k);
    case Kind::tgamma: return "tgamma=" + format_number(gamma);
    case Kind::tc: return "tc";
    case Kind::sc: return "sc";
    case Kind::j: return "j";
    case Kind::lx: return "lx";
    case Kind::f: return "f";
    }
    return "?";
}

bool MethodSpec::uses_permutation() const noexcept
{
    return kind == Kind::tk || kind == Kind::tgamma || kind == Kind::tc || kind == Kind::lx;
}

void ExperimentConfig::validate() const
{
    if (n < 3)
        throw std::invalid_argument("n must be >= 3");
    if (p < 3)
        throw std::invalid_argument("p must be >= 3");
    if (R < 1)
        throw std::invalid_argument("R must be >= 1");
    if (B < 1)
        throw std::invalid_argument("B must be >= 1");
    if (alphas.empty())
        throw std::invalid_argument("at least one alpha level is required");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("alpha must lie in (0,1)");
    if (alternative)
        alternative->validate(p);
    const std::size_t p_star = pair_count(p);
    for (const auto& m : resolved_methods())
        if (m.kind == MethodSpec::Kind::tk && m.k > p_star)
            throw std::invalid_argument("k = " + std::to_string(m.k) + " exceeds p* = " + std::to_string(p_star));
}

KGrid ExperimentConfig::grid() const
{
    if (!grid_ks.empty())
        return explicit_grid(p, fixed_k, grid_ks);
    return default_grid(p, fixed_k, 16, grid_base);
}

std::vector<MethodSpec> ExperimentConfig::resolved_methods() const
{
    if (!methods.empty())
        return methods;
    const KGrid g = grid();
    std::vector<MethodSpec> out;
    out.push_back({MethodSpec::Kind::tk, g.fixed_k, 0.0});
    for (auto k : g.ks)
        out.push_back({MethodSpec::Kind::tk, k, 0.0});
    out.push_back({MethodSpec::Kind::tc, 0, 0.0});
    out.push_back({MethodSpec::Kind::sc, 0, 0.0});
    out.push_back({MethodSpec::Kind::j, 0, 0.0});
    out.push_back({MethodSpec::Kind::f, 0, 0.0});
    return out;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c)
{
    std::vector<std::string> tokens;
    for (const auto& m : c.resolved_methods())
        tokens.push_back(m.token());
    const KGrid g = c.grid();
    j = {{"n", c.n},
         {"p", c.p},
         {"dist", c.dist.label()},
         {"alternative", c.alternative ? nlohmann::json{{"m", c.alternative->m}, {"theta", c.alternative->theta}}
                                       : nlohmann::json(nullptr)},
         {"methods", tokens},
         {"alphas", c.alphas},
         {"R", c.R},
         {"B", c.B},
         {"seed", c.seed},
         {"fixed_k", g.fixed_k},
         {"grid_ks", g.ks},
         {"grid_base", c.grid_base == GridBase::pair_count ? "pairs" : "variables"},
         {"p_value_mode", c.p_value_mode == PValueMode::strict ? "strict" : "conservative"}};
}

const ReportRow& ExperimentReport::find(std::string_view method, int m, double alpha) const
{
    for (const auto& row : rows)
        if (row.method == method && row.m == m && std::abs(row.alpha - alpha) < 1e-12)
            return row;
    throw std::out_of_range("no report row for " + std::string(method));
}

MethodValues evaluate_methods(const DataMatrix& data, const std::vector<MethodSpec>& methods, const KGrid& grid,
                              std::size_t B, RngSpec permutation_seed, PValueMode mode, bool want_p_values)
{
    using Kind = MethodSpec::Kind;
    const std::size_t p_star = pair_count(data.p());
    auto resolved_k = [&](const MethodSpec& m) {
        return m.kind == Kind::tk ? m.k : diverging_k(m.gamma, p_star);
    };

    // Every statistic that needs a null ensemble, each requested once.
    std::vector<StatisticRequest> requests;
    std::set<std::string> seen;
    auto add = [&](StatisticRequest r) {
        if (seen.insert(r.id).second)
            requests.push_back(std::move(r));
    };
    bool needs_tc = false;
    for (const auto& m : methods) {
        if (m.kind == Kind::tc) {
            needs_tc = true;
            for (auto& r : grid_requests(grid))
                add(std::move(r));
        } else if (want_p_values && (m.kind == Kind::tk || m.kind == Kind::tgamma)) {
            add(request_tk(resolved_k(m)));
        } else if (want_p_values && m.kind == Kind::lx) {
            add(request_tlx());
        }
    }

    ReplicateContext ctx(data);
    std::optional<NullEnsemble> null;
    if (!requests.empty())
        null = build_null(data, requests, B, permutation_seed, 1);
    std::optional<CombinedOutcome> combined;
    if (needs_tc) {
        std::vector<double> observed;
        for (auto k : grid.all_k())
            observed.push_back(ctx.top_sum(k));
        combined = combine_from_ensemble(grid, observed, *null, mode);
    }

    MethodValues out;
    for (const auto& m : methods) {
        double score = 0.0;
        double p_value = 1.0;
        switch (m.kind) {
        case Kind::tk:
        case Kind::tgamma: {
            const std::size_t k = resolved_k(m);
            score = ctx.top_sum(k);
            if (want_p_values)
                p_value = perm_p_value(score, null->replicates("T_" + std::to_string(k)), mode);
            break;
        }
        case Kind::tc:
            score = combined->t_c;
            p_value = combined->p_c;
            break;
        case Kind::sc: {
            const auto o = t_sc_from_sum(ctx.total(), data.n(), data.p());
            score = o.statistic;
            p_value = o.p_value;
            break;
        }
        case Kind::j: {
            const auto o = t_j_from_max(ctx.top_sum(1), data.p());
            score = o.statistic;
            p_value = o.p_value;
            break;
        }
        case Kind::f: {
            const auto sc = t_sc_from_sum(ctx.total(), data.n(), data.p());
            const auto j = t_j_from_max(ctx.top_sum(1), data.p());
            const auto o = t_f_from(sc.p_value, j.p_value);
            score = -o.statistic;
            p_value = o.p_value;
            break;
        }
        case Kind::lx:
            score = covariance_spectrum4(data);
            if (want_p_values)
                p_value = perm_p_value(score, null->replicates("T_LX"), mode);
            break;
        }
        out.scores.push_back(score);
        if (want_p_values)
            out.p_values.push_back(p_value);
    }
    return out;
}

ExperimentReport empirical_size(const ExperimentConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    if (config.alternative)
        throw std::invalid_argument("empirical size requires a null configuration (no alternative)");
    const KGrid grid = config.grid();
    const auto methods = config.resolved_methods();
    const auto pvals = run_replicates(config, methods, grid, std::nullopt, null_data, null_permutation, true);

    ExperimentReport report;
    report.kind = "size";
    report.config = config;
    const auto R = static_cast<double>(config.R);
    for (std::size_t i = 0; i < methods.size(); ++i) {
        for (double alpha : config.alphas) {
            std::size_t rejections = 0;
            for (std::size_t r = 0; r < config.R; ++r)
                rejections += pvals[r * methods.size() + i] <= alpha ? 1 : 0;
            report.rows.push_back({methods[i].label(), config.n, config.p, config.dist.label(), 0, 0, alpha,
                                   static_cast<double>(rejections) / R, std::sqrt(alpha * (1.0 - alpha) / R)});
        }
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ExperimentReport size_corrected_power(const ExperimentConfig& config,
                                      const std::vector<std::optional<AlternativeSpec>>& alternatives)
{
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    for (const auto& alt : alternatives)
        if (alt)
            alt->validate(config.p);
    const KGrid grid = config.grid();
    const auto methods = config.resolved_methods();
    const std::size_t M = methods.size();
    const std::size_t R = config.R;

    const auto null_scores = run_replicates(config, methods, grid, std::nullopt, null_data, null_permutation, false);

    // critical[i][a]: empirical (1 - alpha) quantile of method i's null scores.
    std::vector<std::vector<double>> critical(M);
    for (std::size_t i = 0; i < M; ++i) {
        std::vector<double> column(R);
        for (std::size_t r = 0; r < R; ++r)
            column[r] = null_scores[r * M + i];
        std::sort(column.begin(), column.end());
        for (double alpha : config.alphas) {
            auto idx = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(R) - 1e-9));
            idx = std::clamp<std::size_t>(idx, 1, R) - 1;
            critical[i].push_back(column[idx]);
        }
    }

    ExperimentReport report;
    report.kind = "power";
    report.config = config;
    report.config["alternatives"] = nlohmann::json::array();
    for (const auto& alt : alternatives) {
        report.config["alternatives"].push_back(alt ? nlohmann::json{{"m", alt->m}, {"theta", alt->theta}}
                                                    : nlohmann::json(nullptr));
        const auto scores = run_replicates(config, methods, grid, alt, alt_data, alt_permutation, false);
        for (std::size_t i = 0; i < M; ++i) {
            for (std::size_t a = 0; a < config.alphas.size(); ++a) {
                std::size_t hits = 0;
                for (std::size_t r = 0; r < R; ++r)
                    hits += scores[r * M + i] > critical[i][a] ? 1 : 0;
                const double power = static_cast<double>(hits) / static_cast<double>(R);
                report.rows.push_back({methods[i].label(), config.n, config.p, config.dist.label(), alt ? alt->m : 0,
                                       alt ? alt->sparsity() : 0, config.alphas[a], power,
                                       std::sqrt(power * (1.0 - power) / static_cast<double>(R))});
            }
        }
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace ltest
