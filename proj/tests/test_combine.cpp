#include "ltest/combine.hpp"
#include "ltest/lstatistic.hpp"
#include "ltest/simlab.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ltest;

namespace
{

DataMatrix gaussian(Index n, Index p, std::uint64_t seed)
{
    RngStream s(RngSpec{seed, 0});
    return gen_data(n, p, InnovationDist::gaussian(), std::nullopt, s);
}

} // namespace

TEST_CASE("default grid")
{
    const KGrid g = default_grid(100);
    CHECK(g.fixed_k == 5);
    CHECK(g.ks == std::vector<std::size_t>{2475, 1238, 619, 310, 155, 78, 39, 20});
    CHECK(g.K() == 8);
    REQUIRE(g.gammas.size() == 8);
    for (std::size_t i = 0; i < g.K(); ++i) {
        CHECK(g.gammas[i] == std::ldexp(1.0, -static_cast<int>(i + 1)));
        if (i > 0)
            CHECK(g.ks[i] < g.ks[i - 1]);
    }
    CHECK(g.all_k() == std::vector<std::size_t>{5, 2475, 1238, 619, 310, 155, 78, 39, 20});

    CHECK_THROWS_AS(default_grid(7), std::invalid_argument);
    CHECK_THROWS(default_grid(100, 20));

    const KGrid v = default_grid(100, 5, 16, GridBase::variable_count);
    CHECK(v.ks == std::vector<std::size_t>{50, 25});

    for (Index p : {9, 20, 57, 200, 500}) {
        const KGrid h = default_grid(p);
        for (std::size_t i = 0; i < h.K(); ++i) {
            CHECK(h.ks[i] >= 16);
            CHECK(h.ks[i] > h.fixed_k);
            CHECK(h.ks[i] <= pair_count(p));
            if (i > 0)
                CHECK(h.ks[i] < h.ks[i - 1]);
        }
    }
}

TEST_CASE("explicit grid")
{
    const KGrid g = explicit_grid(200, 5, {100, 4000, 250});
    CHECK(g.ks == std::vector<std::size_t>{4000, 250, 100});
    CHECK(g.gammas[0] == doctest::Approx(4000.0 / 19900.0));
    CHECK_THROWS(explicit_grid(200, 5, {100, 100}));
    CHECK_THROWS(explicit_grid(200, 5, {4, 100}));
    CHECK_THROWS(explicit_grid(200, 5, {20000}));
    CHECK_THROWS(explicit_grid(200, 5, {}));
}

TEST_CASE("cauchy_combine closed forms")
{
    const std::vector<double> halves(6, 0.5);
    const CombinedOutcome h = cauchy_combine(halves);
    CHECK(std::abs(h.t_c) <= 1e-15);
    CHECK(h.p_c.value() == doctest::Approx(0.5).epsilon(1e-15));

    const std::vector<double> single{0.05};
    const CombinedOutcome s = cauchy_combine(single);
    CHECK(std::abs(s.t_c - 6.313752) <= 1e-5);
    CHECK(std::abs(s.t_c - std::tan(0.45 * std::numbers::pi)) <= 1e-12);
    CHECK(std::abs(s.p_c.value() - 0.05) <= 1e-9);

    for (double p : {1e-3, 0.2, 0.5, 0.81, 0.999, 1e-12, 1 - 1e-12})
        CHECK(std::abs(cauchy_combine(std::vector<double>{p}).p_c.value() - p) <= 1e-9 * p);

    double previous = 1.0;
    for (double tiny : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) {
        const std::vector<double> mix{tiny, 0.9, 0.9, 0.9, 0.9};
        const double pc = cauchy_combine(mix).p_c.value();
        CHECK(pc < previous);
        previous = pc;
    }
    CHECK(previous < 1e-9);

    CHECK_THROWS_AS(cauchy_combine(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(cauchy_combine(std::vector<double>{0.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS(cauchy_combine(std::vector<double>{1.0}), std::domain_error);
}

TEST_CASE("p_C is monotone in every component")
{
    RngStream s(RngSpec{1, 0});
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(5);
        for (double& x : p)
            x = s.uniform_open();
        const double before = cauchy_combine(p).p_c.value();
        const std::size_t i = s.uniform_index(p.size());
        p[i] *= s.uniform_open();
        CHECK(cauchy_combine(p).p_c.value() <= before);
    }
}

TEST_CASE("clipping")
{
    CHECK(clip_p_value(0.0, 400) == 1.0 / 800);
    CHECK(clip_p_value(1.0, 400) == 1.0 - 1.0 / 800);
    CHECK(clip_p_value(0.3, 400) == 0.3);
    CHECK(clip_p_value(0.0, 1) == 0.5);
    CHECK_THROWS(clip_p_value(0.3, 0));
    const std::vector<double> extremes{clip_p_value(0.0, 10), clip_p_value(1.0, 10)};
    CHECK(std::isfinite(cauchy_combine(extremes).t_c));
}

TEST_CASE("combine_from_ensemble uses clipped permutation p-values")
{
    const DataMatrix d = gaussian(40, 12, 2);
    const KGrid grid = default_grid(12, 5, 16);
    const auto req = grid_requests(grid);
    const NullEnsemble null = build_null(d, req, 50, RngSpec{3, 0});
    std::vector<double> observed;
    for (std::size_t k : grid.all_k())
        observed.push_back(t_k(d, k));
    const CombinedOutcome c = combine_from_ensemble(grid, observed, null);
    REQUIRE(c.components.size() == grid.K() + 1);
    std::vector<double> clipped;
    for (std::size_t i = 0; i < c.components.size(); ++i) {
        const auto& comp = c.components[i];
        CHECK(comp.k == grid.all_k()[i]);
        CHECK(comp.id == "T_" + std::to_string(comp.k));
        CHECK(comp.p_value.value() == perm_p_value(observed[i], null.replicates(comp.id)).value());
        CHECK(comp.clipped_p_value.value() == clip_p_value(comp.p_value, 50));
        clipped.push_back(comp.clipped_p_value);
    }
    CHECK(c.t_c == cauchy_combine(clipped).t_c);
    CHECK(c.p_c.value() == doctest::Approx(1.0 - special::cauchy_cdf(c.t_c).value()).epsilon(1e-12));

    NullEnsemble partial = null;
    partial.ids.pop_back();
    partial.values.pop_back();
    CHECK_THROWS(combine_from_ensemble(grid, observed, partial));
}

TEST_CASE("adaptive_test detects a duplicated column")
{
    Matrix m = gaussian(100, 20, 4).values();
    m.col(13) = m.col(2);
    const DataMatrix d(m);
    const CombinedOutcome c = adaptive_test(d, default_grid(20), 400, RngSpec{5, 0});
    CHECK(c.p_c.value() <= 0.01);
    CHECK(c.components[0].p_value.value() == 0.0);
}

TEST_CASE("adaptive_test is row-order invariant and deterministic")
{
    const DataMatrix d = gaussian(60, 15, 6);
    RngStream s(RngSpec{7, 0});
    const auto perm = s.permutation(60);
    Matrix rows(60, 15);
    for (Index i = 0; i < 60; ++i)
        rows.row(i) = d.values().row(static_cast<Index>(perm[static_cast<std::size_t>(i)]));
    const DataMatrix shuffled(rows);
    const KGrid grid = default_grid(15);
    for (std::size_t k : grid.all_k())
        CHECK(t_k(shuffled, k) == doctest::Approx(t_k(d, k)).epsilon(1e-12));

    const CombinedOutcome a = adaptive_test(d, grid, 100, RngSpec{8, 0}, 1);
    const CombinedOutcome b = adaptive_test(d, grid, 100, RngSpec{8, 0}, 4);
    CHECK(a.t_c == b.t_c);
    CHECK(a.p_c.value() == b.p_c.value());
    for (std::size_t i = 0; i < a.components.size(); ++i)
        CHECK(a.components[i].statistic == doctest::Approx(t_k(d, a.components[i].k)).epsilon(1e-12));
}

TEST_CASE("conservative mode never yields a zero component p-value")
{
    Matrix m = gaussian(50, 10, 9).values();
    m.col(4) = m.col(1);
    const CombinedOutcome c =
        adaptive_test(DataMatrix(m), explicit_grid(10, 5, {40, 20}), 100, RngSpec{10, 0}, 1, PValueMode::conservative);
    for (const auto& comp : c.components)
        CHECK(comp.p_value.value() >= 1.0 / 101);
}
