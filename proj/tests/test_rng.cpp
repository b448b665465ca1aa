#include "ltest/parallel.hpp"
#include "ltest/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

using namespace ltest;

TEST_CASE("same spec gives the same sequence")
{
    RngStream a(RngSpec{42, 7});
    RngStream b = rng_stream(RngSpec{42, 7});
    for (int i = 0; i < 100; ++i)
        CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different streams and seeds differ")
{
    RngStream a(RngSpec{42, 0});
    RngStream b(RngSpec{42, 1});
    RngStream c(RngSpec{43, 0});
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        same_ab += x == b.next_u64();
        same_ac += x == c.next_u64();
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
}

TEST_CASE("child specs are deterministic and distinct")
{
    const RngSpec root{9, 3};
    CHECK(root.child(5) == root.child(5));
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const RngSpec c = root.child(i);
        seen.insert({c.master_seed, c.stream_index});
    }
    CHECK(seen.size() == 1000);
    CHECK(!(RngSpec{9, 3}.child(0) == RngSpec{9, 4}.child(0)));
}

TEST_CASE("uniforms")
{
    RngStream s(RngSpec{1, 0});
    double sum = 0.0;
    const int N = 200000;
    std::vector<int> bins(10, 0);
    for (int i = 0; i < N; ++i) {
        const double u = s.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = s.uniform_open();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        sum += u;
        ++bins[static_cast<std::size_t>(u * 10)];
    }
    CHECK(std::abs(sum / N - 0.5) < 5 * std::sqrt(1.0 / 12 / N));
    double chi2 = 0.0;
    for (int b : bins)
        chi2 += (b - N / 10.0) * (b - N / 10.0) / (N / 10.0);
    CHECK(chi2 < 27.88); // chi-square(9) 0.999 quantile
}

TEST_CASE("uniform_index is unbiased")
{
    RngStream s(RngSpec{2, 0});
    std::vector<int> counts(7, 0);
    const int N = 70000;
    for (int i = 0; i < N; ++i) {
        const auto k = s.uniform_index(7);
        REQUIRE(k < 7);
        ++counts[k];
    }
    double chi2 = 0.0;
    for (int c : counts)
        chi2 += (c - N / 7.0) * (c - N / 7.0) / (N / 7.0);
    CHECK(chi2 < 22.46); // chi-square(6) 0.999 quantile
    CHECK(s.uniform_index(1) == 0);
}

TEST_CASE("normal, gamma and t moments")
{
    RngStream s(RngSpec{3, 0});
    const int N = 200000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < N; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m1 /= N;
    m2 /= N;
    m4 /= N;
    CHECK(std::abs(m1) < 5 / std::sqrt(N));
    CHECK(std::abs(m2 - 1) < 5 * std::sqrt(2.0 / N));
    CHECK(std::abs(m4 - 3) < 5 * std::sqrt(96.0 / N));

    for (double shape : {0.4, 1.0, 2.5, 9.0}) {
        double g = 0, g2 = 0;
        for (int i = 0; i < N; ++i) {
            const double x = s.gamma(shape);
            REQUIRE(x >= 0.0);
            g += x;
            g2 += x * x;
        }
        g /= N;
        g2 /= N;
        CHECK(std::abs(g - shape) < 5 * std::sqrt(shape / N));
        CHECK(std::abs(g2 - g * g - shape) < 0.05 * shape + 0.01);
    }

    double t2 = 0;
    for (int i = 0; i < N; ++i) {
        const double t = s.student_t(8.0);
        t2 += t * t;
    }
    CHECK(std::abs(t2 / N - 8.0 / 6.0) < 0.03);
}

TEST_CASE("permutation is a bijection and uniform over small n")
{
    RngStream s(RngSpec{4, 0});
    for (std::size_t n : {1u, 2u, 10u, 257u}) {
        auto perm = s.permutation(n);
        std::sort(perm.begin(), perm.end());
        std::vector<std::size_t> ident(n);
        std::iota(ident.begin(), ident.end(), 0);
        CHECK(perm == ident);
    }
    // All 6 orderings of 3 elements appear equally often.
    std::map<std::vector<std::size_t>, int> freq;
    const int N = 60000;
    for (int i = 0; i < N; ++i)
        ++freq[s.permutation(3)];
    CHECK(freq.size() == 6);
    double chi2 = 0.0;
    for (const auto& [_, c] : freq)
        chi2 += (c - N / 6.0) * (c - N / 6.0) / (N / 6.0);
    CHECK(chi2 < 20.52); // chi-square(5) 0.999 quantile
}

TEST_CASE("parallel_for fills every slot once regardless of thread count")
{
    for (unsigned threads : {1u, 2u, 4u, 16u}) {
        std::vector<std::uint64_t> out(1000, 0);
        parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = RngStream(RngSpec{5, i}).next_u64(); });
        for (std::size_t i = 0; i < out.size(); ++i)
            CHECK(out[i] == RngStream(RngSpec{5, i}).next_u64());
    }
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 7)
                                         throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    int calls = 0;
    parallel_for(0, 4, [&](std::size_t) { ++calls; });
    CHECK(calls == 0);
}

TEST_CASE("resolve_threads")
{
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
}
