#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "anderson/criticality.hpp"

using namespace anderson;
using std::numbers::pi;

TEST(ClassifyEnergy, LatticePoints)
{
    auto p = square_barrier(1.0);
    auto r = classify_energy(p, pi * pi / 4);
    EXPECT_TRUE(r.critical());
    EXPECT_TRUE(r.has(CriticalReason::HalfIntegerPiSquared));
    EXPECT_EQ(*r.lattice_n, 1);

    auto zero = classify_energy(p, 0.0);
    EXPECT_TRUE(zero.has(CriticalReason::HalfIntegerPiSquared));
    EXPECT_EQ(*zero.lattice_n, 0);

    for (int n = 1; n <= 12; ++n) {
        const double E = (n * pi / 2) * (n * pi / 2);
        EXPECT_TRUE(classify_energy(p, E).has(CriticalReason::HalfIntegerPiSquared)) << n;
        EXPECT_FALSE(classify_energy(p, E + 1e-6).has(CriticalReason::HalfIntegerPiSquared)) << n;
    }
}

TEST(ClassifyEnergy, ExampleOne)
{
    auto p = square_barrier(1.0);
    auto r = classify_energy(p, pi * pi + 1);
    EXPECT_TRUE(r.has(CriticalReason::PositiveReflectionZero));
    EXPECT_FALSE(r.has(CriticalReason::HalfIntegerPiSquared));

    // closed form |b(sqrt 2)| = sin(1)/(2 sqrt 2) = 0.2975..., and 2 is not on the lattice
    auto regular = classify_energy(p, 2.0);
    EXPECT_FALSE(regular.critical());
    EXPECT_NEAR(*regular.reflection_residual, std::sin(1.0) / (2 * std::sqrt(2.0)), 1e-13);
}

TEST(ClassifyEnergy, NegativeAxis)
{
    auto p = square_barrier(1.0);
    auto r = classify_energy(p, -1.0);
    EXPECT_FALSE(r.critical());
    EXPECT_GT(*r.negative_axis_residual, 1e-8);

    // b(+-i alpha) vanishes on the free potential
    EXPECT_TRUE(classify_energy(free_potential(), -2.0).has(CriticalReason::NegativeAxisZero));
}

TEST(ScanReflectionZeros, ExampleOne)
{
    auto p = square_barrier(1.0);
    auto scan = scan_reflection_zeros(p, 0.5, 10.0);
    EXPECT_FALSE(scan.identically_reflectionless);
    ASSERT_EQ(scan.zeros.size(), 3u);
    for (int n = 1; n <= 3; ++n) {
        EXPECT_NEAR(scan.zeros[n - 1].k, std::sqrt(n * n * pi * pi + 1), 1e-8);
        EXPECT_LT(scan.zeros[n - 1].residual, 1e-8);
    }
    for (const auto& z : scan.zeros)
        EXPECT_TRUE(classify_energy(p, z.k * z.k).has(CriticalReason::PositiveReflectionZero));
}

TEST(ScanReflectionZeros, ExampleOneOtherLambdas)
{
    for (double lambda : {-3.0, 2.5, 2 * pi * pi}) {
        auto p = square_barrier(lambda);
        auto scan = scan_reflection_zeros(p, 0.5, 12.0);
        std::vector<double> expected;
        for (int n = 1; n < 10; ++n) {
            const double E = n * n * pi * pi + lambda;
            if (E > std::max(0.0, lambda) && std::sqrt(E) >= 0.5 && std::sqrt(E) <= 12.0) expected.push_back(std::sqrt(E));
        }
        ASSERT_EQ(scan.zeros.size(), expected.size()) << lambda;
        for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(scan.zeros[i].k, expected[i], 1e-8);
    }
}

TEST(ScanReflectionZeros, ExampleTwo)
{
    auto p = antisymmetric_step(6 * pi * pi);
    auto scan = scan_reflection_zeros(p, 0.5, 12.0);
    ASSERT_EQ(scan.zeros.size(), 1u);
    EXPECT_NEAR(scan.zeros[0].k, std::sqrt(10 * pi * pi), 1e-8);
}

TEST(ScanReflectionZeros, FreePotentialIsFlagged)
{
    auto scan = scan_reflection_zeros(free_potential(), 0.5, 5.0, 500);
    EXPECT_TRUE(scan.identically_reflectionless);
    EXPECT_TRUE(scan.zeros.empty());
}

TEST(ScanReflectionZeros, ZerosAreSeparated)
{
    auto p = validate({-0.5, -0.2, 0.3, 0.5}, {40.0, -25.0, 60.0});
    auto scan = scan_reflection_zeros(p, 0.5, 30.0);
    for (std::size_t i = 1; i < scan.zeros.size(); ++i) EXPECT_GT(scan.zeros[i].k - scan.zeros[i - 1].k, 1e-6);
    for (const auto& z : scan.zeros) EXPECT_LT(std::abs(jost_coefficients(p, z.k).b), 1e-8);
}

TEST(NegativeAxisZeros, FreePotential)
{
    auto scan = negative_axis_zeros(free_potential(), 0.1, 3.0, 300);
    EXPECT_TRUE(scan.zeros.empty());
    EXPECT_EQ(scan.identically_zero.size(), 2u);  // b(+i alpha), b(-i alpha)
}

TEST(NegativeAxisZeros, WellMatchesDenseClosedForm)
{
    // f = -10 chi: closed-form continuation to k = +-i alpha with t = sqrt(10 - alpha^2)
    const double lambda = -10.0;
    auto closed = [&](AxisFunction w, double alpha) {
        const double t = std::sqrt(-lambda - alpha * alpha);
        const double ratio = (-2 * alpha * alpha - lambda) / (2 * alpha * t) * std::sin(t);
        switch (w) {
        case AxisFunction::APlus: return std::exp(alpha) * (std::cos(t) + ratio);
        case AxisFunction::AMinus: return std::exp(-alpha) * (std::cos(t) - ratio);
        case AxisFunction::BPlus: return lambda * std::sin(t) / (2 * alpha * t);
        case AxisFunction::BMinus: return -lambda * std::sin(t) / (2 * alpha * t);
        }
        return 0.0;
    };
    auto p = square_barrier(lambda);
    for (auto w : {AxisFunction::APlus, AxisFunction::AMinus, AxisFunction::BPlus, AxisFunction::BMinus})
        for (double a = 0.2; a < 3; a += 0.3) EXPECT_NEAR(axis_value(p, w, a), closed(w, a), 1e-10 * std::max(1.0, std::abs(closed(w, a))));

    // brute force: sign changes of the closed forms on a dense grid, located to grid resolution
    std::vector<std::pair<double, AxisFunction>> expected;
    const int dense = 300000;
    for (auto w : {AxisFunction::APlus, AxisFunction::AMinus, AxisFunction::BPlus, AxisFunction::BMinus}) {
        double prev = closed(w, 0.1);
        for (int i = 1; i <= dense; ++i) {
            const double a = 0.1 + 2.9 * i / dense;
            const double cur = closed(w, a);
            if ((prev > 0) != (cur > 0)) expected.emplace_back(a, w);
            prev = cur;
        }
    }
    auto scan = negative_axis_zeros(p, 0.1, 3.0, 600);
    ASSERT_EQ(scan.zeros.size(), expected.size());
    ASSERT_FALSE(expected.empty());
    for (const auto& [a, w] : expected) {
        bool matched = false;
        for (const auto& z : scan.zeros)
            if (z.which == w && std::abs(z.alpha - a) < 2.9 / dense + 1e-12) matched = true;
        EXPECT_TRUE(matched) << to_string(w) << " at " << a;
    }
    // b(i alpha) = 0 where sqrt(10 - alpha^2) = pi
    const double b_zero = std::sqrt(10 - pi * pi);
    bool found = false;
    for (const auto& z : scan.zeros) {
        EXPECT_LT(std::abs(axis_value(p, z.which, z.alpha)), 1e-8);
        if (z.which == AxisFunction::BPlus && std::abs(z.alpha - b_zero) < 1e-12) found = true;
    }
    EXPECT_TRUE(found);
    for (const auto& z : scan.zeros) EXPECT_TRUE(classify_energy(p, -z.alpha * z.alpha).has(CriticalReason::NegativeAxisZero));
}

namespace {
std::set<std::pair<std::uint64_t, std::uint64_t>> brute_pairs(std::uint64_t N)
{
    std::set<std::pair<std::uint64_t, std::uint64_t>> out;
    for (std::uint64_t n = 1; n <= N + 1; ++n)
        for (std::uint64_t m = 1; m < n; ++m)
            if (n * n - m * m == N) out.emplace(n, m);
    return out;
}
} // namespace

TEST(Example2Reflectionless, Enumeration)
{
    auto three = example2_reflectionless(2 * pi * pi * 3);
    ASSERT_EQ(three.size(), 1u);
    EXPECT_EQ(three[0].n, 2u);
    EXPECT_EQ(three[0].m, 1u);
    EXPECT_NEAR(three[0].E, 2 * pi * pi * 5, 1e-12);

    auto twentyfour = example2_reflectionless(48 * pi * pi);
    ASSERT_EQ(twentyfour.size(), 2u);
    std::set<std::pair<std::uint64_t, std::uint64_t>> got;
    for (auto& r : twentyfour) got.emplace(r.n, r.m);
    EXPECT_EQ(got, (std::set<std::pair<std::uint64_t, std::uint64_t>>{{5, 1}, {7, 5}}));

    EXPECT_TRUE(example2_reflectionless(2 * pi * pi * 2).empty());
    EXPECT_TRUE(example2_reflectionless(2 * pi * pi * 3.3).empty());

    for (std::uint64_t N = 1; N <= 120; ++N) {
        auto rows = example2_reflectionless(2 * pi * pi * static_cast<double>(N));
        std::set<std::pair<std::uint64_t, std::uint64_t>> mine;
        for (auto& r : rows) mine.emplace(r.n, r.m);
        EXPECT_EQ(mine, brute_pairs(N)) << N;
    }
}

TEST(NjConstruction, PaperFormulas)
{
    auto j2 = nj_construction(2);
    EXPECT_EQ(j2.N, 24u);
    ASSERT_EQ(j2.pairs.size(), 2u);
    EXPECT_EQ(j2.pairs[0], (std::pair<std::uint64_t, std::uint64_t>{5, 1}));
    EXPECT_EQ(j2.pairs[1], (std::pair<std::uint64_t, std::uint64_t>{7, 5}));

    auto j1 = nj_construction(1);
    EXPECT_EQ(j1.N, 8u);
    EXPECT_EQ(j1.pairs.at(0), (std::pair<std::uint64_t, std::uint64_t>{3, 1}));

    auto j3 = nj_construction(3);
    EXPECT_EQ(j3.N, 80u);
    EXPECT_EQ(j3.pairs.size(), 3u);

    for (int j = 1; j <= 10; ++j) {
        auto c = nj_construction(j);
        std::set<std::pair<std::uint64_t, std::uint64_t>> distinct(c.pairs.begin(), c.pairs.end());
        EXPECT_EQ(distinct.size(), static_cast<std::size_t>(j));
        for (auto [n, m] : c.pairs) EXPECT_EQ(n * n - m * m, c.N);
    }
    EXPECT_THROW(nj_construction(70), Error);
    EXPECT_THROW(nj_construction(0), Error);
}

TEST(Example1Types, Enumeration)
{
    auto two_pi2 = example1_critical_types(2 * pi * pi, 30.0);
    int type2 = 0;
    for (const auto& c : two_pi2) {
        if (c.type == Example1Type::Type2) {
            ++type2;
            EXPECT_EQ(c.n, 2);
            EXPECT_EQ(c.m, 1);
            EXPECT_NEAR(c.E, 9 * pi * pi / 4, 1e-12);
        }
    }
    EXPECT_EQ(type2, 1);

    auto one = example1_critical_types(1.0, 50.0);
    std::vector<std::pair<Example1Type, double>> got;
    for (auto& c : one) got.emplace_back(c.type, c.E);
    const std::vector<std::pair<Example1Type, double>> want{{Example1Type::Type1b, pi * pi},
                                                            {Example1Type::Type1a, pi * pi + 1},
                                                            {Example1Type::Type1b, 4 * pi * pi},
                                                            {Example1Type::Type1a, 4 * pi * pi + 1}};
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(got[i].first, want[i].first);
        EXPECT_NEAR(got[i].second, want[i].second, 1e-12);
    }

    // integer search oracle: lambda = 1 is never pi^2 (n-m)(n+m-1)
    for (int n = 1; n <= 10; ++n)
        for (int m = 1; m <= 10; ++m) EXPECT_NE(pi * pi * (n - m) * (n + m - 1), 1.0);

    auto zero = example1_critical_types(0.0, 100.0);
    std::vector<double> a, b;
    for (auto& c : zero) {
        if (c.type == Example1Type::Type1a) a.push_back(c.E);
        if (c.type == Example1Type::Type1b) b.push_back(c.E);
    }
    EXPECT_EQ(a, b);
}
