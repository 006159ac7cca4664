#include "diolab/series.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diolab;

namespace {

LinearFormsProblem power_problem(int n, int m, double tau) {
    LinearFormsProblem p;
    p.n = n;
    p.m = m;
    p.b.assign(m, 0.0);
    p.psi.tau = tau;
    return p;
}

LinearFormsProblem zero_problem(int n, int m) {
    LinearFormsProblem p = power_problem(n, m, 1.0);
    p.psi.law = PsiSpec::Law::Table;
    return p;
}

// 8 zeta(3/2), mpmath at 30 digits
constexpr double kEightZeta32 = 20.899002789483906;

}  // namespace

TEST(Series, DyadicCheckpoints) {
    EXPECT_EQ(dyadic_checkpoints(8), (std::vector<std::int64_t>{1, 2, 4, 8}));
    EXPECT_EQ(dyadic_checkpoints(10), (std::vector<std::int64_t>{1, 2, 4, 8, 10}));
}

TEST(Series, SchmidtHarmonic) {
    auto s = schmidt_sum(power_problem(2, 1, 2.0), 10);
    EXPECT_EQ(s.heights.back(), 10);
    EXPECT_NEAR(s.sums.back(), 23.431746031746032, 1e-12);
}

TEST(Series, SchmidtZeroTable) {
    auto s = schmidt_sum(zero_problem(2, 1), 100);
    for (double v : s.sums) EXPECT_EQ(v, 0.0);
    auto k = classify(s);
    EXPECT_EQ(k.verdict, Classification::Verdict::Converges);
    EXPECT_EQ(k.limit, 0.0);
}

TEST(Series, SchmidtTableSimultaneous) {
    LinearFormsProblem p = zero_problem(1, 2);
    for (std::int64_t a = 1; a <= 4; ++a) p.psi.table[{a}] = 1.0 / double(a);
    auto s = schmidt_sum(p, 4);
    EXPECT_NEAR(s.sums.back(), 1.0 + 1.0 / 4 + 1.0 / 9 + 1.0 / 16, 1e-15);
}

TEST(Series, HausdorffMatchesDoubleLoop) {
    auto p = power_problem(2, 1, 3.0);
    auto f = DimensionFunction::power(1.75);
    auto s = hausdorff_sum(p, f, 8);
    double oracle = 0.0;
    for (int a1 = -8; a1 <= 8; ++a1)
        for (int a2 = -8; a2 <= 8; ++a2) {
            int h = std::max(std::abs(a1), std::abs(a2));
            if (h == 0) continue;
            double psi = std::pow(double(h), -3.0);
            oracle += std::pow(psi / h, 0.75) * h;
        }
    EXPECT_NEAR(s.sums.back(), oracle, 1e-12);
}

TEST(Series, HausdorffSingleTerm) {
    LinearFormsProblem p = zero_problem(2, 1);
    p.psi.table[{2, 1}] = 0.1;
    auto s = hausdorff_sum(p, DimensionFunction::power(1.5), 4);
    EXPECT_NEAR(s.sums.back(), std::sqrt(0.05) * 2.0, 1e-15);
    EXPECT_NEAR(s.sums.back(), 0.44721, 1e-5);
}

TEST(Series, CollapseIdentityIsBitwise) {
    for (auto [n, m] : {std::pair{1, 2}, std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 1}})
        for (double tau : {1.5, 2.0, 3.0}) {
            auto p = power_problem(n, m, tau);
            auto a = schmidt_sum(p, 50);
            auto b = hausdorff_sum(p, DimensionFunction::power(double(n * m)), 50);
            EXPECT_EQ(a.heights, b.heights);
            EXPECT_EQ(a.sums, b.sums) << n << " " << m << " " << tau;
        }
}

TEST(Series, PartialSumsAreNonDecreasing) {
    auto s = corollary_one_sum(power_problem(2, 2, 2.0), 3.1, 64);
    for (std::size_t i = 1; i < s.sums.size(); ++i) EXPECT_GE(s.sums[i], s.sums[i - 1]);
}

TEST(Series, CorollaryOneNonIncreasingInS) {
    auto p = power_problem(2, 1, 3.0);
    double prev = INFINITY;
    for (double s : {1.1, 1.3, 1.5, 1.75, 1.9}) {
        double v = corollary_one_sum(p, s, 32).sums.back();
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(Series, ThreadCountDoesNotChangeSums) {
    auto p = power_problem(3, 1, 2.0);
    auto a = schmidt_sum(p, 40, 1);
    auto b = schmidt_sum(p, 40, 4);
    EXPECT_EQ(a.sums, b.sums);
}

TEST(Series, SquaresSumThreeTerms) {
    SquaresProblem sp;
    sp.tau = 1.0;
    auto s = squares_sum(sp, DimensionFunction::power(2.0), 3);
    EXPECT_NEAR(s.sums.back(), 1.0 + 0.5 + 1.0 / 3.0, 1e-15);
}

TEST(Series, SquaresSumZero) {
    SquaresProblem sp;
    sp.law = PsiSpec::Law::Table;
    auto s = squares_sum(sp, DimensionFunction::power(2.0), 16);
    EXPECT_EQ(s.sums.back(), 0.0);
}

TEST(Series, SquaresHarmonicDiverges) {
    SquaresProblem sp;
    sp.tau = 1.0;
    EXPECT_EQ(classify(squares_sum(sp, DimensionFunction::power(2.0), 1 << 16)).verdict,
              Classification::Verdict::Diverges);
}

TEST(Series, ClassifyDivergentSchmidt) {
    auto k = classify(schmidt_sum(power_problem(2, 1, 2.0), 1 << 14));
    EXPECT_EQ(k.verdict, Classification::Verdict::Diverges);
}

TEST(Series, ClassifyConvergentSchmidt) {
    auto k = classify(schmidt_sum(power_problem(2, 1, 2.5), 1 << 14));
    ASSERT_EQ(k.verdict, Classification::Verdict::Converges);
    EXPECT_NEAR(k.limit, kEightZeta32, std::max(3.0 * k.error, 0.05));
}

TEST(Series, AnalyticExponents) {
    EXPECT_DOUBLE_EQ(critical_exponent_analytic(power_problem(2, 1, 3.0)).s_star, 1.75);
    EXPECT_DOUBLE_EQ(critical_exponent_analytic(power_problem(1, 2, 2.0)).s_star, 1.0);
    auto full = critical_exponent_analytic(power_problem(2, 1, 2.0));
    EXPECT_DOUBLE_EQ(full.s_star, 2.0);
    EXPECT_TRUE(full.full_dimension);
}

TEST(Series, NumericExponentBracketsAnalytic) {
    auto r = critical_exponent_numeric(power_problem(2, 1, 3.0), 1.05, 1.95, 0.02, 1 << 14);
    EXPECT_FALSE(r.inconclusive);
    EXPECT_LE(r.lo, 1.75 + 0.02);
    EXPECT_GE(r.hi, 1.75 - 0.02);
    EXPECT_NEAR(r.s_star, 1.75, 0.02);

    auto q = critical_exponent_numeric(power_problem(1, 2, 2.0), 0.1, 1.9, 0.02, 1 << 14);
    EXPECT_NEAR(q.s_star, 1.0, 0.02);
}

TEST(Series, NumericExponentEmptySet) {
    auto r = critical_exponent_numeric(zero_problem(2, 1), 1.05, 1.95, 0.02, 1 << 10);
    EXPECT_TRUE(r.empty_set);
    EXPECT_EQ(r.s_star, 1.05);
}

TEST(Series, NumericExponentRejectsBracketAtBase) {
    EXPECT_THROW(critical_exponent_numeric(power_problem(2, 1, 3.0), 1.0, 1.9, 0.02, 1024), std::invalid_argument);
}

TEST(Series, SquaresExponent) {
    EXPECT_DOUBLE_EQ(squares_critical_exponent(3.0).s_star, 1.6);
    EXPECT_TRUE(squares_critical_exponent(1.0).full_dimension);
    EXPECT_NEAR(squares_critical_exponent(1e9).s_star, 1.0, 1e-8);
    SquaresProblem sp;
    sp.tau = 3.0;
    auto r = squares_exponent_numeric(sp, 1.05, 1.95, 0.02, 1 << 16);
    EXPECT_NEAR(r.s_star, 1.6, 0.02);
}

TEST(Series, SchmidtWindowMatchesDifference) {
    auto p = power_problem(2, 1, 2.5);
    auto s = schmidt_sum(p, 16);
    // [8, 16) = S_16 - S_8 minus the shell at 16
    double shell16 = 8.0 * 16 * std::pow(16.0, -2.5);
    EXPECT_NEAR(schmidt_window(p, 8, 16), s.sums.back() - s.sums[3] - shell16 + 8.0 * 8 * std::pow(8.0, -2.5), 1e-12);
}
