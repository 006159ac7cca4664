#include "diolab/estimators.hpp"
#include "diolab/rng.hpp"

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

SquaresProblem squares(double tau) {
    SquaresProblem sp;
    sp.tau = tau;
    return sp;
}

}  // namespace

TEST(Estimators, Windows) {
    auto d = dyadic_windows(1, 3);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[0].lo, 2);
    EXPECT_EQ(d[0].hi, 3);
    EXPECT_EQ(d[2].lo, 8);
    EXPECT_EQ(d[2].hi, 15);
    auto c = cumulative_windows(2, 4);
    EXPECT_EQ(c[0].lo, 1);
    EXPECT_EQ(c[2].hi, 16);
}

TEST(Estimators, WilsonContainsFraction) {
    for (auto [h, n] : {std::pair{0, 10}, std::pair{5, 10}, std::pair{10, 10}, std::pair{37, 1000}}) {
        auto ci = wilson95(h, n);
        double f = double(h) / n;
        EXPECT_LE(ci.lo, f);
        EXPECT_GE(ci.hi, f);
        EXPECT_GE(ci.lo, 0.0);
        EXPECT_LE(ci.hi, 1.0);
    }
}

TEST(Estimators, ZeroPsiGivesZeroFraction) {
    LinearFormsProblem p = power_problem(2, 1, 1.0);
    p.psi.law = PsiSpec::Law::Table;
    auto r = mc_measure(AnyProblem{p}, 1, 64, 5000, 1);
    EXPECT_EQ(r.hits, 0);
    EXPECT_EQ(r.fraction, 0.0);
}

TEST(Estimators, HitHeightsMatchDirectScan) {
    auto p = power_problem(2, 1, 1.5);
    CounterRng rng(2, 0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x{rng.uniform(), rng.uniform()};
        Point X(2, 1, x);
        std::vector<std::int64_t> direct;
        for (std::int64_t h = 1; h <= 30; ++h) {
            bool any = false;
            for_each_in_shell(2, h, [&](const IVec& a) { any = any || satisfies(X, a, p); });
            if (any) direct.push_back(h);
        }
        EXPECT_EQ(hit_heights(AnyProblem{p}, x, 1, 30), direct);
    }
}

TEST(Estimators, UnionBoundHolds) {
    auto p = power_problem(2, 1, 2.5);
    auto ws = dyadic_windows(2, 9);
    auto reps = mc_measure_windows(AnyProblem{p}, ws, 20000, 3);
    for (std::size_t k = 0; k < ws.size(); ++k) {
        double ub = union_bound(AnyProblem{p}, ws[k]);
        double direct = 0.0;
        for (auto h = ws[k].lo; h <= ws[k].hi; ++h) direct += double(shell_size(2, h)) * 2.0 * std::pow(double(h), -2.5);
        EXPECT_NEAR(ub, std::min(direct, 1.0), 1e-12 * direct);
        EXPECT_LE(reps[k].fraction, ub + 3.0 * reps[k].half_width());
    }
}

TEST(Estimators, MeasureIsThreadIndependent) {
    auto p = power_problem(2, 1, 2.0);
    auto ws = cumulative_windows(2, 6);
    auto a = mc_measure_windows(AnyProblem{p}, ws, 4000, 17, 1);
    auto b = mc_measure_windows(AnyProblem{p}, ws, 4000, 17, 4);
    for (std::size_t k = 0; k < ws.size(); ++k) EXPECT_EQ(a[k].hits, b[k].hits);
}

TEST(Estimators, SingleWindowMatchesBatch) {
    auto p = power_problem(1, 2, 1.0);
    auto ws = dyadic_windows(1, 4);
    auto batch = mc_measure_windows(AnyProblem{p}, ws, 3000, 8);
    for (std::size_t k = 0; k < ws.size(); ++k)
        EXPECT_EQ(mc_measure(AnyProblem{p}, ws[k].lo, ws[k].hi, 3000, 8).hits, batch[k].hits);
}

TEST(Estimators, ZeroOneDivergent) {
    auto r = zero_one_probe(AnyProblem{power_problem(2, 1, 2.0)}, cumulative_windows(4, 10), 20000, 1);
    EXPECT_EQ(r.trend, ZeroOneReport::Trend::TowardOne);
}

TEST(Estimators, ZeroOneConvergent) {
    auto r = zero_one_probe(AnyProblem{power_problem(2, 1, 2.5)}, dyadic_windows(0, 9), 20000, 1);
    EXPECT_EQ(r.trend, ZeroOneReport::Trend::TowardZero);
    EXPECT_TRUE(r.union_bound_holds);
}

TEST(Estimators, ZeroOneNeedsFourWindows) {
    EXPECT_THROW(zero_one_probe(AnyProblem{power_problem(2, 1, 2.0)}, dyadic_windows(1, 3), 100, 1),
                 std::invalid_argument);
}

TEST(Estimators, GenerationSingleWindowIsHitList) {
    auto p = power_problem(2, 1, 2.0);
    auto ws = dyadic_windows(1, 3);
    auto G = generation_set(AnyProblem{p}, 1, ws);
    CounterRng rng(4, 1);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> x{rng.uniform(), rng.uniform()};
        EXPECT_EQ(G.contains(x), !hit_list(Point(2, 1, x), p, ws[0].lo, ws[0].hi).empty());
    }
}

TEST(Estimators, GenerationsAreNested) {
    auto p = power_problem(2, 1, 1.5);
    auto ws = dyadic_windows(1, 4);
    auto G1 = generation_set(AnyProblem{p}, 1, ws), G2 = generation_set(AnyProblem{p}, 2, ws),
         G3 = generation_set(AnyProblem{p}, 3, ws);
    CounterRng rng(4, 2);
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> x{rng.uniform(), rng.uniform()};
        if (G3.contains(x)) ASSERT_TRUE(G2.contains(x));
        if (G2.contains(x)) ASSERT_TRUE(G1.contains(x));
    }
}

TEST(Estimators, GenerationMatchesDoubleLoop) {
    // n = m = 1, tau = 2, three dyadic generations
    LinearFormsProblem p = power_problem(1, 1, 2.0);
    auto ws = dyadic_windows(1, 3);
    auto G = generation_set(AnyProblem{p}, 3, ws);
    CounterRng rng(4, 3);
    for (int t = 0; t < 5000; ++t) {
        double x = rng.uniform();
        bool all = true;
        for (auto& w : ws) {
            bool any = false;
            for (auto a = w.lo; a <= w.hi; ++a)
                for (auto s : {a, -a}) {
                    double v = double(s) * x;
                    any = any || std::abs(v - std::nearbyint(v)) < std::pow(double(a), -2.0);
                }
            all = all && any;
        }
        ASSERT_EQ(G.contains({x}), all) << x;
    }
}

TEST(Estimators, RasterCoversMembers) {
    for (AnyProblem p : {AnyProblem{power_problem(2, 1, 2.0)}, AnyProblem{squares(3.0)}}) {
        auto G = generation_set(p, 2, dyadic_windows(1, 2));
        Bitmap bm;
        ASSERT_TRUE(G.raster(8, bm));
        CounterRng rng(5, 5);
        int members = 0;
        for (int t = 0; t < 20000; ++t) {
            std::vector<double> x{rng.uniform(), rng.uniform()};
            if (!G.contains(x)) continue;
            ++members;
            ASSERT_TRUE(bm.get(std::int64_t(x[0] * 256), std::int64_t(x[1] * 256)));
        }
        EXPECT_GT(members, 0);
    }
}

TEST(Estimators, BitmapCoarsen) {
    Bitmap b(3);
    b.set(0, 0);
    b.set(7, 7);
    b.set_run(4, 2, 5);
    EXPECT_EQ(b.count(), 6);
    auto c = b.coarsen();
    EXPECT_EQ(c.level, 2);
    EXPECT_EQ(c.count(), 4);
    EXPECT_TRUE(c.get(2, 1));
    EXPECT_TRUE(c.get(2, 2));
}

TEST(Estimators, BoxCountOfLine) {
    BoxUnionSet line(2, {Box{{0.0, 0.0}, {1e-9, 1.0}}});
    auto rep = box_count(line, {4, 5, 6, 7, 8, 9});
    EXPECT_NEAR(rep.slope, 1.0, 0.02);
    for (std::size_t i = 1; i < rep.counts.size(); ++i) EXPECT_GE(rep.counts[i], rep.counts[i - 1]);
}

TEST(Estimators, BoxCountSlopesBounded) {
    auto G = generation_set(AnyProblem{power_problem(1, 2, 2.0)}, 3, dyadic_windows(1, 3));
    BoxSampling s;
    s.base_level = 11;
    auto rep = box_count(G, {4, 5, 6, 7, 8, 9, 10, 11}, s);
    for (std::size_t i = 1; i < rep.counts.size(); ++i) {
        EXPECT_GE(rep.counts[i], rep.counts[i - 1]);
        double local = std::log2(double(rep.counts[i]) / double(rep.counts[i - 1]));
        EXPECT_GE(local, 0.0);
        EXPECT_LE(local, 2.0);
    }
}

TEST(Estimators, BoxCountNeedsFiveScales) {
    BoxUnionSet sq(2, {Box{{0.0, 0.0}, {1.0, 1.0}}});
    EXPECT_THROW(box_count(sq, {1, 2, 3}), std::invalid_argument);
}

TEST(Estimators, ContentOfUnitSquare) {
    BoxUnionSet sq(2, {Box{{0.0, 0.0}, {1.0, 1.0}}});
    auto c = content_upper_bound(sq, DimensionFunction::power(2.0), 4);
    EXPECT_EQ(c.boxes, 256);
    EXPECT_DOUBLE_EQ(c.radius, 1.0 / 32.0);
    EXPECT_DOUBLE_EQ(c.value, 0.25);
}

TEST(Estimators, ContentOfEmptySet) {
    BoxUnionSet none(2);
    EXPECT_EQ(content_upper_bound(none, DimensionFunction::power(1.0), 6).value, 0.0);
}

TEST(Estimators, AmbientPowerContentIsCountTimesRadius) {
    auto G = generation_set(AnyProblem{power_problem(2, 1, 2.0)}, 2, dyadic_windows(1, 2));
    for (int level = 3; level <= 7; ++level) {
        auto c = content_upper_bound(G, DimensionFunction::power(2.0), level);
        EXPECT_DOUBLE_EQ(c.value, double(c.boxes) * std::pow(std::ldexp(1.0, -level) / 2.0, 2.0));
    }
}

TEST(Estimators, ContentDecreasesAboveBoxDimension) {
    auto G = generation_set(AnyProblem{squares(3.0)}, 3, dyadic_windows(0, 2));
    double prev = INFINITY;
    for (int level = 6; level <= 11; ++level) {
        double v = content_upper_bound(G, DimensionFunction::power(1.95), level).value;
        EXPECT_LT(v, prev) << level;
        prev = v;
    }
}

TEST(Estimators, SquaresFlaggedInTheorem) {
    EXPECT_FALSE(out_of_theorem(AnyProblem{squares(3.0)}));
    EXPECT_TRUE(out_of_theorem(AnyProblem{power_problem(1, 1, 2.0)}));
    EXPECT_EQ(ambient_dim(AnyProblem{power_problem(2, 2, 2.0)}), 4);
}
