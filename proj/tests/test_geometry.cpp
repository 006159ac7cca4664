#include "diolab/geometry.hpp"
#include "diolab/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diolab;

namespace {

LinearFormsProblem power_problem(int n, int m, double tau, std::vector<double> b = {}) {
    LinearFormsProblem p;
    p.n = n;
    p.m = m;
    p.b = b.empty() ? std::vector<double>(m, 0.0) : b;
    p.psi.tau = tau;
    return p;
}

LinearFormsProblem table_problem(int n, int m, std::map<IVec, double> t, std::vector<double> b = {}) {
    LinearFormsProblem p = power_problem(n, m, 1.0, b);
    p.psi.law = PsiSpec::Law::Table;
    p.psi.table = std::move(t);
    return p;
}

Point random_point(int n, int m, CounterRng& rng) {
    Point X(n, m);
    for (auto& v : X.x) v = rng.uniform();
    return X;
}

}  // namespace

TEST(Geometry, SatisfiesExamples) {
    EXPECT_TRUE(satisfies(Point(1, 1, {0.5}), {2}, table_problem(1, 1, {{{2}, 0.1}})));
    EXPECT_FALSE(satisfies(Point(1, 1, {0.5}), {3}, table_problem(1, 1, {{{3}, 0.4}})));
    EXPECT_FALSE(satisfies(Point(2, 1, {0.2, 0.4}), {1, 2}, table_problem(2, 1, {{{1, 2}, 0.15}}, {0.3})));
}

TEST(Geometry, SatisfiesIsStrict) {
    // a.x = 0.25 exactly, Psi = 0.25
    auto p = table_problem(1, 1, {{{1}, 0.25}});
    EXPECT_FALSE(satisfies(Point(1, 1, {0.25}), {1}, p));
    EXPECT_TRUE(satisfies(Point(1, 1, {0.25}), {1}, table_problem(1, 1, {{{1}, 0.2500001}})));
}

TEST(Geometry, NeighborhoodExamples) {
    Neighborhood empty{{{1, 0}, {0}, {0.0}, ResonantPlane::Kind::Linear}, 0.0};
    EXPECT_FALSE(neighborhood_membership(Point(2, 1, {0.1, 0.9}), empty));

    Neighborhood axis{{{1, 0}, {0}, {0.0}, ResonantPlane::Kind::Linear}, 0.2};
    EXPECT_TRUE(neighborhood_membership(Point(2, 1, {0.1, 0.9}), axis));

    Neighborhood sq{{{1, 2}, {1}, {0.0}, ResonantPlane::Kind::Squared}, 0.05};
    EXPECT_FALSE(neighborhood_membership(Point(2, 1, {0.5, 0.3}), sq));
    EXPECT_NEAR(std::abs(0.5 + 4 * 0.3 - 1.0) / std::sqrt(17.0), 0.1698, 1e-4);
    sq.delta = 0.17;
    EXPECT_TRUE(neighborhood_membership(Point(2, 1, {0.5, 0.3}), sq));
}

TEST(Geometry, EquivalenceRandomPoints) {
    CounterRng rng(11, 0);
    auto p = power_problem(2, 1, 2.0);
    for (int k = 0; k < 50; ++k) EXPECT_TRUE(equivalence_check(random_point(2, 1, rng), p, 20));
}

TEST(Geometry, EquivalenceSimultaneous) {
    CounterRng rng(5, 1);
    auto p = power_problem(1, 2, 1.5);
    for (int k = 0; k < 1000; ++k) ASSERT_TRUE(equivalence_check(random_point(1, 2, rng), p, 50)) << k;
}

TEST(Geometry, EquivalenceWithShift) {
    CounterRng rng(6, 2);
    auto p = power_problem(2, 2, 1.0, {0.3, 0.77});
    for (int k = 0; k < 200; ++k) ASSERT_TRUE(equivalence_check(random_point(2, 2, rng), p, 10));
}

TEST(Geometry, EquivalenceOnBoundary) {
    // a = 4, Psi = 1/4: x = 1/16 puts a.x exactly at distance Psi from 0
    auto p = table_problem(1, 1, {{{4}, 0.25}});
    Point X(1, 1, {1.0 / 16.0});
    EXPECT_FALSE(satisfies(X, {4}, p));
    EXPECT_TRUE(equivalence_check(X, p, 4));
}

TEST(Geometry, HitListGoldenRatio) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    Point X(1, 1, {phi});
    LinearFormsProblem p = power_problem(1, 1, 1.0);
    std::map<IVec, double> t;
    for (std::int64_t a = -100; a <= 100; ++a)
        if (a != 0) t[{a}] = 1.0 / (2.0 * std::abs(double(a)));
    p = table_problem(1, 1, t);
    auto hits = hit_list(X, p, 1, 100);

    std::vector<IVec> brute;
    for (std::int64_t a = -100; a <= 100; ++a) {
        if (a == 0) continue;
        double v = double(a) * phi;
        if (std::abs(v - std::nearbyint(v)) * 2.0 * std::abs(double(a)) < 1.0) brute.push_back({a});
    }
    EXPECT_EQ(hits, brute);
    std::set<std::int64_t> heights;
    for (auto& a : hits) heights.insert(std::abs(a[0]));
    for (std::int64_t f : {1, 2, 3, 5, 8, 13, 21, 34, 55, 89}) EXPECT_TRUE(heights.count(f)) << f;
    for (std::int64_t h : heights) {
        bool fib = false;
        for (std::int64_t a = 1, b = 1; a <= 100; std::tie(a, b) = std::pair{b, a + b}) fib = fib || a == h;
        EXPECT_TRUE(fib) << h;
    }
}

TEST(Geometry, HitListZeroAndOrigin) {
    CounterRng rng(3, 3);
    EXPECT_TRUE(hit_list(random_point(2, 1, rng), table_problem(2, 1, {}), 1, 10).empty());
    auto all = hit_list(Point(2, 1, {0.0, 0.0}), power_problem(2, 1, 2.0), 1, 10);
    EXPECT_EQ(std::int64_t(all.size()), 21 * 21 - 1);
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
}

TEST(Geometry, HitListThreadIndependent) {
    CounterRng rng(4, 4);
    auto X = random_point(2, 1, rng);
    auto p = power_problem(2, 1, 1.5);
    EXPECT_EQ(hit_list(X, p, 1, 40, 1), hit_list(X, p, 1, 40, 3));
}

TEST(Geometry, CoverAxisSlab) {
    Neighborhood nb{{{1, 0}, {0}, {0.0}, ResonantPlane::Kind::Linear}, 1.0 / 16.0};
    auto rep = cover_neighborhood(nb, 1.0 / 16.0);
    EXPECT_EQ(rep.count, 16);
    EXPECT_TRUE(rep.within_bound);
    EXPECT_EQ(rep.count, brute_force_cover_count(nb, 1.0 / 16.0));
}

TEST(Geometry, CoverSingleBall) {
    Neighborhood nb{{{5}, {2}, {0.0}, ResonantPlane::Kind::Linear}, 0.01};
    auto rep = cover_neighborhood(nb, 0.01);
    EXPECT_TRUE(rep.single_ball);
    EXPECT_EQ(rep.count, 1);
    EXPECT_NEAR(rep.ball_center[0], 0.4, 1e-15);
}

TEST(Geometry, CoverRejectsBadRadius) {
    Neighborhood nb{{{1, 0}, {0}, {0.0}, ResonantPlane::Kind::Linear}, 0.1};
    EXPECT_THROW(cover_neighborhood(nb, 0.0), std::domain_error);
}

TEST(Geometry, CoverMatchesGridOracleAndEconomy) {
    // n = m = 2, a = (3, 1), tau = 2: Psi/|a| = 1/27
    const IVec a{3, 1};
    const double psi = 1.0 / 9.0, aa = 10.0, r = 1.0 / 27.0;
    const double C = cover_constant(2, 2);
    for (auto [p1, p2] : {std::pair{0, 0}, std::pair{1, 2}, std::pair{3, 1}}) {
        Neighborhood nb{{a, {p1, p2}, {0.0, 0.0}, ResonantPlane::Kind::Linear}, psi / std::sqrt(aa)};
        auto rep = cover_neighborhood(nb, r);
        EXPECT_EQ(rep.count, brute_force_cover_count(nb, r));
        EXPECT_LE(double(rep.count), C * 27.0 * 27.0);
        EXPECT_EQ(rep.certified_constant, C);
    }
}

TEST(Geometry, CoverSoundness) {
    CounterRng rng(9, 9);
    for (auto [n, m] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{2, 2}}) {
        IVec a(n);
        for (int i = 0; i < n; ++i) a[i] = i + 2;
        double h = double(sup_norm(a)), aa = 0.0;
        for (auto v : a) aa += double(v * v);
        double psi = std::pow(h, -2.0);
        Neighborhood nb{{a, IVec(m, 1), std::vector<double>(m, 0.0), ResonantPlane::Kind::Linear},
                        psi / std::sqrt(aa)};
        auto rep = cover_neighborhood(nb, psi / h, true);
        EXPECT_TRUE(rep.within_bound);
        int found = 0;
        for (int t = 0; t < 200000 && found < 1000; ++t) {
            auto X = random_point(n, m, rng);
            if (!neighborhood_membership(X, nb)) continue;
            ++found;
            ASSERT_TRUE(cover_contains(rep, nb, X));
        }
        EXPECT_GT(found, 100);
    }
}

TEST(Geometry, RelevantShiftsExamples) {
    auto s = relevant_shifts({5}, {0.0}, 1e-3);
    EXPECT_EQ(s.ranges[0].first, 0);
    EXPECT_EQ(s.ranges[0].second, 5);
    EXPECT_LE(double(s.count()), s.certified_constant * 5.0);

    auto t = relevant_shifts({1, -1}, {0.0}, 0.01);
    EXPECT_EQ(t.ranges[0], (std::pair<std::int64_t, std::int64_t>{-1, 1}));

    auto z = relevant_shifts({3, 2}, {0.5}, 0.0);
    EXPECT_GE(z.count(), 0);
}

TEST(Geometry, RelevantShiftsAreExhaustive) {
    // every p realised by a hit at some sampled X lies in the enumerated range
    CounterRng rng(1, 7);
    const IVec a{4, -3};
    const double delta = 0.05;
    auto sr = relevant_shifts(a, {0.2}, delta);
    for (int t = 0; t < 20000; ++t) {
        double v = 4 * rng.uniform() - 3 * rng.uniform() - 0.2;
        auto p = std::int64_t(std::nearbyint(v));
        if (std::abs(v - double(p)) / 5.0 < delta) {
            EXPECT_GE(p, sr.ranges[0].first);
            EXPECT_LE(p, sr.ranges[0].second);
        }
    }
    EXPECT_LE(double(sr.count()), sr.certified_constant * 4.0);
}
