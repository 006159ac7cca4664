#include "diolab/dimfun.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace diolab;

TEST(DimFun, EvalPowerLaw) {
    EXPECT_DOUBLE_EQ(eval(DimensionFunction::power(2.0), 0.5), 0.25);
    EXPECT_DOUBLE_EQ(eval(DimensionFunction::power(1.0), 0.125), 0.125);
}

TEST(DimFun, EvalPowerLogLaw) {
    const double r = std::exp(-2.0);
    EXPECT_NEAR(eval(DimensionFunction::power_log(1.0, 1.0), r), 2.0 * r, 1e-15);
    EXPECT_NEAR(eval(DimensionFunction::power_log(1.0, 1.0), r), 0.2707, 1e-4);
}

TEST(DimFun, EvalRejectsNonPositiveRadius) {
    EXPECT_THROW(eval(DimensionFunction::power(2.0), 0.0), DomainError);
    EXPECT_THROW(eval(DimensionFunction::power(2.0), -1.0), DomainError);
}

TEST(DimFun, QuotientSubtractsExponent) {
    auto g = derive_quotient(DimensionFunction::power(2.0), 1);
    EXPECT_EQ(g.kind(), DimensionFunction::Kind::PowerLaw);
    EXPECT_DOUBLE_EQ(g.s(), 1.0);

    auto h = derive_quotient(DimensionFunction::power_log(3.0, 2.0), 2);
    EXPECT_EQ(h.kind(), DimensionFunction::Kind::PowerLogLaw);
    EXPECT_DOUBLE_EQ(h.s(), 1.0);
    EXPECT_DOUBLE_EQ(h.k(), 2.0);
}

TEST(DimFun, QuotientWithoutDecayIsRejected) {
    EXPECT_THROW(derive_quotient(DimensionFunction::power(1.0), 1), NotADimensionFunction);
}

TEST(DimFun, QuotientOfTableMatchesPointwiseRatio) {
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i <= 60; ++i) {
        double r = std::ldexp(1.0, -15) * std::pow(2.0, i / 4.0);
        samples.emplace_back(r, r * r * r);
    }
    auto f = DimensionFunction::tabulated(samples);
    auto g = derive_quotient(f, 1);
    for (double r : {0.05, 0.123, 0.3, 0.47}) EXPECT_NEAR(g(r), f(r) / r, 1e-12) << r;
}

TEST(DimFun, MonotoneRatio) {
    EXPECT_EQ(check_monotone_ratio(DimensionFunction::power(3.0), 2, 100), Monotonicity::NonDecreasing);
    EXPECT_EQ(check_monotone_ratio(DimensionFunction::power(1.0), 2, 100), Monotonicity::NonIncreasing);
}

TEST(DimFun, MonotoneRatioOfTableMatchesDirectScan) {
    // r (2 + sin(1/r)) on a stretch where it is monotone
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i <= 200; ++i) {
        double r = 0.4 + 0.6 * i / 200.0;
        samples.emplace_back(r, r * (2.0 + std::sin(1.0 / r)));
    }
    auto f = DimensionFunction::tabulated(samples, 1.0);
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        double a = samples[i - 1].second / samples[i - 1].first, b = samples[i].second / samples[i].first;
        inc = inc && b >= a;
        dec = dec && b <= a;
    }
    Monotonicity scan = inc ? Monotonicity::NonDecreasing : dec ? Monotonicity::NonIncreasing : Monotonicity::NotMonotone;
    EXPECT_EQ(check_monotone_ratio(f, 1, 100), scan);
}

TEST(DimFun, BallTransform) {
    Ball b{{0.0}, 0.25, Norm::Supremum};
    EXPECT_DOUBLE_EQ(ball_transform(b, DimensionFunction::power(2.0), 1).radius, 0.0625);

    Ball c{{0.0, 0.0}, 0.01, Norm::Supremum};
    EXPECT_NEAR(ball_transform(c, DimensionFunction::power(1.0), 2).radius, 0.1, 1e-15);
}

TEST(DimFun, BallTransformByDimensionIsIdentity) {
    for (int m = 1; m <= 4; ++m)
        for (double r : {1e-9, 0.001, 0.1234, 0.5}) {
            Ball b{std::vector<double>(m, 0.3), r, Norm::Supremum};
            Ball t = ball_transform(b, DimensionFunction::power(double(m)), m);
            EXPECT_EQ(t.radius, r);
            EXPECT_EQ(t.center, b.center);
        }
}

TEST(DimFun, InvertIsInverse) {
    auto f = DimensionFunction::power_log(1.5, 1.0);
    for (double r : {1e-6, 1e-3, 0.05, 0.2}) EXPECT_NEAR(invert(f, f(r)) / r, 1.0, 1e-10) << r;
}

TEST(DimFun, RatioLimit) {
    EXPECT_EQ(ratio_limit(DimensionFunction::power(2.0), DimensionFunction::power(1.0)), RatioLimit::Zero);
    EXPECT_EQ(ratio_limit(DimensionFunction::power(1.0), DimensionFunction::power(2.0)), RatioLimit::Infinite);
    EXPECT_EQ(ratio_limit(DimensionFunction::power(2.0), DimensionFunction::power(2.0)), RatioLimit::Finite);
}

TEST(DimFun, GrammarRoundTrip) {
    for (std::string s : {"r^2", "r^1.75", "r^1.5*log^2"}) {
        auto f = parse_dimfun(s);
        auto g = parse_dimfun(to_string(f));
        EXPECT_EQ(g.kind(), f.kind());
        EXPECT_EQ(g.s(), f.s());
        EXPECT_EQ(g.k(), f.k());
    }
    EXPECT_EQ(parse_dimfun("r^1.75").s(), 1.75);
    EXPECT_THROW(parse_dimfun("banana"), std::invalid_argument);
}

TEST(DimFun, TableFromCsv) {
    auto path = std::filesystem::temp_directory_path() / "diolab_dimfun_table.csv";
    {
        std::ofstream out(path);
        out << "r,f\n0.0001,0.00000001\n0.1,0.01\n0.2,0.04\n0.5,0.25\n";
    }
    auto f = parse_dimfun("table:" + path.string());
    EXPECT_EQ(f.kind(), DimensionFunction::Kind::Tabulated);
    EXPECT_NEAR(f(0.2), 0.04, 1e-15);
    std::filesystem::remove(path);
}
