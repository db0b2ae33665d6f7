#include "oracles.hpp"

#include <schauder/dyadic_core.hpp>
#include <schauder/processes.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <limits>

using namespace schauder;

namespace {

SampledPath walk(int level, std::uint64_t seed, std::size_t dims = 1) {
    std::vector<std::vector<double>> comps;
    for (std::size_t k = 0; k < dims; ++k) comps.push_back(oracle::random_walk_bm(level, seed * 31 + k));
    return SampledPath::from_components(level, comps);
}

double max_abs_diff(const SampledPath& a, const SampledPath& b) { return (a - b).sup_norm(); }

}  // namespace

TEST(DyadicGrid, PointsAreTheDyadicRationals) {
    const DyadicGrid g(5);
    const auto pts = g.points();
    ASSERT_EQ(pts.size(), 33u);
    EXPECT_EQ(pts.front(), 0.0);
    EXPECT_EQ(pts.back(), 1.0);
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_EQ(pts[i] - pts[i - 1], 1.0 / 32.0);
    EXPECT_THROW(DyadicGrid(-1), IndexError);
}

TEST(DyadicTimes, Examples) {
    auto [a0, a1, a2] = dyadic_times(1, 2);
    EXPECT_EQ(a0, 0.5);
    EXPECT_EQ(a1, 0.75);
    EXPECT_EQ(a2, 1.0);
    auto [b0, b1, b2] = dyadic_times(0, 1);
    EXPECT_EQ(b0, 0.0);
    EXPECT_EQ(b1, 0.5);
    EXPECT_EQ(b2, 1.0);
    auto [c0, c1, c2] = dyadic_times(-1, 0);
    EXPECT_EQ(c0, 0.0);
    EXPECT_EQ(c1, 0.0);
    EXPECT_EQ(c2, 1.0);
    auto [d0, d1, d2] = dyadic_times(0, 0);
    EXPECT_EQ(d0, 0.0);
    EXPECT_EQ(d1, 1.0);
    EXPECT_EQ(d2, 1.0);
}

TEST(DyadicTimes, RejectsUnstoredIndices) {
    EXPECT_THROW((void)dyadic_times(1, 0), IndexError);
    EXPECT_THROW((void)dyadic_times(1, 3), IndexError);
    EXPECT_THROW((void)dyadic_times(-1, 1), IndexError);
    EXPECT_THROW((void)dyadic_times(-2, 0), IndexError);
}

TEST(SampledPath, RejectsNonFiniteSamples) {
    std::vector<double> v(9, 0.0);
    v[4] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(SampledPath(DyadicGrid(3), 1, v), ValidationError);
    EXPECT_THROW(SampledPath(DyadicGrid(3), 1, std::vector<double>(8, 0.0)), ShapeError);
}

TEST(Analyze, IdentityHasOnlyTheLinearSlot) {
    const auto c = analyze(SampledPath::from_scalar(4, [](double t) { return t; }));
    EXPECT_EQ(c.max_level(), 3);
    EXPECT_EQ(c.c_init()[0], 0.0);
    EXPECT_EQ(c.c_00()[0], 1.0);
    for (int p = 0; p <= c.max_level(); ++p)
        for (double x : c.level(p)) EXPECT_EQ(x, 0.0);
}

TEST(Analyze, ConstantHasOnlyTheInitialSlot) {
    const auto c = analyze(SampledPath::from_scalar(5, [](double) { return 3.0; }));
    EXPECT_EQ(c.c_init()[0], 3.0);
    EXPECT_EQ(c.c_00()[0], 0.0);
    for (int p = 0; p <= c.max_level(); ++p)
        for (double x : c.level(p)) EXPECT_EQ(x, 0.0);
}

TEST(Analyze, SingleTentHasUnitCoefficient) {
    const auto c = analyze(SampledPath::from_scalar(6, [](double t) { return oracle::tent(2, 1, t); }));
    for (int p = 0; p <= c.max_level(); ++p)
        for (std::size_t m = 1; m <= (std::size_t{1} << p); ++m) {
            EXPECT_DOUBLE_EQ(c.at(p, m)[0], (p == 2 && m == 1) ? 1.0 : 0.0) << p << "," << m;
        }
    EXPECT_EQ(c.c_init()[0], 0.0);
    EXPECT_EQ(c.c_00()[0], 0.0);
}

TEST(Analyze, LevelZeroPathHasOnlySpecialSlots) {
    const auto c = analyze(SampledPath::from_scalar(0, [](double t) { return 2.0 + 5.0 * t; }));
    EXPECT_EQ(c.max_level(), -1);
    EXPECT_EQ(c.c_init()[0], 2.0);
    EXPECT_EQ(c.c_00()[0], 5.0);
    EXPECT_THROW((void)c.level(0), IndexError);
}

TEST(Analyze, CoefficientIsSecondDifference) {
    const auto path = walk(7, 3);
    const auto c = analyze(path);
    for (int p = 0; p < 7; ++p)
        for (std::size_t m = 1; m <= (std::size_t{1} << p); ++m) {
            auto [t0, t1, t2] = dyadic_times(p, m);
            const auto i0 = static_cast<std::size_t>(std::ldexp(t0, 7));
            const auto i1 = static_cast<std::size_t>(std::ldexp(t1, 7));
            const auto i2 = static_cast<std::size_t>(std::ldexp(t2, 7));
            EXPECT_DOUBLE_EQ(c.at(p, m)[0], 2 * path(i1, 0) - path(i0, 0) - path(i2, 0));
        }
}

TEST(Synthesize, IdentityIsExact) {
    const auto c = analyze(SampledPath::from_scalar(6, [](double t) { return t; }));
    const auto s = synthesize(c, 6);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s(i, 0), s.time(i));
}

TEST(Synthesize, SingleCoefficientGivesHalfHeightTent) {
    SchauderCoefficients c(2, 1);
    c.at(0, 1)[0] = 1.0;
    const auto s = synthesize(c, 3);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_DOUBLE_EQ(s(i, 0), oracle::tent(0, 1, s.time(i)));
    EXPECT_DOUBLE_EQ(s(4, 0), 0.5);
    EXPECT_EQ(s(0, 0), 0.0);
    EXPECT_EQ(s(8, 0), 0.0);
}

TEST(Synthesize, RoundtripOnRandomPath) {
    const auto path = walk(10, 11, 2);
    const auto back = synthesize(analyze(path), 10);
    EXPECT_LE(max_abs_diff(path, back), 1e-12);
}

TEST(Synthesize, CoarseTargetIsRestriction) {
    const auto path = walk(9, 5);
    const auto back = synthesize(analyze(path), 4);
    EXPECT_LE(max_abs_diff(path.restrict_to(4), back), 1e-12);
}

TEST(Synthesize, PartialSumInterpolatesFiner) {
    const auto path = walk(8, 13);
    const auto c = analyze(path);
    for (int p = -1; p <= 7; ++p) {
        const auto s = partial_sum(c, p, 8);
        const auto interp = p == -1 ? initial_value_path(path) : interpolate_from(path, p + 1);
        EXPECT_LE(max_abs_diff(s, interp), 1e-12) << "p=" << p;
    }
}

TEST(Blocks, MinusOneIsInitialValue) {
    const auto path = walk(6, 2);
    const auto b = block(analyze(path), -1, 6);
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b(i, 0), path(0, 0));
}

TEST(Blocks, SumToSynthesis) {
    const auto path = walk(8, 4, 3);
    const auto c = analyze(path);
    SampledPath sum(path.grid(), 3);
    for (int p = -1; p <= c.max_level(); ++p) sum += block(c, p, 8);
    EXPECT_LE(max_abs_diff(sum, synthesize(c, 8)), 1e-12);
    EXPECT_THROW((void)block(c, 8, 8), IndexError);
    EXPECT_THROW((void)partial_sum(c, -2, 8), IndexError);
}

TEST(Blocks, SupNormBoundedByHolderNorm) {
    const double alpha = 0.45;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto path = brownian_path(12, 1, seed);
        const auto c = analyze(path);
        const double norm = holder_norm(c, alpha);
        for (int p = 1; p <= c.max_level(); ++p) {
            EXPECT_LE(block(c, p, 12).sup_norm(), 0.5 * std::exp2(-p * alpha) * norm * (1 + 1e-12));
        }
    }
}

TEST(HolderNorm, IdentityIsOne) {
    const auto c = analyze(SampledPath::from_scalar(8, [](double t) { return t; }));
    EXPECT_DOUBLE_EQ(holder_norm(c, 0.5), 1.0);
}

TEST(HolderNorm, ExactCancellation) {
    SchauderCoefficients c(10, 1);
    for (int p = 0; p <= 10; ++p)
        for (double& x : c.level(p)) x = std::exp2(-0.5 * p);
    EXPECT_NEAR(holder_norm(c, 0.5), 1.0, 1e-15);
}

TEST(HolderNorm, VectorCoefficientsUseEuclideanNorm) {
    SchauderCoefficients c(1, 2);
    c.at(1, 2)[0] = 3.0;
    c.at(1, 2)[1] = 4.0;
    EXPECT_DOUBLE_EQ(holder_norm(c, 1.0), 10.0);
}

TEST(HolderReport, BrownianExponent) {
    std::vector<double> est;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        est.push_back(holder_report(analyze(brownian_path(14, 1, seed))).estimated_alpha);
    }
    const double m = oracle::mean(est);
    std::printf("mean estimated alpha %.4f\n", m);
    EXPECT_GT(m, 0.4);
    EXPECT_LT(m, 0.6);
}

TEST(HolderReport, MonotoneInAlphaAndFiniteEstimate) {
    const auto c = analyze(walk(9, 21));
    const auto r = holder_report(c);
    ASSERT_EQ(r.weighted_sups.size(), r.alpha_grid.size());
    for (std::size_t i = 1; i < r.weighted_sups.size(); ++i) EXPECT_GE(r.weighted_sups[i], r.weighted_sups[i - 1]);
    EXPECT_EQ(r.per_level_max.size(), 9u);
    EXPECT_TRUE(std::isfinite(r.estimated_alpha));
}

TEST(HolderReport, TooFewLevelsGivesNaN) {
    const auto r = holder_report(analyze(walk(2, 1)));
    EXPECT_TRUE(std::isnan(r.estimated_alpha));
}

// Property: synthesize(analyze(f)) == f at every grid point.
TEST(Properties, RoundtripExactness) {
    for (int level = 1; level <= 12; ++level)
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto path = walk(level, seed + 100 * level, 1 + seed % 3);
            const auto back = synthesize(analyze(path), level);
            for (std::size_t i = 0; i < path.size(); ++i)
                for (std::size_t k = 0; k < path.dims(); ++k)
                    EXPECT_LE(std::abs(back(i, k) - path(i, k)), 1e-12 * std::max(1.0, std::abs(path(i, k))));
        }
}

TEST(Properties, AffineAnnihilation) {
    for (double a : {-2.0, 0.0, 0.7})
        for (double b : {-1.5, 3.25}) {
            const auto c = analyze(SampledPath::from_scalar(9, [&](double t) { return a + b * t; }));
            for (int p = 0; p <= c.max_level(); ++p)
                for (double x : c.level(p)) EXPECT_LE(std::abs(x), 1e-14);
        }
}

TEST(Properties, NormEquivalenceSandwich) {
    for (int level : {4, 6, 8})
        for (double alpha : {0.3, 0.5, 0.9})
            for (std::uint64_t seed = 0; seed < 4; ++seed) {
                const auto path = walk(level, seed + 7, 2);
                const double classical = oracle::classical_holder(path.values(), 2, level, alpha);
                EXPECT_LE(holder_norm(analyze(path), alpha), 2.0 * classical);
            }
}

TEST(Properties, TruncationDecay) {
    const double alpha = 0.4;
    const double bound = 0.5 * std::exp2(-alpha) / (1.0 - std::exp2(-alpha));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto path = brownian_path(12, 1, seed);
        const auto c = analyze(path);
        const double norm = holder_norm(c, alpha);
        for (int k = 0; k < c.max_level(); ++k) {
            const double err = (path - partial_sum(c, k, 12)).sup_norm();
            EXPECT_LE(err / (norm * std::exp2(-alpha * k)), bound) << "k=" << k;
        }
    }
}

TEST(Properties, Linearity) {
    const auto f = walk(8, 1, 2), g = walk(8, 2, 2);
    const double a = 1.75, b = -0.3;
    const auto cf = analyze(f), cg = analyze(g), cs = analyze(a * f + b * g);
    for (int p = 0; p <= cs.max_level(); ++p) {
        auto s = cs.level(p), x = cf.level(p), y = cg.level(p);
        for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], a * x[i] + b * y[i], 1e-12);
    }
    const auto sum = synthesize(cf, 8) + synthesize(cg, 8);
    EXPECT_LE(max_abs_diff(sum, f + g), 1e-12);
}
