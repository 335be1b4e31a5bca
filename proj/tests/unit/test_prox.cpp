#include "../support/oracles.hpp"

#include <augconex/prox.hpp>

#include <gtest/gtest.h>

using namespace augconex;
using namespace testing_support;

TEST(PositivePart, Examples) {
    EXPECT_EQ(positive_part(Vec{{-1.0, 2.0}}), (Vec{{0.0, 2.0}}));
    EXPECT_EQ(positive_part(Vec{{-1.0, -3.0, -0.5}}), Vec::Zero(3));
    EXPECT_EQ(negative_part(Vec{{-1.0, 2.0}}), (Vec{{-1.0, 0.0}}));
}

TEST(PositivePart, SplitsVectorExactly) {
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        const Vec a = normal_vec(rng, 7);
        EXPECT_EQ(positive_part(a) + negative_part(a), a);
        EXPECT_EQ(positive_part(a).dot(negative_part(a)), 0.0);
    }
}

TEST(PositivePart, Nonexpansive) {
    Rng rng(2);
    for (int t = 0; t < 2000; ++t) {
        const Index n = 1 + Index(rng() % 8);
        const Vec a = normal_vec(rng, n, 3), b = normal_vec(rng, n, 3);
        EXPECT_LE((positive_part(a) - positive_part(b)).norm(), (a - b).norm() * (1 + 1e-15));
    }
}

TEST(ProjectBall, InteriorUnchanged) {
    const Vec x{{0.1, -0.2}};
    EXPECT_EQ(project_l2_ball(x, 1), x);
}

TEST(ProjectBall, Rescale) {
    const Vec p = project_l2_ball(Vec{{3.0, 4.0}}, 1);
    EXPECT_NEAR(p[0], 0.6, 1e-15);
    EXPECT_NEAR(p[1], 0.8, 1e-15);
}

TEST(ProjectBall, OutputInsideForRandomInputs) {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        const double r = uniform(rng, 0.01, 5);
        EXPECT_LE(project_l2_ball(normal_vec(rng, 6, 10), r).norm(), r * (1 + 1e-14));
    }
}

TEST(ProjectBall, RejectsNonpositiveRadius) {
    EXPECT_THROW(project_l2_ball(Vec::Ones(2), 0), InvalidInput);
}

TEST(SoftThreshold, ShrinkAndKill) {
    EXPECT_EQ(soft_threshold(Vec{{3.0, -0.5}}, 1), (Vec{{2.0, 0.0}}));
}

TEST(SoftThreshold, ZeroWeightIsIdentity) {
    const Vec x{{3.0, -0.5, 0.0}};
    EXPECT_EQ(soft_threshold(x, 0), x);
}

TEST(SoftThreshold, MatchesScalarGridSearch) {
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        const double u = uniform(rng, -5, 5), lam = uniform(rng, 0, 3);
        EXPECT_NEAR(soft_threshold(Vec::Constant(1, u), lam)[0], grid_soft_threshold(u, lam), 1e-6)
            << "u=" << u << " lambda=" << lam;
    }
}

TEST(SoftThreshold, RejectsNegativeWeight) {
    EXPECT_THROW(soft_threshold(Vec::Ones(2), -1), InvalidInput);
}

TEST(ProxL1Ball, InteriorCase) {
    EXPECT_EQ(prox_l1_over_ball(Vec{{3.0, 0.0}}, 1, 10), (Vec{{2.0, 0.0}}));
}

TEST(ProxL1Ball, BoundaryCaseMatchesOracle) {
    const Vec c{{3.0, 0.0}};
    const Vec out = prox_l1_over_ball(c, 1, 1);
    EXPECT_NEAR(out[0], 1.0, 1e-12);
    EXPECT_EQ(out[1], 0.0);
    EXPECT_LE((out - l1_ball_oracle(c, 1, 1)).norm(), 1e-8);
}

TEST(ProxL1Ball, MatchesIndependentSolverOnRandomInputs) {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        const Index n = 1 + Index(rng() % 6);
        const Vec c = normal_vec(rng, n, 3);
        const double lam = uniform(rng, 0, 2), D = uniform(rng, 0.1, 4);
        const Vec out = prox_l1_over_ball(c, lam, D);
        EXPECT_LE((out - l1_ball_oracle(c, lam, D)).norm(), 1e-6);
        EXPECT_LE(l1_ball_kkt_residual(out, c, lam, D), 1e-6);
    }
}

TEST(ProxL1Ball, StaysInBall) {
    Rng rng(6);
    for (int t = 0; t < 1000; ++t) {
        const double D = uniform(rng, 1e-3, 5);
        EXPECT_LE(prox_l1_over_ball(normal_vec(rng, 5, 10), uniform(rng, 0, 1), D).norm(), D + 1e-12);
    }
}

TEST(ProxL1Ball, ScalingConsistency) {
    Rng rng(7);
    for (int t = 0; t < 500; ++t) {
        const Vec c = normal_vec(rng, 5, 3);
        const double lam = uniform(rng, 0, 2), D = uniform(rng, 0.1, 4), s = uniform(rng, 0.1, 10);
        const Vec lhs = prox_l1_over_ball(s * c, s * lam, s * D);
        const Vec rhs = s * prox_l1_over_ball(c, lam, D);
        EXPECT_LE((lhs - rhs).norm(), 1e-12 * (1 + rhs.norm()));
    }
}

TEST(CompositeProx, FixedPointAtInteriorMinimizer) {
    const Vec center{{0.3, -0.4}};
    const ProxRequest req{Vec::Zero(0), Vec::Zero(2), center, 2.0};
    EXPECT_EQ(composite_prox(CompositeTerms{}, BallDomain{1}, req), center);
}

TEST(CompositeProx, NoL1IsProjectedStep) {
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const Vec center = point_in_ball(rng, 4, 2), v = normal_vec(rng, 4, 5);
        const double L = uniform(rng, 0.1, 10);
        const Vec out = composite_prox(CompositeTerms{}, BallDomain{2}, {Vec::Zero(0), v, center, L});
        EXPECT_LE((out - project_l2_ball(center - v / L, 2)).norm(), 1e-14);
    }
}

TEST(CompositeProx, OptimalityResidual) {
    Rng rng(9);
    for (int t = 0; t < 200; ++t) {
        const Vec center = point_in_ball(rng, 5, 3), v = normal_vec(rng, 5, 4);
        const double L = uniform(rng, 0.1, 10), lam = uniform(rng, 0, 3), D = 3;
        const Vec x = composite_prox(CompositeTerms{lam, true}, BallDomain{D}, {Vec::Zero(0), v, center, L});
        // v + L (x - center) + lam d|x|_1 + N(x) contains 0; rescale by 1/L
        EXPECT_LE(l1_ball_kkt_residual(x, center - v / L, lam / L, D), 1e-6);
    }
}

TEST(CompositeProx, NonexpansiveInCenter) {
    Rng rng(10);
    for (int t = 0; t < 1000; ++t) {
        const Vec v = normal_vec(rng, 4);
        const double L = uniform(rng, 0.5, 5), lam = uniform(rng, 0, 1);
        const Vec c1 = normal_vec(rng, 4, 3), c2 = normal_vec(rng, 4, 3);
        const CompositeTerms terms{lam, true};
        const Vec p1 = composite_prox(terms, BallDomain{2}, {Vec::Zero(0), v, c1, L});
        const Vec p2 = composite_prox(terms, BallDomain{2}, {Vec::Zero(0), v, c2, L});
        EXPECT_LE((p1 - p2).norm(), (c1 - c2).norm() * (1 + 1e-12));
    }
}

TEST(CompositeProx, RejectsNonzeroConstraintTerms) {
    const ProxRequest req{Vec::Zero(1), Vec::Zero(2), Vec::Zero(2), 1.0};
    EXPECT_THROW(composite_prox(CompositeTerms{0, false}, BallDomain{1}, req), UnsupportedProblem);
}
