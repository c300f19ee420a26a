#include "mvp/path_variance.hpp"
#include "mvp/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace mvp;

namespace {

VarianceConfig di_cfg() {
    VarianceConfig c;
    c.interpolant = Interpolant::DI;
    return c;
}

Samples normal_samples(Rng& rng, Eigen::Index n, int d, double scale = 1.0) {
    Samples x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = scale * rng.normal();
    return x;
}

PathSchedule fixed(FixedSchedule::Kind k) {
    FixedSchedule s;
    s.kind = k;
    return s;
}

// p0 = N(0, I_2), p1 = N(0, 4 I_2)
const DataMoments kScaleTask{2, 2.0, 8.0, 0.0};

}  // namespace

TEST(Moments, Examples) {
    Rng rng(7);
    auto x0 = normal_samples(rng, 100000, 3);
    Samples zeros = Samples::Zero(100000, 3);
    auto m0 = estimate_moments(x0, zeros);
    EXPECT_EQ(m0.c1, 0.0);
    EXPECT_EQ(m0.d, 3);
    // Var ||x||^2 = 2d
    EXPECT_LE(std::abs(m0.c0 - 3.0), 4 * std::sqrt(6.0 / 1e5));
    auto x1 = normal_samples(rng, 100000, 3);
    auto m = estimate_moments(x0, x1);
    EXPECT_LE(std::abs(m.c01), 4 * std::sqrt(3.0 / 1e5));
    EXPECT_LE(std::abs(m.c01), std::sqrt(m.c0 * m.c1));
    EXPECT_THROW(estimate_moments(Samples(0, 3), x1), std::invalid_argument);
}

TEST(Integrands, Examples) {
    auto trig = eval_fixed(FixedSchedule::trigonometric(), 0.5);
    EXPECT_NEAR(vdi_integrand(trig, {1, 0, 1, 0}), 7.4022033008170185, 1e-12);
    EXPECT_NEAR(vdi_integrand(trig, {1, 0, 1, 0}), 3 * std::numbers::pi * std::numbers::pi / 4, 1e-12);
    EXPECT_EQ(vdi_integrand({0.4, 0.7, 0.3, 0.0, 0.0}, {3, 1, 1, 0}), 0.0);

    // alpha^2+beta^2 = 1 at t=0.5 with unit velocities
    const double r = std::sqrt(0.5);
    ScheduleEval s{0.5, r, r, -1.0, 1.0};
    EXPECT_NEAR(vddbi_integrand(s, {1.0, 0.0}, {5, 1, 1, 0}), 8.0, 1e-12);
    EXPECT_EQ(vddbi_integrand(s, {1.0, 0.0}, {5, 0, 0, 0}), 0.0);
}

TEST(Integrands, DiDivergesAtEnd) {
    for (double delta : {1e-2, 1e-3, 1e-4}) {
        auto s = eval_fixed(FixedSchedule::linear(), 1 - delta);
        EXPECT_NEAR(vdi_integrand(s, {2, 2, 0, 0}), 4 / (delta * delta), 1e-6 * 4 / (delta * delta));
    }
}

TEST(Integrands, NonNegative) {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        KmmLatentParams l;
        const int K = rng.integer(1, 6);
        for (int k = 0; k < K; ++k) {
            l.w_hat.push_back(rng.uniform(-3, 3));
            l.a_hat.push_back(rng.uniform(-2, 3));
            l.b_hat.push_back(rng.uniform(-2, 3));
        }
        const double c0 = rng.uniform(0, 5), c1 = rng.uniform(0, 5);
        const DataMoments m{rng.integer(1, 6), c0, c1, rng.uniform(-1, 1) * std::sqrt(c0 * c1)};
        for (auto kind : {Constraint::Affine, Constraint::Spherical})
            for (double t : {1e-5, 0.01, 0.3, 0.5, 0.8, 0.99, 1 - 1e-5}) {
                auto s = eval_kmm_schedule(l, kind, t);
                EXPECT_GE(vdi_integrand(s, m), 0.0);
                EXPECT_GE(vddbi_integrand(s, {}, m), 0.0);
            }
    }
}

TEST(PathVariance, GridConvergenceForSmoothIntegrand) {
    // wide noise floor => no boundary layer. Only linear and trig have bounded
    // derivatives; the other spherical paths have |dbeta| ~ t^-1/2 at t=0.
    VarianceConfig c;
    c.noise = {1.0, 0.1};
    for (auto k : {FixedSchedule::Kind::Linear, FixedSchedule::Kind::Trigonometric}) {
        c.grid_points = 1000;
        const double v1 = path_variance(fixed(k), c, kScaleTask);
        c.grid_points = 2000;
        const double v2 = path_variance(fixed(k), c, kScaleTask);
        EXPECT_LT(std::abs(v2 - v1), 1e-3 * v1) << to_string(k);
    }
}

TEST(PathVariance, DiLinearDivergesWithClamp) {
    auto c = di_cfg();
    c.t_clamp = 1e-3;
    const double a = path_variance(fixed(FixedSchedule::Kind::Linear), c, kScaleTask);
    c.t_clamp = 1e-2;
    const double b = path_variance(fixed(FixedSchedule::Kind::Linear), c, kScaleTask);
    EXPECT_GE(a, 10 * b);
}

TEST(PathVariance, UniformKmmEqualsLinear) {
    KmmPath uniform{{{0.0}, {inverse_softplus(1.0)}, {inverse_softplus(1.0)}}, Constraint::Affine};
    for (auto interp : {Interpolant::DI, Interpolant::DDBI}) {
        VarianceConfig c;
        c.interpolant = interp;
        EXPECT_EQ(path_variance(uniform, c, kScaleTask), path_variance(fixed(FixedSchedule::Kind::Linear), c, kScaleTask));
    }
}

TEST(PathVariance, MonteCarloAgreesWithGrid) {
    VarianceConfig c;
    c.noise = {1.0, 0.1};
    const double grid = path_variance(fixed(FixedSchedule::Kind::Trigonometric), c, kScaleTask);
    c.monte_carlo = true;
    c.mc_samples = 200000;
    c.mc_seed = 4;
    const double mc = path_variance(fixed(FixedSchedule::Kind::Trigonometric), c, kScaleTask);
    EXPECT_NEAR(mc, grid, 0.02 * grid);
    EXPECT_EQ(mc, path_variance(fixed(FixedSchedule::Kind::Trigonometric), c, kScaleTask));
}

TEST(PathVariance, GridRejectsTooFewPoints) {
    VarianceConfig c;
    c.grid_points = 15;
    EXPECT_THROW(path_variance(fixed(FixedSchedule::Kind::Linear), c, kScaleTask), std::invalid_argument);
}

TEST(PathGradient, RichardsonCheck) {
    VarianceConfig c;
    KmmPath p{init_diverse(3), Constraint::Spherical};
    const auto g1 = path_variance_gradient(p, c, kScaleTask, 1e-4);
    const auto g2 = path_variance_gradient(p, c, kScaleTask, 2e-4);
    double norm = 0.0;
    for (double g : g1) norm = std::max(norm, std::abs(g));
    for (std::size_t i = 0; i < g1.size(); ++i)
        EXPECT_LE(std::abs(g1[i] - g2[i]), 1e-3 * std::max(std::abs(g1[i]), 1e-6 * norm)) << i;
}

TEST(Optimize, DegenerateObjectiveIsFixedPoint) {
    // d=0, c1=0: DI variance is identically zero, so no step can improve it
    const DataMoments flat{0, 0.0, 0.0, 0.0};
    KmmPath p{init_diverse(3), Constraint::Spherical};
    auto r = optimize_path(p, di_cfg(), flat, {5, 10.0, 8, ""});
    EXPECT_EQ(r.path.latent, p.latent);
    EXPECT_EQ(r.final_variance, r.initial_variance);
    for (const auto& row : r.trace) EXPECT_EQ(row.lr, 0.0);
}

TEST(Optimize, BeatsEveryFixedSchedule) {
    VarianceConfig c;
    double best_fixed = INFINITY;
    for (auto k : kAllFixedKinds) best_fixed = std::min(best_fixed, path_variance(fixed(k), c, kScaleTask));
    for (auto constraint : {Constraint::Spherical, Constraint::Affine}) {
        auto r = optimize_path({init_diverse(5), constraint}, c, kScaleTask, {100, 10.0, 8, ""});
        EXPECT_LE(r.final_variance, best_fixed) << to_string(constraint);
        EXPECT_NEAR(r.final_variance, path_variance(r.path, c, kScaleTask), 1e-9 * r.final_variance);
    }
}

TEST(Optimize, DiPathStillReachesEndpoints) {
    // unconstrained, DI prefers b -> 0 (alpha == 1 everywhere, V == 0)
    auto r = optimize_path({init_diverse(5), Constraint::Spherical}, di_cfg(), {2, 2.0, 2.0, 0.0},
                           {200, 10.0, 8, ""});
    EXPECT_LT(r.final_variance, r.initial_variance);
    EXPECT_GT(r.final_variance, 0.0);
    EXPECT_GE(eval_path(r.path, kTimeEps).alpha, 1.0 - 1e-3);
    EXPECT_LE(eval_path(r.path, 1.0 - kTimeEps).alpha, 1e-3);
}

TEST(Optimize, TraceIsMonotoneAndWritten) {
    const auto dir = std::filesystem::temp_directory_path() / "mvp_test_opt";
    std::filesystem::create_directories(dir);
    const auto file = dir / "trace.csv";
    auto r = optimize_path({init_diverse(4), Constraint::Spherical}, VarianceConfig{}, kScaleTask,
                           {20, 10.0, 8, file.string()});
    ASSERT_EQ(r.trace.size(), 20u);
    double prev = r.initial_variance;
    for (const auto& row : r.trace) {
        EXPECT_LE(row.variance, prev);
        prev = row.variance;
    }
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,variance,lr");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 21);
    std::filesystem::remove_all(dir);
}

TEST(Optimize, RejectsNonFiniteStart) {
    const DataMoments bad{2, NAN, 1.0, 0.0};
    EXPECT_THROW(optimize_path({init_diverse(2), Constraint::Spherical}, VarianceConfig{}, bad, {1, 10.0, 8, ""}),
                 std::domain_error);
    EXPECT_THROW(optimize_path({init_diverse(2), Constraint::Spherical}, VarianceConfig{}, kScaleTask, {0, 10.0, 8, ""}),
                 std::invalid_argument);
}

TEST(FixedRanking, DiDivergesDdbiStable) {
    // DI: every schedule blows up by >= 10x when the clamp shrinks 10x
    auto c = di_cfg();
    for (auto k : kAllFixedKinds) {
        c.t_clamp = 1e-3;
        const double coarse = path_variance(fixed(k), c, kScaleTask);
        c.t_clamp = 1e-4;
        const double fine = path_variance(fixed(k), c, kScaleTask);
        if (k == FixedSchedule::Kind::VP) {
            // VP never drives alpha to zero, so its DI variance stays finite
            EXPECT_LT(fine, 2 * coarse);
        } else {
            EXPECT_GE(fine, 10 * coarse) << to_string(k);
        }
    }
}
