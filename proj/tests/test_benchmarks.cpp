#include "mvp/benchmarks.hpp"
#include "mvp/estimator.hpp"
#include "mvp/special.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace mvp;

namespace {

std::filesystem::path write_tmp(const std::string& name, const std::string& content) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
}

// E_{p1}[log r] by Monte Carlo with exact log-densities
MiEstimate mc_mi(const TaskSpec& task, Eigen::Index n, std::uint64_t seed, bool from_p0 = false) {
    Rng rng(seed);
    const Samples x = from_p0 ? task.sample_p0(n, rng) : task.sample_p1(n, rng);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = task.log_ratio(x.row(i).transpose());
    return mean_and_stderr(v);
}

// independent nested quadrature of the Gamma-Exponential MI
double gamma_exp_mi_quadrature(double rho) {
    boost::math::quadrature::exp_sinh<double> outer, inner;
    const double lg = std::lgamma(rho);
    auto fx = [&](double x) {
        if (x <= 0.0) return 0.0;
        const double px = std::exp((rho - 1) * std::log(x) - x - lg);
        if (px == 0.0) return 0.0;
        auto fy = [&](double y) {
            const double pyx = x * std::exp(-x * y);
            if (pyx == 0.0) return 0.0;
            return pyx * (std::log(x) - x * y - std::log(rho) + (rho + 1) * std::log1p(y));
        };
        return px * inner.integrate(fy, 1e-13);
    };
    return outer.integrate(fx, 1e-12);
}

}  // namespace

TEST(GaussianBlock, Oracles) {
    EXPECT_EQ(gaussian_block_task(2, 0.0).oracle_value, 0.0);
    EXPECT_NEAR(gaussian_block_task(2, 0.5).oracle_value, 0.14384103622589045, 1e-15);
    EXPECT_NEAR(gaussian_block_task(8, 0.5).oracle_value, 0.5753641449035618, 1e-14);
    EXPECT_THROW(gaussian_block_task(3, 0.5), std::invalid_argument);
    EXPECT_THROW(gaussian_block_task(2, 1.0), std::invalid_argument);
    auto t = gaussian_block_task(2, 0.5);
    EXPECT_TRUE(t.mi_task);
    EXPECT_EQ(t.interpolant, Interpolant::DDBI);
    ASSERT_TRUE(t.gaussian_sigma.has_value());
    EXPECT_EQ((*t.gaussian_sigma)(0, 1), 0.5);
}

TEST(MappedGaussian, Oracles) {
    for (auto make : {&edge_singular_task, &halfcube_task, &asinh_task}) {
        EXPECT_EQ(make(0.0).oracle_value, 0.0);
        EXPECT_NEAR(make(0.9).oracle_value, 0.8303656034108254, 1e-14);
        EXPECT_THROW(make(1.0), std::invalid_argument);
    }
}

TEST(MappedGaussian, HalfcubeRoundTrip) {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double z = 3 * rng.normal();
        EXPECT_NEAR(halfcube_inverse(halfcube(z)), z, 2e-15 * std::max(1.0, std::abs(z)));
    }
    EXPECT_EQ(halfcube(4.0), 8.0);
    EXPECT_EQ(halfcube(-4.0), -8.0);
    EXPECT_EQ(halfcube_inverse(-8.0), -4.0);
}

TEST(AnalyticOracles, ReproducedByMonteCarlo) {
    const TaskSpec tasks[] = {gaussian_block_task(2, 0.5), gaussian_block_task(8, 0.5), edge_singular_task(0.9),
                              halfcube_task(0.9),          asinh_task(0.9),             gamma_exponential_task(1.5)};
    std::uint64_t seed = 100;
    for (const auto& t : tasks) {
        ASSERT_EQ(t.oracle, OracleKind::AnalyticMI);
        auto e = mc_mi(t, 1000000, seed++);
        EXPECT_LE(std::abs(e.mi - t.oracle_value), 4 * e.std_err) << t.name << " " << e.mi;
    }
}

TEST(ProductSamples, ShuffleGivesMarginals) {
    // E_{p0}[log p1/p0] = -KL(p0 || p1) for the Gaussian block task
    auto t = gaussian_block_task(2, 0.5);
    auto e = mc_mi(t, 1000000, 7, true);
    const double kl = 0.5 * (2 / 0.75 - 2 + std::log(0.75));
    EXPECT_LE(std::abs(e.mi + kl), 4 * e.std_err);
    auto z = mc_mi(gaussian_block_task(2, 0.0), 100000, 8, true);
    EXPECT_EQ(z.mi, 0.0);
    // product samples keep the marginals but lose the correlation
    Rng rng(9);
    const Samples p0 = t.sample_p0(200000, rng);
    const double corr = (p0.col(0).array() * p0.col(1).array()).mean();
    EXPECT_LE(std::abs(corr), 4 / std::sqrt(200000.0));
}

TEST(Digamma, AgainstBoost) {
    EXPECT_NEAR(digamma(1.0), -kEulerGamma, 1e-15);
    EXPECT_NEAR(digamma(2.0), 0.422784335098467, 1e-14);
    for (double x : {1e-3, 0.1, 0.5, 1.0, 1.5, 2.5, 7.3, 9.99, 10.0, 42.0, 1e3, 1e6}) {
        const double ref = boost::math::digamma(x);
        EXPECT_NEAR(digamma(x), ref, 1e-12 * std::max(1.0, std::abs(ref))) << x;
    }
}

TEST(GammaExponential, Oracle) {
    EXPECT_NEAR(gamma_exponential_mi(1.0), 0.422784335098467, 1e-14);
    EXPECT_NEAR(gamma_exponential_mi(1.5), 0.297691532537079, 1e-14);
    EXPECT_NEAR(gamma_exponential_mi(1e3), 0.000499916666675237, 1e-15);
    EXPECT_NEAR(gamma_exponential_mi(1e3), 1 / 2e3, 1e-6);
    EXPECT_THROW(gamma_exponential_mi(0.0), std::invalid_argument);
    for (double rho : {1.0, 1.5}) EXPECT_NEAR(gamma_exp_mi_quadrature(rho), gamma_exponential_mi(rho), 1e-4);
}

TEST(AdditiveNoise, QuadratureOracle) {
    for (double eps : {0.01, 0.1, 0.25, 0.5}) {
        const double q = additive_noise_mi_quadrature(eps);
        EXPECT_GE(q, 0.0);
        EXPECT_NEAR(q, additive_noise_mi_exact(eps), 1e-4) << eps;
        EXPECT_NEAR(q, additive_noise_mi_quadrature_swapped(eps), 1e-4) << eps;
    }
    EXPECT_NEAR(additive_noise_mi_exact(0.25), 0.9431471805599453, 1e-15);
    // halving eps adds ~log 2 in the small-eps regime
    const double gap = additive_noise_mi_quadrature(0.01) - additive_noise_mi_quadrature(0.02);
    EXPECT_NEAR(gap, std::log(2.0), 0.011);
    EXPECT_THROW(additive_noise_task(0.6), std::invalid_argument);
    EXPECT_THROW(additive_noise_task(0.0), std::invalid_argument);
}

TEST(AdditiveNoise, MonteCarloMatchesOracle) {
    auto t = additive_noise_task(0.25);
    auto e = mc_mi(t, 1000000, 3);
    EXPECT_LE(std::abs(e.mi - t.oracle_value), 4 * e.std_err);
}

TEST(Toy2d, Names) {
    for (auto k : {Toy2d::Circles, Toy2d::Rings, Toy2d::Pinwheel, Toy2d::TwoSpirals, Toy2d::Checkerboard, Toy2d::Tree})
        EXPECT_EQ(parse_toy2d(to_string(k)), k);
    EXPECT_FALSE(parse_toy2d("moons").has_value());
}

TEST(Toy2d, SeedDeterministic) {
    for (auto k : {Toy2d::Circles, Toy2d::Rings, Toy2d::Pinwheel, Toy2d::TwoSpirals, Toy2d::Checkerboard, Toy2d::Tree}) {
        Rng a(5), b(5), c(6);
        const Samples x = toy2d_samples(k, 500, a);
        EXPECT_EQ(x, toy2d_samples(k, 500, b));
        EXPECT_NE(x, toy2d_samples(k, 500, c));
        EXPECT_TRUE(x.allFinite());
    }
}

TEST(Toy2d, CheckerboardParity) {
    Rng rng(1);
    const Samples x = toy2d_samples(Toy2d::Checkerboard, 100000, rng);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto cell = static_cast<long>(std::floor(x(i, 0) / 2) + std::floor(x(i, 1) / 2));
        ASSERT_EQ(cell % 2, 0) << x.row(i);
        ASSERT_LE(x.row(i).cwiseAbs().maxCoeff(), 4.0);
    }
}

TEST(Toy2d, RingsCentered) {
    Rng rng(2);
    const Samples x = toy2d_samples(Toy2d::Rings, 100000, rng);
    for (int c = 0; c < 2; ++c) {
        auto e = mean_and_stderr(x.col(c));
        EXPECT_LE(std::abs(e.mi), 4 * e.std_err);
    }
}

TEST(Toy2d, CirclesRadii) {
    Rng rng(3);
    const Samples x = toy2d_samples(Toy2d::Circles, 20000, rng);
    int inner = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) inner += x.row(i).norm() < 2.25;
    EXPECT_NEAR(inner / 20000.0, 0.5, 0.02);
}

TEST(Toy2d, TaskShape) {
    auto t = toy2d_task(Toy2d::Tree);
    EXPECT_EQ(t.dim, 2);
    EXPECT_EQ(t.oracle, OracleKind::None);
    EXPECT_EQ(t.interpolant, Interpolant::DI);
    Rng rng(4);
    const Samples x = t.sample_p1(5000, rng);
    EXPECT_GT(x.col(1).maxCoeff(), 0.0);
    EXPECT_GT(x.col(1).minCoeff(), -4.0);
}

TEST(Csv, RoundTrip) {
    auto p = write_tmp("mvp_ok.csv", "a,b\n1.5,-2\n0.1,3e-7\n1e300,0\n");
    std::vector<std::string> header;
    const Samples x = load_csv_matrix(p, &header);
    ASSERT_EQ(x.rows(), 3);
    ASSERT_EQ(x.cols(), 2);
    EXPECT_EQ(header, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(x(0, 0), 1.5);
    EXPECT_EQ(x(1, 0), 0.1);
    EXPECT_EQ(x(1, 1), 3e-7);
    EXPECT_EQ(x(2, 0), 1e300);
    std::filesystem::remove(p);
}

TEST(Csv, Standardize) {
    auto p = write_tmp("mvp_std.csv", "a,b\n1,100\n2,200.5\n3,301\n10,-4\n");
    auto task = load_tabular_csv(p, true);
    EXPECT_EQ(task.dim, 2);
    Samples x = load_csv_matrix(p);
    standardize_columns(x);
    for (int c = 0; c < 2; ++c) {
        EXPECT_LE(std::abs(x.col(c).mean()), 1e-10);
        EXPECT_NEAR(x.col(c).squaredNorm() / x.rows(), 1.0, 1e-10);
    }
    Rng rng(1);
    const Samples draw = task.sample_p1(50, rng);
    for (Eigen::Index i = 0; i < draw.rows(); ++i) {
        bool found = false;
        for (Eigen::Index j = 0; j < x.rows(); ++j) found |= draw.row(i) == x.row(j);
        EXPECT_TRUE(found);
    }
    std::filesystem::remove(p);
}

TEST(Csv, ErrorsCarryLocation) {
    auto p = write_tmp("mvp_bad.csv", "a,b,c\n1,2,3\n4,5,oops\n");
    try {
        load_csv_matrix(p);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2);
        EXPECT_EQ(e.col(), 3);
        EXPECT_NE(std::string(e.what()).find("row 2, col 3"), std::string::npos);
    }
    auto q = write_tmp("mvp_short.csv", "a,b\n1,2\n3\n");
    try {
        load_csv_matrix(q);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2);
    }
    EXPECT_THROW(load_csv_matrix(write_tmp("mvp_empty.csv", "a,b\n")), ParseError);
    EXPECT_THROW(load_csv_matrix("/nonexistent/file.csv"), std::runtime_error);
    std::filesystem::remove(p);
    std::filesystem::remove(q);
}

TEST(Preprocessing, KeepsOracleAndRatio) {
    auto raw = gamma_exponential_task(1.5);
    auto t = with_preprocessing(raw, Preprocess::LogStandardize, 1);
    EXPECT_EQ(t.oracle_value, raw.oracle_value);
    Rng rng(2);
    const Samples x = t.sample_p1(100000, rng);
    for (int c = 0; c < 2; ++c) {
        EXPECT_NEAR(x.col(c).mean(), 0.0, 0.02);
        EXPECT_NEAR(std::sqrt((x.col(c).array() - x.col(c).mean()).square().mean()), 1.0, 0.02);
    }
    auto e = mc_mi(t, 1000000, 3);
    EXPECT_LE(std::abs(e.mi - t.oracle_value), 4 * e.std_err);
    EXPECT_THROW(with_preprocessing(gaussian_block_task(2, 0.5), Preprocess::LogStandardize, 1),
                 std::invalid_argument);
    EXPECT_EQ(parse_preprocess("standardize"), Preprocess::Standardize);
}

TEST(Export, HeaderLine) {
    const auto p = std::filesystem::temp_directory_path() / "mvp_export.csv";
    export_task_samples(gaussian_block_task(2, 0.5), true, 5, 42, p);
    std::ifstream in(p);
    std::string first, second;
    std::getline(in, first);
    std::getline(in, second);
    EXPECT_EQ(first, "# task=gaussian_block seed=42 dim=2");
    EXPECT_EQ(second, "x0,x1");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 5);
    std::filesystem::remove(p);
}
