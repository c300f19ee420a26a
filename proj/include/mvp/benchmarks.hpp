#pragma once

#include "mvp/common.hpp"
#include "mvp/interpolants.hpp"
#include "mvp/random.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mvp {

enum class OracleKind { None, AnalyticMI, NumericalMI, AnalyticLogRatio };

using Sampler = std::function<Samples(Eigen::Index n, Rng& rng)>;

struct TaskSpec {
    std::string name;
    int dim = 0;
    Sampler sample_p0;
    Sampler sample_p1;
    OracleKind oracle = OracleKind::None;
    double oracle_value = 0.0;                         // MI when AnalyticMI / NumericalMI
    std::function<double(const Vector&)> log_ratio;    // log p1(x) - log p0(x), when known
    std::optional<Eigen::MatrixXd> gaussian_sigma;     // set when p0 = N(0,I), p1 = N(0,Sigma)
    Interpolant interpolant = Interpolant::DDBI;       // protocol default for this task
    bool mi_task = false;                              // p0 = product of the joint's marginals

    bool has_mi_oracle() const {
        return oracle == OracleKind::AnalyticMI || oracle == OracleKind::NumericalMI;
    }
};

/// Joint vs product-of-marginals task: p1 draws from `joint`, p0 draws a fresh
/// joint batch and permutes the rows of columns [split, dim).
TaskSpec mi_task_from_joint(std::string name, int dim, int split, Sampler joint);

TaskSpec gaussian_block_task(int d, double rho);
/// p0 = N(0,I), p1 = N(0, sigma1_sq I).
TaskSpec gaussian_scale_task(int d, double sigma1_sq);
TaskSpec edge_singular_task(double rho);
TaskSpec halfcube_task(double rho);
TaskSpec asinh_task(double rho);
TaskSpec additive_noise_task(double eps);
TaskSpec gamma_exponential_task(double rho);

double halfcube(double z);
double halfcube_inverse(double y);

/// psi(rho + 1) - log(rho)
double gamma_exponential_mi(double rho);

/// Closed form eps - log(2 eps), valid for 0 < eps <= 0.5.
double additive_noise_mi_exact(double eps);
/// Composite Simpson over (x, n = y - x) on an n x n grid.
double additive_noise_mi_quadrature(double eps, int n = 2000);
/// Same integral with y outer and x inner; used to check the symmetry of the oracle.
double additive_noise_mi_quadrature_swapped(double eps, int n = 2000);

enum class Toy2d { Circles, Rings, Pinwheel, TwoSpirals, Checkerboard, Tree };

std::optional<Toy2d> parse_toy2d(std::string_view name);
std::string_view to_string(Toy2d t);
Samples toy2d_samples(Toy2d which, Eigen::Index n, Rng& rng);
/// p0 = N(0, I_2), p1 = the toy density; no oracle.
TaskSpec toy2d_task(Toy2d which);

/// Reads a numeric CSV with one header row. Errors carry 1-based data-row and
/// column numbers (the header is not counted).
Samples load_csv_matrix(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);
void standardize_columns(Samples& x);
/// p1 resamples rows of the table with replacement; p0 = N(0, I_d).
TaskSpec load_tabular_csv(const std::filesystem::path& path, bool standardize);

enum class Preprocess { None, Standardize, LogStandardize };
std::optional<Preprocess> parse_preprocess(std::string_view s);
std::string_view to_string(Preprocess p);

/// Wraps both samplers of an MI task in a fixed per-coordinate monotone map
/// (optional log, then a z-score fitted on a seeded pilot draw). Such maps leave
/// the mutual information unchanged, so the oracle is kept.
TaskSpec with_preprocessing(TaskSpec task, Preprocess kind, std::uint64_t seed, Eigen::Index pilot = 100000);

double standard_normal_log_pdf(const Vector& x);

/// Samples rows and writes them with a one-line '# task=... seed=... dim=...' header.
void export_task_samples(const TaskSpec& task, bool joint, Eigen::Index n, std::uint64_t seed,
                         const std::filesystem::path& path);

}  // namespace mvp
