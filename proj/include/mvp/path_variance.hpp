#pragma once

#include "mvp/common.hpp"
#include "mvp/interpolants.hpp"
#include "mvp/path.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mvp {

struct DataMoments {
    int d = 0;
    double c0 = 0.0;   // E||x0||^2
    double c1 = 0.0;   // E||x1||^2
    double c01 = 0.0;  // E[x0 . x1]
};

struct VarianceConfig {
    Interpolant interpolant = Interpolant::DDBI;
    DdbiNoiseConfig noise;
    int grid_points = 1000;
    double t_clamp = kTimeEps;
    // Monte Carlo over uniform t instead of the trapezoid grid.
    bool monte_carlo = false;
    int mc_samples = 1000;
    std::uint64_t mc_seed = 0;
};

/// Sample means; rows are paired index-by-index for c01.
DataMoments estimate_moments(const Samples& x0, const Samples& x1);

double vdi_integrand(const ScheduleEval& s, const DataMoments& m);
double vddbi_integrand(const ScheduleEval& s, const DdbiNoiseConfig& cfg, const DataMoments& m);
double variance_integrand(const ScheduleEval& s, const VarianceConfig& cfg, const DataMoments& m);

/// Uniform grid on [t_clamp, 1 - t_clamp] with cfg.grid_points nodes.
std::vector<double> variance_grid(const VarianceConfig& cfg);

double path_variance(const PathSchedule& path, const VarianceConfig& cfg, const DataMoments& m);

/// Central-difference gradient of path_variance w.r.t. the flattened latent
/// vector, step h_i = h_scale * max(1, |theta_i|).
std::vector<double> path_variance_gradient(const KmmPath& path, const VarianceConfig& cfg,
                                           const DataMoments& m, double h_scale = 1e-4);

struct PathTraceRow {
    int step = 0;
    double variance = 0.0;
    double lr = 0.0;
};

struct OptimizeResult {
    KmmPath path;
    double initial_variance = 0.0;
    double final_variance = 0.0;
    std::vector<PathTraceRow> trace;
};

struct OptimizeOptions {
    int steps = 100;
    double lr = 10.0;
    int max_halvings = 8;
    std::string trace_path;  // CSV (step, variance, lr) when non-empty
};

/// Gradient descent with backtracking. A step is kept only when it lowers the
/// objective and the path still satisfies alpha(t_clamp) >= 1 - 1e-3 and
/// alpha(1 - t_clamp) <= 1e-3, so the returned variance never exceeds the
/// starting one.
OptimizeResult optimize_path(const KmmPath& start, const VarianceConfig& cfg, const DataMoments& m,
                             const OptimizeOptions& opt);

}  // namespace mvp
