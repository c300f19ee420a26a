#pragma once

#include "mvp/path_variance.hpp"

#include <filesystem>
#include <vector>

namespace mvp {

/// Categorical distribution over equal-width bins of the clamped interval,
/// p_i proportional to 1 / (variance_i + eps_w).
struct TimeSamplerTable {
    std::vector<double> grid;  // bin midpoints
    std::vector<double> weights;
    std::vector<double> probs;
    std::vector<double> cdf;
    double bin_width = 0.0;

    int bins() const { return static_cast<int>(grid.size()); }
};

/// Midpoints of `bins` equal-width bins on [t_clamp, 1 - t_clamp].
std::vector<double> sampler_grid(int bins, double t_clamp = kTimeEps);

/// Builds the table from precomputed variances on `grid`. eps_w may be 0 here.
TimeSamplerTable table_from_variances(std::vector<double> grid, const std::vector<double>& variances,
                                      double eps_w);

/// Variances are the path-variance integrand at the bin midpoints.
TimeSamplerTable build_table(const PathSchedule& path, const VarianceConfig& cfg,
                             const DataMoments& m, double eps_w = 1e-2, int bins = 1000);

/// Inverse-CDF lookup. Returns the bin midpoint, or a point inside the bin
/// (offset by `jitter` in [0,1)) when jitter >= 0.
double sample_t(const TimeSamplerTable& table, double u, double jitter = -1.0);
int sample_bin(const TimeSamplerTable& table, double u);

void write_table_csv(const TimeSamplerTable& table, const std::filesystem::path& path);

}  // namespace mvp
