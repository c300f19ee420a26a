#include "mvp/time_sampler.hpp"

#include "mvp/io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvp {

std::vector<double> sampler_grid(int bins, double t_clamp) {
    if (bins < 1) throw std::invalid_argument("time sampler: need at least one bin");
    const double width = (1.0 - 2.0 * t_clamp) / bins;
    std::vector<double> grid(bins);
    for (int i = 0; i < bins; ++i) grid[i] = t_clamp + (i + 0.5) * width;
    return grid;
}

TimeSamplerTable table_from_variances(std::vector<double> grid, const std::vector<double>& variances,
                                      double eps_w) {
    if (grid.empty() || grid.size() != variances.size())
        throw std::invalid_argument("time sampler: grid and variances must have equal non-zero length");
    if (eps_w < 0.0) throw std::invalid_argument("time sampler: eps_w must be non-negative");
    TimeSamplerTable table;
    const std::size_t B = grid.size();
    table.bin_width = B > 1 ? grid[1] - grid[0] : 1.0 - 2.0 * grid[0];
    table.grid = std::move(grid);
    table.weights.resize(B);
    double total = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        if (!std::isfinite(variances[i]) || variances[i] < 0.0)
            throw std::domain_error("time sampler: non-finite variance on the grid");
        table.weights[i] = 1.0 / (variances[i] + eps_w);
        total += table.weights[i];
    }
    if (!std::isfinite(total) || total <= 0.0) throw std::domain_error("time sampler: degenerate weights");
    table.probs.resize(B);
    table.cdf.resize(B);
    double acc = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        table.probs[i] = table.weights[i] / total;
        acc += table.probs[i];
        table.cdf[i] = acc;
    }
    table.cdf.back() = 1.0;
    return table;
}

TimeSamplerTable build_table(const PathSchedule& path, const VarianceConfig& cfg,
                             const DataMoments& m, double eps_w, int bins) {
    if (!(eps_w > 0.0)) throw std::invalid_argument("time sampler: eps_w must be positive");
    auto grid = sampler_grid(bins, cfg.t_clamp);
    std::vector<double> var(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) var[i] = variance_integrand(eval_path(path, grid[i]), cfg, m);
    return table_from_variances(std::move(grid), var, eps_w);
}

int sample_bin(const TimeSamplerTable& table, double u) {
    const auto it = std::upper_bound(table.cdf.begin(), table.cdf.end(), u);
    const auto idx = static_cast<int>(it - table.cdf.begin());
    return std::min(idx, table.bins() - 1);
}

double sample_t(const TimeSamplerTable& table, double u, double jitter) {
    const int i = sample_bin(table, u);
    if (jitter < 0.0) return table.grid[i];
    return table.grid[i] + (jitter - 0.5) * table.bin_width;
}

void write_table_csv(const TimeSamplerTable& table, const std::filesystem::path& path) {
    CsvWriter csv(path, {"t", "weight", "probability"});
    for (int i = 0; i < table.bins(); ++i) csv.row({table.grid[i], table.weights[i], table.probs[i]});
}

}  // namespace mvp
