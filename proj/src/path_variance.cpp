#include "mvp/path_variance.hpp"

#include "mvp/io.hpp"
#include "mvp/random.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace mvp {

DataMoments estimate_moments(const Samples& x0, const Samples& x1) {
    if (x0.rows() == 0 || x1.rows() == 0) throw std::invalid_argument("estimate_moments: empty sample set");
    if (x0.cols() != x1.cols()) throw std::invalid_argument("estimate_moments: dimension mismatch");
    DataMoments m;
    m.d = static_cast<int>(x0.cols());
    m.c0 = x0.rowwise().squaredNorm().mean();
    m.c1 = x1.rowwise().squaredNorm().mean();
    const Eigen::Index n = std::min(x0.rows(), x1.rows());
    m.c01 = (x0.topRows(n).array() * x1.topRows(n).array()).rowwise().sum().mean();
    return m;
}

double vdi_integrand(const ScheduleEval& s, const DataMoments& m) {
    const double a2 = s.alpha * s.alpha;
    return 2.0 * m.d * s.dalpha * s.dalpha / a2 + s.dbeta * s.dbeta * m.c1 / a2;
}

double vddbi_integrand(const ScheduleEval& s, const DdbiNoiseConfig& cfg, const DataMoments& m) {
    const NoiseEval n = ddbi_noise(s, cfg);
    const double ratio = n.dvar / n.var;
    const double drift = s.dalpha * s.dalpha * m.c0 + s.dbeta * s.dbeta * m.c1 +
                         2.0 * s.dalpha * s.dbeta * m.c01;
    return 0.5 * m.d * ratio * ratio + drift / n.var;
}

double variance_integrand(const ScheduleEval& s, const VarianceConfig& cfg, const DataMoments& m) {
    return cfg.interpolant == Interpolant::DI ? vdi_integrand(s, m) : vddbi_integrand(s, cfg.noise, m);
}

std::vector<double> variance_grid(const VarianceConfig& cfg) {
    if (cfg.grid_points < 16) throw std::invalid_argument("variance: grid_points must be >= 16");
    const double lo = cfg.t_clamp, hi = 1.0 - cfg.t_clamp;
    std::vector<double> grid(cfg.grid_points);
    const double step = (hi - lo) / (cfg.grid_points - 1);
    for (int i = 0; i < cfg.grid_points; ++i) grid[i] = lo + step * i;
    grid.back() = hi;
    return grid;
}

double path_variance(const PathSchedule& path, const VarianceConfig& cfg, const DataMoments& m) {
    if (cfg.monte_carlo) {
        Rng rng(cfg.mc_seed, "path_variance.mc");
        double sum = 0.0;
        const double lo = cfg.t_clamp, hi = 1.0 - cfg.t_clamp;
        for (int i = 0; i < cfg.mc_samples; ++i)
            sum += variance_integrand(eval_path(path, rng.uniform(lo, hi)), cfg, m);
        return sum / cfg.mc_samples * (hi - lo);
    }
    const auto grid = variance_grid(cfg);
    const double step = (grid.back() - grid.front()) / (grid.size() - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = (i == 0 || i + 1 == grid.size()) ? 0.5 : 1.0;
        sum += w * variance_integrand(eval_path(path, grid[i]), cfg, m);
    }
    return sum * step;
}

std::vector<double> path_variance_gradient(const KmmPath& path, const VarianceConfig& cfg,
                                           const DataMoments& m, double h_scale) {
    const auto theta = path.latent.flatten();
    std::vector<double> grad(theta.size());
    KmmPath probe = path;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double h = h_scale * std::max(1.0, std::abs(theta[i]));
        auto shifted = theta;
        shifted[i] = theta[i] + h;
        probe.latent = KmmLatentParams::unflatten(shifted);
        const double up = path_variance(probe, cfg, m);
        shifted[i] = theta[i] - h;
        probe.latent = KmmLatentParams::unflatten(shifted);
        const double down = path_variance(probe, cfg, m);
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

namespace {

// A KMM path is only guaranteed to reach both endpoints for well-shaped
// components. Under DI the variance is minimized by pushing b -> 0, which
// keeps alpha == 1 on the whole clamped interval (V == 0, never reaches p1),
// so candidates have to stay inside the boundary band.
bool reaches_endpoints(const KmmPath& path, double t_clamp) {
    return eval_path(path, t_clamp).alpha >= 1.0 - 1e-3 && eval_path(path, 1.0 - t_clamp).alpha <= 1e-3;
}

}  // namespace

OptimizeResult optimize_path(const KmmPath& start, const VarianceConfig& cfg, const DataMoments& m,
                             const OptimizeOptions& opt) {
    if (opt.steps < 1) throw std::invalid_argument("optimize_path: steps must be >= 1");
    OptimizeResult res;
    res.path = start;
    double current = path_variance(start, cfg, m);
    if (!std::isfinite(current)) throw std::domain_error("optimize_path: initial variance is not finite");
    res.initial_variance = current;

    std::unique_ptr<CsvWriter> trace;
    if (!opt.trace_path.empty()) {
        trace = std::make_unique<CsvWriter>(opt.trace_path, std::vector<std::string>{"step", "variance", "lr"});
        trace->row({0.0, current, 0.0});
    }

    for (int step = 1; step <= opt.steps; ++step) {
        const auto grad = path_variance_gradient(res.path, cfg, m);
        const auto theta = res.path.latent.flatten();
        // Descend on log V: the variance spans orders of magnitude across
        // tasks, and the relative gradient keeps one lr usable for all of them.
        const double scale = current > 0.0 ? current : 1.0;
        double lr = opt.lr;
        double accepted_lr = 0.0;
        for (int attempt = 0; attempt <= opt.max_halvings; ++attempt, lr *= 0.5) {
            auto cand = theta;
            for (std::size_t i = 0; i < cand.size(); ++i) cand[i] -= lr * grad[i] / scale;
            KmmPath trial{KmmLatentParams::unflatten(cand), res.path.constraint};
            double v;
            try {
                v = path_variance(trial, cfg, m);
            } catch (const std::domain_error&) {
                continue;
            }
            if (std::isfinite(v) && v < current && reaches_endpoints(trial, cfg.t_clamp)) {
                res.path = std::move(trial);
                current = v;
                accepted_lr = lr;
                break;
            }
        }
        res.trace.push_back({step, current, accepted_lr});
        if (trace) trace->row({static_cast<double>(step), current, accepted_lr});
    }
    res.final_variance = current;
    return res;
}

}  // namespace mvp
