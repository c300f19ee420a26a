#include "mvp/training.hpp"

#include "mvp/io.hpp"
#include "mvp/time_sampler.hpp"

#include <cmath>
#include <numbers>

namespace mvp {

VarianceConfig variance_config(const TrainConfig& cfg) {
    VarianceConfig v;
    v.interpolant = cfg.interpolant;
    v.noise = cfg.noise;
    v.grid_points = cfg.variance_grid_points;
    v.t_clamp = cfg.variance_t_clamp;
    v.monte_carlo = cfg.variance_monte_carlo;
    v.mc_samples = cfg.variance_mc_samples;
    v.mc_seed = cfg.seed;
    return v;
}

DataMoments task_moments(const TaskSpec& task, Eigen::Index n, std::uint64_t seed) {
    Rng r0(seed, "moments.p0"), r1(seed, "moments.p1");
    return estimate_moments(task.sample_p0(n, r0), task.sample_p1(n, r1));
}

TrainingBatch make_batch(const TaskSpec& task, const PathSchedule& path, const TrainConfig& cfg,
                         const std::vector<double>& times, Rng& rng_p0, Rng& rng_p1, Rng& rng_z) {
    const auto n = static_cast<Eigen::Index>(times.size());
    const int d = task.dim;
    const Samples x0 = task.sample_p0(n, rng_p0);
    const Samples x1 = task.sample_p1(n, rng_p1);
    TrainingBatch b{Samples(n, d), Vector(n), Eigen::MatrixXd(n, d + 1)};
    Vector z(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ScheduleEval s = eval_path(path, times[i]);
        const Vector a = x0.row(i).transpose(), c = x1.row(i).transpose();
        JointScoreTarget target;
        BridgeSample sample;
        if (cfg.interpolant == Interpolant::DI) {
            sample = sample_di(s, a, c);
            target = di_targets(s, a, c, d);
        } else {
            for (int j = 0; j < d; ++j) z[j] = rng_z.normal();
            sample = sample_ddbi(s, cfg.noise, a, c, z);
            target = ddbi_targets(s, cfg.noise, sample, d, cfg.target_form);
        }
        b.x.row(i) = sample.x_t.transpose();
        b.t[i] = s.t;
        b.targets.row(i).head(d) = target.data_score.transpose();
        b.targets(i, d) = target.time_score;
    }
    return b;
}

TrainResult train(const TaskSpec& task, PathSchedule path, const TrainConfig& cfg) {
    if (cfg.batch_size < 1 || cfg.steps < 0 || !(cfg.lr > 0.0) || !(cfg.uwso_temperature > 0.0))
        throw std::invalid_argument("train: batch_size, lr and temperature must be positive");

    const VarianceConfig vcfg = variance_config(cfg);
    const DataMoments moments = task_moments(task, cfg.moment_samples, cfg.seed);
    auto* kmm = std::get_if<KmmPath>(&path);

    TrainResult res{JointScoreModel(MlpSpec{task.dim, cfg.hidden}, cfg.seed), path, moments, 0.0, 0.0, {}};
    res.initial_path_variance = path_variance(path, vcfg, moments);
    double variance = res.initial_path_variance;

    if (kmm && cfg.path_pretrain_steps > 0) {
        OptimizeOptions opt;
        opt.steps = cfg.path_pretrain_steps;
        opt.lr = cfg.path_lr;
        const auto r = optimize_path(*kmm, vcfg, moments, opt);
        *kmm = r.path;
        variance = r.final_variance;
    }
    TimeSamplerTable table = build_table(path, vcfg, moments, cfg.sampler_eps, cfg.sampler_bins);

    Rng rng_t(cfg.seed, "train.t"), rng_p0(cfg.seed, "train.p0"), rng_p1(cfg.seed, "train.p1"),
        rng_z(cfg.seed, "train.z");
    std::vector<double> times(cfg.batch_size);
    Vector grad;
    int bad_steps = 0;
    for (int step = 1; step <= cfg.steps; ++step) {
        if (kmm && cfg.path_update_every > 0 && step % cfg.path_update_every == 0) {
            OptimizeOptions opt;
            opt.steps = 1;
            opt.lr = cfg.path_lr;
            const auto r = optimize_path(*kmm, vcfg, moments, opt);
            if (r.final_variance < variance) {
                *kmm = r.path;
                variance = r.final_variance;
                table = build_table(path, vcfg, moments, cfg.sampler_eps, cfg.sampler_bins);
            }
        }
        for (double& t : times) {
            const double u = rng_t.uniform();
            t = sample_t(table, u, cfg.sampler_jitter ? rng_t.uniform() : -1.0);
        }
        const TrainingBatch batch = make_batch(task, path, cfg, times, rng_p0, rng_p1, rng_z);
        const double loss = res.model.loss(batch.x, batch.t, batch.targets, &grad);

        if (!std::isfinite(loss) || !grad.allFinite()) {
            if (++bad_steps >= 10) throw TrainingDiverged("training diverged: non-finite loss for 10 consecutive steps");
            res.trace.push_back({step, loss, variance, 0.0, 0.0});
            continue;
        }
        bad_steps = 0;
        double lr = cfg.lr;
        if (cfg.lr_decay == LrDecay::Cosine)
            lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * (step - 1) / std::max(1, cfg.steps)));
        res.model.adam_step(grad, lr);

        const auto lambda = uwso_weights({loss, variance}, cfg.uwso_temperature, cfg.uwso_eps);
        res.trace.push_back({step, loss, variance, lambda[0], lambda[1]});
    }
    res.path = path;
    res.final_path_variance = variance;
    return res;
}

void write_loss_trace(const std::vector<LossRow>& trace, const std::filesystem::path& path) {
    CsvWriter csv(path, {"step", "cjsm", "path_variance", "lambda1", "lambda2", "total"});
    for (const auto& r : trace)
        csv.row({static_cast<double>(r.step), r.cjsm, r.path_variance, r.lambda1, r.lambda2,
                 r.lambda1 * r.cjsm + r.lambda2 * r.path_variance});
}

}  // namespace mvp
