#pragma once

#include "mvp/benchmarks.hpp"
#include "mvp/path.hpp"
#include "mvp/path_variance.hpp"
#include "mvp/score_model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace mvp {

enum class LrDecay { None, Cosine };

struct TrainConfig {
    int batch_size = 512;
    int steps = 5000;
    double lr = 1e-3;
    LrDecay lr_decay = LrDecay::Cosine;
    int path_update_every = 50;  // 0 disables the alternating path updates
    double uwso_temperature = 2.0;
    double uwso_eps = 1e-8;
    std::uint64_t seed = 0;
    std::vector<int> hidden{128, 128};

    Interpolant interpolant = Interpolant::DDBI;
    DdbiNoiseConfig noise;
    DdbiTargetForm target_form = DdbiTargetForm::UnitNoise;

    // Only used when the path is a KmmPath.
    int path_pretrain_steps = 200;
    double path_lr = 10.0;
    int variance_grid_points = 1000;
    double variance_t_clamp = kTimeEps;
    bool variance_monte_carlo = false;
    int variance_mc_samples = 1000;

    int sampler_bins = 1000;
    double sampler_eps = 1e-2;
    bool sampler_jitter = false;

    Eigen::Index moment_samples = 100000;
};

struct LossRow {
    int step = 0;
    double cjsm = 0.0;
    double path_variance = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

struct TrainResult {
    JointScoreModel model;
    PathSchedule path;
    DataMoments moments;
    double initial_path_variance = 0.0;
    double final_path_variance = 0.0;
    std::vector<LossRow> trace;
};

VarianceConfig variance_config(const TrainConfig& cfg);

/// Moments of p0 and p1 from independent seeded draws.
DataMoments task_moments(const TaskSpec& task, Eigen::Index n, std::uint64_t seed);

/// Builds one training batch of (x_t, t) and stacked [data score, time score]
/// targets for the given path. Exposed for tests.
struct TrainingBatch {
    Samples x;
    Vector t;
    Eigen::MatrixXd targets;
};
TrainingBatch make_batch(const TaskSpec& task, const PathSchedule& path, const TrainConfig& cfg,
                         const std::vector<double>& times, Rng& rng_p0, Rng& rng_p1, Rng& rng_z);

/// Alternating score/path training. Throws TrainingDiverged when the CJSM loss
/// is non-finite for 10 consecutive steps.
TrainResult train(const TaskSpec& task, PathSchedule path, const TrainConfig& cfg);

void write_loss_trace(const std::vector<LossRow>& trace, const std::filesystem::path& path);

}  // namespace mvp
