#pragma once

#include "mvp/common.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mvp {

/// Network shape. Inputs are (x, t); t is expanded to (t, sin 2pi t, cos 2pi t),
/// so the first layer sees d + 3 features. Output is d data-score entries
/// followed by one time-score entry.
struct MlpSpec {
    int d = 2;
    std::vector<int> hidden{128, 128};

    int feature_dim() const { return d + 3; }
    int output_dim() const { return d + 1; }
    bool operator==(const MlpSpec&) const = default;
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class JointScoreModel {
public:
    /// Glorot-uniform hidden layers, zero output layer.
    JointScoreModel(MlpSpec spec, std::uint64_t seed);

    const MlpSpec& spec() const { return spec_; }
    int dim() const { return spec_.d; }
    Eigen::Index num_params() const { return params_.size(); }
    Vector& params() { return params_; }
    const Vector& params() const { return params_; }

    /// Batch forward: x is n x d, t has n entries. Returns n x (d+1).
    Eigen::MatrixXd forward(const Samples& x, const Vector& t) const;
    Vector forward(const Vector& x, double t) const;
    /// Time-score head only, all rows at one shared t.
    void time_score(const Samples& x, double t, Eigen::Ref<Vector> out) const;

    /// Mean over rows of the squared error summed over the d+1 outputs.
    /// Fills grad (same size as params) when non-null.
    double loss(const Samples& x, const Vector& t, const Eigen::MatrixXd& targets, Vector* grad) const;

    void adam_step(const Vector& grad, double lr);
    long adam_steps() const { return adam_t_; }
    AdamConfig& adam_config() { return adam_; }

    void save(const std::filesystem::path& path) const;
    static JointScoreModel load(const std::filesystem::path& path);

private:
    struct Layer {
        int in, out;
        Eigen::Index w_offset, b_offset;
    };

    Eigen::MatrixXd features(const Samples& x, const Vector& t) const;

    MlpSpec spec_;
    std::vector<Layer> layers_;
    Vector params_;
    Vector m_, v_;
    long adam_t_ = 0;
    AdamConfig adam_;
};

/// Soft optimal uncertainty weights exp(1/(T(L_j+eps))), normalized to sum 1.
std::vector<double> uwso_weights(const std::vector<double>& losses, double T = 2.0, double eps = 1e-8);

}  // namespace mvp
