#pragma once

#include "mvp/common.hpp"
#include "mvp/interpolants.hpp"
#include "mvp/path.hpp"
#include "mvp/score_model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace mvp {

enum class QuadratureRule { Trapezoid, PaperRiemann };

std::string_view to_string(QuadratureRule r);
std::optional<QuadratureRule> parse_rule(std::string_view s);

struct InferenceConfig {
    int steps = 1000;
    QuadratureRule rule = QuadratureRule::Trapezoid;
    Eigen::Index chunk = 4096;  // rows per batched score evaluation
};

/// Anything that can evaluate a time score for a batch of points at one time.
class TimeScoreFunction {
public:
    virtual ~TimeScoreFunction() = default;
    virtual int dim() const = 0;
    virtual void time_score(const Samples& x, double t, Eigen::Ref<Vector> out) const = 0;
};

class ModelTimeScore final : public TimeScoreFunction {
public:
    explicit ModelTimeScore(const JointScoreModel& model) : model_(model) {}
    int dim() const override { return model_.dim(); }
    void time_score(const Samples& x, double t, Eigen::Ref<Vector> out) const override {
        model_.time_score(x, t, out);
    }

private:
    const JointScoreModel& model_;
};

/// Exact marginal time score for p0 = N(0,I), p1 = N(0,Sigma) along a path.
class GaussianTimeScore final : public TimeScoreFunction {
public:
    GaussianTimeScore(const Eigen::MatrixXd& sigma, PathSchedule path, Interpolant interp,
                      DdbiNoiseConfig noise = {});
    int dim() const override { return marginal_.dim(); }
    void time_score(const Samples& x, double t, Eigen::Ref<Vector> out) const override;

private:
    GaussianMarginal marginal_;
    PathSchedule path_;
    Interpolant interp_;
    DdbiNoiseConfig noise_;
};

/// Per-point callback; for tests and small ad-hoc scores.
class FunctionTimeScore final : public TimeScoreFunction {
public:
    FunctionTimeScore(int d, std::function<double(const Vector&, double)> f) : d_(d), f_(std::move(f)) {}
    int dim() const override { return d_; }
    void time_score(const Samples& x, double t, Eigen::Ref<Vector> out) const override;

private:
    int d_;
    std::function<double(const Vector&, double)> f_;
};

/// Quadrature nodes t_i = clamp(i/I), i = 0..I, and their weights.
/// Trapezoid: (1/I)(1/2, 1, ..., 1, 1/2). PaperRiemann: 1/I for every node.
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};
Quadrature make_quadrature(const InferenceConfig& cfg);

Vector log_ratios(const TimeScoreFunction& f, const Samples& x, const InferenceConfig& cfg);
double log_ratio(const TimeScoreFunction& f, const Vector& x, const InferenceConfig& cfg);

struct MiEstimate {
    double mi = 0.0;
    double std_err = 0.0;
};
MiEstimate mean_and_stderr(const Vector& values);
MiEstimate estimate_mi(const TimeScoreFunction& f, const Samples& joint, const InferenceConfig& cfg);

/// log p(x) = log_ratio(x) + log p0(x).
double log_likelihood(const TimeScoreFunction& f, const Vector& x,
                      const std::function<double(const Vector&)>& base_log_pdf, const InferenceConfig& cfg);
Vector log_likelihoods(const TimeScoreFunction& f, const Samples& x,
                       const std::function<double(const Vector&)>& base_log_pdf, const InferenceConfig& cfg);

}  // namespace mvp
