#pragma once

#include "mvp/common.hpp"
#include "mvp/schedules.hpp"

#include <optional>

namespace mvp {

enum class Interpolant { DI, DDBI };

std::string_view to_string(Interpolant i);
std::optional<Interpolant> parse_interpolant(std::string_view s);

struct DdbiNoiseConfig {
    double gamma = 1.0;
    double epsilon = 1e-3;
};

/// sigma_t^2 and its time derivative.
struct NoiseEval {
    double var = 0.0;
    double dvar = 0.0;
};

/// sigma^2 = t(1-t) gamma^2 + (alpha^2 + beta^2) eps. Throws if sigma^2 <= 0.
NoiseEval ddbi_noise(const ScheduleEval& s, const DdbiNoiseConfig& cfg);

struct BridgeSample {
    Vector x_t;
    double t = 0.0;
    Vector x0;
    Vector x1;
    std::optional<Vector> z;  // absent for DI
};

struct JointScoreTarget {
    Vector data_score;
    double time_score = 0.0;
};

/// Which form of the DDBI time target to use. UnitNoise is the default;
/// Printed keeps the ||z||^2 / sigma^2 quadratic term for comparison runs.
enum class DdbiTargetForm { UnitNoise, Printed };

BridgeSample sample_di(const ScheduleEval& s, const Vector& x0, const Vector& x1);
BridgeSample sample_ddbi(const ScheduleEval& s, const DdbiNoiseConfig& cfg, const Vector& x0,
                         const Vector& x1, const Vector& z);

JointScoreTarget di_targets(const ScheduleEval& s, const Vector& x0, const Vector& x1, int d);
JointScoreTarget ddbi_targets(const ScheduleEval& s, const DdbiNoiseConfig& cfg,
                              const BridgeSample& sample, int d,
                              DdbiTargetForm form = DdbiTargetForm::UnitNoise);

/// Time score of the DI marginal when p0 = N(0,I) and p1 = N(0, sigma1_sq I).
double gaussian_marginal_time_score(const ScheduleEval& s, double sigma1_sq, const Vector& x);

/// Marginal time score for p0 = N(0,I), p1 = N(0,Sigma), optionally with DDBI
/// bridge noise. Works in the eigenbasis of Sigma.
class GaussianMarginal {
public:
    explicit GaussianMarginal(const Eigen::MatrixXd& sigma);

    int dim() const { return static_cast<int>(lambda_.size()); }

    /// noise may be {0,0} for DI.
    double time_score(const ScheduleEval& s, const NoiseEval& noise, const Vector& x) const;
    /// Rows of x evaluated at one shared time.
    void time_score(const ScheduleEval& s, const NoiseEval& noise, const Samples& x,
                    Eigen::Ref<Vector> out) const;
    double log_pdf_ratio(const Vector& x) const;  // log N(x;0,Sigma) - log N(x;0,I)

private:
    Vector lambda_;
    Eigen::MatrixXd basis_;
};

}  // namespace mvp
