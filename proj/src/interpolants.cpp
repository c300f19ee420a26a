#include "mvp/interpolants.hpp"

#include <cmath>
#include <stdexcept>

namespace mvp {

std::string_view to_string(Interpolant i) { return i == Interpolant::DI ? "di" : "ddbi"; }

std::optional<Interpolant> parse_interpolant(std::string_view s) {
    if (s == "di") return Interpolant::DI;
    if (s == "ddbi") return Interpolant::DDBI;
    return std::nullopt;
}

NoiseEval ddbi_noise(const ScheduleEval& s, const DdbiNoiseConfig& cfg) {
    const double g2 = cfg.gamma * cfg.gamma;
    NoiseEval n;
    n.var = s.t * (1.0 - s.t) * g2 + (s.alpha * s.alpha + s.beta * s.beta) * cfg.epsilon;
    n.dvar = (1.0 - 2.0 * s.t) * g2 + 2.0 * (s.alpha * s.dalpha + s.beta * s.dbeta) * cfg.epsilon;
    if (!(n.var > 0.0))
        throw std::domain_error("ddbi: bridge variance is not positive (gamma = epsilon = 0?)");
    return n;
}

namespace {

void check_dims(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("interpolant: dimension mismatch");
}

}  // namespace

BridgeSample sample_di(const ScheduleEval& s, const Vector& x0, const Vector& x1) {
    check_dims(x0, x1);
    return {s.alpha * x0 + s.beta * x1, s.t, x0, x1, std::nullopt};
}

BridgeSample sample_ddbi(const ScheduleEval& s, const DdbiNoiseConfig& cfg, const Vector& x0,
                         const Vector& x1, const Vector& z) {
    check_dims(x0, x1);
    check_dims(x0, z);
    const double sigma = std::sqrt(ddbi_noise(s, cfg).var);
    return {s.alpha * x0 + s.beta * x1 + sigma * z, s.t, x0, x1, z};
}

JointScoreTarget di_targets(const ScheduleEval& s, const Vector& x0, const Vector& x1, int d) {
    check_dims(x0, x1);
    JointScoreTarget out;
    out.time_score = s.dalpha / s.alpha * (x0.squaredNorm() - d) + s.dbeta / s.alpha * x0.dot(x1);
    out.data_score = -x0 / s.alpha;
    return out;
}

JointScoreTarget ddbi_targets(const ScheduleEval& s, const DdbiNoiseConfig& cfg,
                              const BridgeSample& sample, int d, DdbiTargetForm form) {
    const NoiseEval n = ddbi_noise(s, cfg);
    const double sigma = std::sqrt(n.var);
    Vector z = sample.z ? *sample.z
                        : Vector((sample.x_t - s.alpha * sample.x0 - s.beta * sample.x1) / sigma);
    const double quad = form == DdbiTargetForm::UnitNoise ? z.squaredNorm() : z.squaredNorm() / n.var;
    JointScoreTarget out;
    out.time_score = n.dvar / (2.0 * n.var) * (quad - d) +
                     (s.dalpha * sample.x0 + s.dbeta * sample.x1).dot(z) / sigma;
    out.data_score = -z / sigma;
    return out;
}

double gaussian_marginal_time_score(const ScheduleEval& s, double sigma1_sq, const Vector& x) {
    const double v = s.alpha * s.alpha + s.beta * s.beta * sigma1_sq;
    if (!(v > 0.0)) throw std::domain_error("gaussian marginal: non-positive variance");
    const double dv = 2.0 * s.alpha * s.dalpha + 2.0 * s.beta * s.dbeta * sigma1_sq;
    const auto d = static_cast<double>(x.size());
    return dv / (2.0 * v) * (x.squaredNorm() / v - d);
}

GaussianMarginal::GaussianMarginal(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
        throw std::invalid_argument("gaussian marginal: covariance must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("gaussian marginal: covariance must be positive definite");
    lambda_ = eig.eigenvalues();
    basis_ = eig.eigenvectors();
}

double GaussianMarginal::time_score(const ScheduleEval& s, const NoiseEval& noise,
                                    const Vector& x) const {
    const Vector y = basis_.transpose() * x;
    double out = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double c = s.alpha * s.alpha + s.beta * s.beta * lambda_[i] + noise.var;
        const double dc = 2.0 * s.alpha * s.dalpha + 2.0 * s.beta * s.dbeta * lambda_[i] + noise.dvar;
        out += dc / (2.0 * c) * (y[i] * y[i] / c - 1.0);
    }
    return out;
}

void GaussianMarginal::time_score(const ScheduleEval& s, const NoiseEval& noise, const Samples& x,
                                  Eigen::Ref<Vector> out) const {
    const Eigen::MatrixXd y = x * basis_;
    const Eigen::Index d = lambda_.size();
    Vector scale(d), offset(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double c = s.alpha * s.alpha + s.beta * s.beta * lambda_[i] + noise.var;
        const double dc = 2.0 * s.alpha * s.dalpha + 2.0 * s.beta * s.dbeta * lambda_[i] + noise.dvar;
        scale[i] = dc / (2.0 * c * c);
        offset[i] = dc / (2.0 * c);
    }
    out = y.array().square().matrix() * scale - Vector::Constant(x.rows(), offset.sum());
}

double GaussianMarginal::log_pdf_ratio(const Vector& x) const {
    const Vector y = basis_.transpose() * x;
    double out = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        out += -0.5 * std::log(lambda_[i]) - 0.5 * y[i] * y[i] / lambda_[i] + 0.5 * y[i] * y[i];
    return out;
}

}  // namespace mvp
