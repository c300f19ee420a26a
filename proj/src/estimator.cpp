#include "mvp/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace mvp {

std::string_view to_string(QuadratureRule r) {
    return r == QuadratureRule::Trapezoid ? "trapezoid" : "paper_riemann";
}

std::optional<QuadratureRule> parse_rule(std::string_view s) {
    if (s == "trapezoid") return QuadratureRule::Trapezoid;
    if (s == "paper_riemann") return QuadratureRule::PaperRiemann;
    return std::nullopt;
}

GaussianTimeScore::GaussianTimeScore(const Eigen::MatrixXd& sigma, PathSchedule path, Interpolant interp,
                                     DdbiNoiseConfig noise)
    : marginal_(sigma), path_(std::move(path)), interp_(interp), noise_(noise) {}

void GaussianTimeScore::time_score(const Samples& x, double t, Eigen::Ref<Vector> out) const {
    const ScheduleEval s = eval_path(path_, t);
    const NoiseEval n = interp_ == Interpolant::DDBI ? ddbi_noise(s, noise_) : NoiseEval{};
    marginal_.time_score(s, n, x, out);
}

void FunctionTimeScore::time_score(const Samples& x, double t, Eigen::Ref<Vector> out) const {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = f_(x.row(i).transpose(), t);
}

Quadrature make_quadrature(const InferenceConfig& cfg) {
    if (cfg.steps < 8) throw std::invalid_argument("inference: steps must be >= 8");
    const int I = cfg.steps;
    Quadrature q;
    q.nodes.resize(I + 1);
    q.weights.assign(I + 1, 1.0 / I);
    for (int i = 0; i <= I; ++i) q.nodes[i] = clamp_time(static_cast<double>(i) / I);
    if (cfg.rule == QuadratureRule::Trapezoid) {
        q.weights.front() *= 0.5;
        q.weights.back() *= 0.5;
    }
    return q;
}

Vector log_ratios(const TimeScoreFunction& f, const Samples& x, const InferenceConfig& cfg) {
    if (x.cols() != f.dim()) throw std::invalid_argument("log_ratio: dimension mismatch");
    const Quadrature q = make_quadrature(cfg);
    Vector total = Vector::Zero(x.rows());
    const Eigen::Index chunk = std::max<Eigen::Index>(1, cfg.chunk);
    Vector buf(chunk);
    for (Eigen::Index start = 0; start < x.rows(); start += chunk) {
        const Eigen::Index n = std::min(chunk, x.rows() - start);
        const Samples block = x.middleRows(start, n);
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            auto s = buf.head(n);
            f.time_score(block, q.nodes[i], s);
            if (!s.allFinite()) throw std::domain_error("log_ratio: non-finite time score");
            total.segment(start, n) += q.weights[i] * s;
        }
    }
    return total;
}

double log_ratio(const TimeScoreFunction& f, const Vector& x, const InferenceConfig& cfg) {
    Samples row = x.transpose();
    return log_ratios(f, row, cfg)[0];
}

MiEstimate mean_and_stderr(const Vector& v) {
    if (v.size() == 0) throw std::invalid_argument("estimate: empty evaluation set");
    MiEstimate e;
    e.mi = v.mean();
    if (v.size() > 1) {
        const double var = (v.array() - e.mi).square().sum() / static_cast<double>(v.size() - 1);
        e.std_err = std::sqrt(var / static_cast<double>(v.size()));
    }
    return e;
}

MiEstimate estimate_mi(const TimeScoreFunction& f, const Samples& joint, const InferenceConfig& cfg) {
    if (joint.rows() == 0) throw std::invalid_argument("estimate_mi: empty evaluation set");
    return mean_and_stderr(log_ratios(f, joint, cfg));
}

double log_likelihood(const TimeScoreFunction& f, const Vector& x,
                      const std::function<double(const Vector&)>& base_log_pdf, const InferenceConfig& cfg) {
    return log_ratio(f, x, cfg) + base_log_pdf(x);
}

Vector log_likelihoods(const TimeScoreFunction& f, const Samples& x,
                       const std::function<double(const Vector&)>& base_log_pdf, const InferenceConfig& cfg) {
    Vector out = log_ratios(f, x, cfg);
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] += base_log_pdf(x.row(i).transpose());
    return out;
}

}  // namespace mvp
