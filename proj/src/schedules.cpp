#include "mvp/schedules.hpp"

#include "mvp/common.hpp"

#include <cmath>
#include <numbers>
#include <tuple>

namespace mvp {

std::string_view to_string(Constraint c) {
    return c == Constraint::Affine ? "affine" : "spherical";
}

std::optional<Constraint> parse_constraint(std::string_view s) {
    if (s == "affine") return Constraint::Affine;
    if (s == "spherical") return Constraint::Spherical;
    return std::nullopt;
}

std::string_view to_string(FixedSchedule::Kind kind) {
    switch (kind) {
        case FixedSchedule::Kind::Linear: return "linear";
        case FixedSchedule::Kind::VP: return "vp";
        case FixedSchedule::Kind::Cosine: return "cosine";
        case FixedSchedule::Kind::Follmer: return "follmer";
        case FixedSchedule::Kind::Trigonometric: return "trig";
    }
    return "unknown";
}

std::optional<FixedSchedule> parse_fixed_schedule(std::string_view name) {
    if (name == "linear") return FixedSchedule::linear();
    if (name == "vp") return FixedSchedule::vp();
    if (name == "cosine") return FixedSchedule::cosine();
    if (name == "follmer") return FixedSchedule::follmer();
    if (name == "trig" || name == "trigonometric") return FixedSchedule::trigonometric();
    return std::nullopt;
}

std::pair<double, double> couple_beta(double alpha, double dalpha, Constraint kind) {
    if (kind == Constraint::Affine) return {1.0 - alpha, -dalpha};
    const double beta = std::sqrt(1.0 - alpha * alpha + kSphericalEps);
    return {beta, -alpha * dalpha / beta};
}

ScheduleEval eval_fixed(const FixedSchedule& s, double t_in) {
    using std::numbers::pi;
    const double t = clamp_time(t_in);
    ScheduleEval e;
    e.t = t;
    switch (s.kind) {
        case FixedSchedule::Kind::Linear:
            e.alpha = 1.0 - t;
            e.dalpha = -1.0;
            std::tie(e.beta, e.dbeta) = couple_beta(e.alpha, e.dalpha, Constraint::Affine);
            break;
        case FixedSchedule::Kind::VP: {
            const double spread = s.vp_beta1 - s.vp_beta0;
            const double rate = 0.5 * (spread * t + s.vp_beta0);
            e.alpha = std::exp(-0.25 * t * t * spread - 0.5 * t * s.vp_beta0);
            // 1 - alpha^2 without cancellation for small t
            e.beta = std::sqrt(-std::expm1(-0.5 * t * t * spread - t * s.vp_beta0));
            e.dalpha = -rate * e.alpha;
            e.dbeta = e.alpha * e.alpha / e.beta * rate;
            break;
        }
        case FixedSchedule::Kind::Cosine: {
            const double scale = 0.5 * pi / (1.0 + s.cosine_s);
            const double norm = std::cos(s.cosine_s * scale);
            const double phase = (t + s.cosine_s) * scale;
            const double abar = std::cos(phase) / norm;
            const double dabar = -std::sin(phase) * scale / norm;
            e.alpha = std::sqrt(abar);
            e.beta = std::sqrt(1.0 - abar);
            e.dalpha = dabar / (2.0 * e.alpha);
            e.dbeta = -dabar / (2.0 * e.beta);
            break;
        }
        case FixedSchedule::Kind::Follmer:
            e.alpha = std::sqrt((1.0 - t) * (1.0 + t));
            e.beta = t;
            e.dalpha = -t / e.alpha;
            e.dbeta = 1.0;
            break;
        case FixedSchedule::Kind::Trigonometric: {
            const double phase = 0.5 * pi * t;
            e.alpha = std::cos(phase);
            e.beta = std::sin(phase);
            e.dalpha = -0.5 * pi * e.beta;
            e.dbeta = 0.5 * pi * e.alpha;
            break;
        }
    }
    return e;
}

}  // namespace mvp
