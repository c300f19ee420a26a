#pragma once

#include "mvp/common.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace mvp {

enum class Constraint { Affine, Spherical };

std::string_view to_string(Constraint c);
std::optional<Constraint> parse_constraint(std::string_view s);

/// Interpolation coefficients at one (clamped) time point.
struct ScheduleEval {
    double t = 0.0;
    double alpha = 1.0;
    double beta = 0.0;
    double dalpha = 0.0;
    double dbeta = 0.0;
};

/// Closed-form baseline paths.
struct FixedSchedule {
    enum class Kind { Linear, VP, Cosine, Follmer, Trigonometric };

    Kind kind = Kind::Linear;
    double vp_beta0 = 0.1;
    double vp_beta1 = 20.0;
    double cosine_s = 0.008;

    static FixedSchedule linear() { return {Kind::Linear}; }
    static FixedSchedule vp(double beta0 = 0.1, double beta1 = 20.0) {
        return {Kind::VP, beta0, beta1};
    }
    static FixedSchedule cosine(double s = 0.008) { return {Kind::Cosine, 0.1, 20.0, s}; }
    static FixedSchedule follmer() { return {Kind::Follmer}; }
    static FixedSchedule trigonometric() { return {Kind::Trigonometric}; }

    /// The coupling the closed form satisfies: affine for Linear, spherical otherwise.
    Constraint constraint() const {
        return kind == Kind::Linear ? Constraint::Affine : Constraint::Spherical;
    }
};

/// All five baselines in a stable order.
inline constexpr FixedSchedule::Kind kAllFixedKinds[] = {
    FixedSchedule::Kind::Linear, FixedSchedule::Kind::VP, FixedSchedule::Kind::Cosine,
    FixedSchedule::Kind::Follmer, FixedSchedule::Kind::Trigonometric};

/// Lowercase names used by the CLI: linear|vp|cosine|follmer|trig.
std::string_view to_string(FixedSchedule::Kind kind);
std::optional<FixedSchedule> parse_fixed_schedule(std::string_view name);

/// Evaluates a baseline path; t is clamped into [kTimeEps, 1 - kTimeEps].
ScheduleEval eval_fixed(const FixedSchedule& schedule, double t);

/// Derives (beta, dbeta) from (alpha, dalpha) under the given constraint.
std::pair<double, double> couple_beta(double alpha, double dalpha, Constraint kind);

}  // namespace mvp
