#pragma once

namespace mvp {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Digamma for x > 0: upward recurrence to x >= 10, then the Bernoulli asymptotic series.
double digamma(double x);

}  // namespace mvp
