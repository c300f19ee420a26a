#include "mvp/special.hpp"

#include <cmath>
#include <stdexcept>

namespace mvp {

double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
    double shift = 0.0;
    while (x < 10.0) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    // B_2k / (2k) for k = 1..7
    static constexpr double c[] = {1.0 / 12.0,   -1.0 / 120.0,      1.0 / 252.0, -1.0 / 240.0,
                                   1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0};
    const double inv2 = 1.0 / (x * x);
    double series = 0.0;
    double p = inv2;
    for (double ck : c) {
        series += ck * p;
        p *= inv2;
    }
    return shift + std::log(x) - 0.5 / x - series;
}

}  // namespace mvp
