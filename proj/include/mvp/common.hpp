#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mvp {

/// Global time clamp applied to every schedule evaluation.
inline constexpr double kTimeEps = 1e-5;
/// Additive guard under the square root of the spherical coupling.
inline constexpr double kSphericalEps = 1e-5;

/// Sample matrix, one sample per row.
using Samples = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline double clamp_time(double t, double eps = kTimeEps) {
    if (t < eps) return eps;
    if (t > 1.0 - eps) return 1.0 - eps;
    return t;
}

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int row, int col)
        : std::runtime_error(what), row_(row), col_(col) {}
    int row() const { return row_; }
    int col() const { return col_; }

private:
    int row_;
    int col_;
};

}  // namespace mvp
