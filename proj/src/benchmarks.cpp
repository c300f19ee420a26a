#include "mvp/benchmarks.hpp"

#include "mvp/io.hpp"
#include "mvp/special.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mvp {

namespace {

constexpr double kPi = std::numbers::pi;

Samples standard_normal(Eigen::Index n, int d, Rng& rng) {
    Samples x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
    return x;
}

Samples correlated_pairs(Eigen::Index n, int blocks, double rho, Rng& rng) {
    const double c = std::sqrt(1.0 - rho * rho);
    Samples x(n, 2 * blocks);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int b = 0; b < blocks; ++b) {
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            x(i, 2 * b) = z1;
            x(i, 2 * b + 1) = rho * z1 + c * z2;
        }
    return x;
}

Eigen::MatrixXd block_sigma(int d, double rho) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(d, d);
    for (int b = 0; b < d / 2; ++b) s(2 * b, 2 * b + 1) = s(2 * b + 1, 2 * b) = rho;
    return s;
}

void check_rho(double rho) {
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("task: |rho| must be < 1");
}

// Correlated 2-D Gaussian pushed through the same map on both coordinates.
TaskSpec mapped_gaussian_task(std::string name, double rho, double (*fwd)(double),
                              double (*inv)(double)) {
    check_rho(rho);
    Sampler joint = [rho, fwd](Eigen::Index n, Rng& rng) {
        Samples x = correlated_pairs(n, 1, rho, rng);
        if (fwd) x = x.unaryExpr(fwd);
        return x;
    };
    TaskSpec t = mi_task_from_joint(std::move(name), 2, 1, joint);
    t.oracle = OracleKind::AnalyticMI;
    t.oracle_value = -0.5 * std::log1p(-rho * rho);
    const auto g = std::make_shared<GaussianMarginal>(block_sigma(2, rho));
    // the Jacobian of the shared map cancels in the ratio
    t.log_ratio = [g, inv](const Vector& x) { return g->log_pdf_ratio(inv ? Vector(x.unaryExpr(inv)) : x); };
    if (!fwd) t.gaussian_sigma = block_sigma(2, rho);
    return t;
}

double simpson_weight(int i, int n) {
    if (i == 0 || i == n) return 1.0;
    return i % 2 ? 4.0 : 2.0;
}

double additive_noise_py(double y, double eps) {
    return std::max(0.0, std::min(1.0, y + eps) - std::max(0.0, y - eps)) / (2.0 * eps);
}

void check_eps(double eps) {
    if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("additive noise: eps must be in (0, 0.5]");
}

}  // namespace

TaskSpec mi_task_from_joint(std::string name, int dim, int split, Sampler joint) {
    TaskSpec t;
    t.name = std::move(name);
    t.dim = dim;
    t.mi_task = true;
    t.interpolant = Interpolant::DDBI;
    t.sample_p1 = joint;
    t.sample_p0 = [joint, dim, split](Eigen::Index n, Rng& rng) {
        Samples x = joint(n, rng);
        std::vector<Eigen::Index> perm(n);
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        std::shuffle(perm.begin(), perm.end(), rng.engine());
        Samples out = x;
        for (Eigen::Index i = 0; i < n; ++i) out.row(i).segment(split, dim - split) = x.row(perm[i]).segment(split, dim - split);
        return out;
    };
    return t;
}

TaskSpec gaussian_block_task(int d, double rho) {
    if (d < 2 || d % 2) throw std::invalid_argument("gaussian block task: d must be even and >= 2");
    check_rho(rho);
    TaskSpec t;
    t.name = "gaussian_block";
    t.dim = d;
    t.sample_p0 = [d](Eigen::Index n, Rng& rng) { return standard_normal(n, d, rng); };
    t.sample_p1 = [d, rho](Eigen::Index n, Rng& rng) { return correlated_pairs(n, d / 2, rho, rng); };
    t.oracle = OracleKind::AnalyticMI;
    t.oracle_value = -0.25 * d * std::log1p(-rho * rho);
    t.gaussian_sigma = block_sigma(d, rho);
    const auto g = std::make_shared<GaussianMarginal>(*t.gaussian_sigma);
    t.log_ratio = [g](const Vector& x) { return g->log_pdf_ratio(x); };
    t.mi_task = true;
    t.interpolant = Interpolant::DDBI;
    return t;
}

TaskSpec gaussian_scale_task(int d, double sigma1_sq) {
    if (d < 1 || !(sigma1_sq > 0.0)) throw std::invalid_argument("gaussian scale task: bad parameters");
    TaskSpec t;
    t.name = "gaussian_scale";
    t.dim = d;
    const double s = std::sqrt(sigma1_sq);
    t.sample_p0 = [d](Eigen::Index n, Rng& rng) { return standard_normal(n, d, rng); };
    t.sample_p1 = [d, s](Eigen::Index n, Rng& rng) { return Samples(s * standard_normal(n, d, rng)); };
    t.gaussian_sigma = sigma1_sq * Eigen::MatrixXd::Identity(d, d);
    const auto g = std::make_shared<GaussianMarginal>(*t.gaussian_sigma);
    t.log_ratio = [g](const Vector& x) { return g->log_pdf_ratio(x); };
    t.oracle = OracleKind::AnalyticLogRatio;
    t.interpolant = Interpolant::DI;
    return t;
}

double halfcube(double z) { return std::copysign(std::abs(z) * std::sqrt(std::abs(z)), z); }
double halfcube_inverse(double y) { return std::copysign(std::cbrt(y * y), y); }

namespace {
double asinh_map(double z) { return std::asinh(z); }
double sinh_map(double y) { return std::sinh(y); }
}  // namespace

TaskSpec edge_singular_task(double rho) { return mapped_gaussian_task("edge_singular", rho, nullptr, nullptr); }
TaskSpec halfcube_task(double rho) { return mapped_gaussian_task("halfcube", rho, &halfcube, &halfcube_inverse); }
TaskSpec asinh_task(double rho) { return mapped_gaussian_task("asinh", rho, &asinh_map, &sinh_map); }

double additive_noise_mi_exact(double eps) {
    check_eps(eps);
    return eps - std::log(2.0 * eps);
}

double additive_noise_mi_quadrature(double eps, int n) {
    check_eps(eps);
    if (n < 2 || n % 2) throw std::invalid_argument("simpson: interval count must be even");
    const double hx = 1.0 / n, hn = 2.0 * eps / n;
    const double dens = 1.0 / (2.0 * eps);
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = i * hx;
        double inner = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double py = additive_noise_py(x - eps + j * hn, eps);
            // p_Y vanishes only at the two support corners, a null set
            if (py > 0.0) inner += simpson_weight(j, n) * dens * std::log(dens / py);
        }
        total += simpson_weight(i, n) * inner * hn / 3.0;
    }
    return total * hx / 3.0;
}

double additive_noise_mi_quadrature_swapped(double eps, int n) {
    check_eps(eps);
    if (n < 2 || n % 2) throw std::invalid_argument("simpson: interval count must be even");
    const double lo = -eps, hy = (1.0 + 2.0 * eps) / n;
    const double dens = 1.0 / (2.0 * eps);
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double y = lo + i * hy;
        const double xa = std::max(0.0, y - eps), xb = std::min(1.0, y + eps);
        if (xb <= xa) continue;
        const double py = additive_noise_py(y, eps);
        const double hx = (xb - xa) / n;
        double inner = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double px = 1.0;  // U(0,1) marginal on [xa, xb] subset of [0,1]
            inner += simpson_weight(j, n) * dens * std::log(dens / (px * py));
        }
        total += simpson_weight(i, n) * inner * hx / 3.0;
    }
    return total * hy / 3.0;
}

TaskSpec additive_noise_task(double eps) {
    check_eps(eps);
    Sampler joint = [eps](Eigen::Index n, Rng& rng) {
        Samples x(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i, 0) = rng.uniform();
            x(i, 1) = x(i, 0) + rng.uniform(-eps, eps);
        }
        return x;
    };
    TaskSpec t = mi_task_from_joint("additive_noise", 2, 1, joint);
    t.oracle = OracleKind::NumericalMI;
    t.oracle_value = additive_noise_mi_quadrature(eps);
    t.log_ratio = [eps](const Vector& v) {
        const double x = v[0], n = v[1] - v[0];
        if (x < 0.0 || x > 1.0 || std::abs(n) > eps) return -std::numeric_limits<double>::infinity();
        return std::log(1.0 / (2.0 * eps) / additive_noise_py(v[1], eps));
    };
    return t;
}

double gamma_exponential_mi(double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("gamma-exponential: rho must be positive");
    return digamma(rho + 1.0) - std::log(rho);
}

TaskSpec gamma_exponential_task(double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("gamma-exponential: rho must be positive");
    Sampler joint = [rho](Eigen::Index n, Rng& rng) {
        Samples x(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i, 0) = rng.gamma(rho);
            x(i, 1) = rng.exponential(x(i, 0));
        }
        return x;
    };
    TaskSpec t = mi_task_from_joint("gamma_exponential", 2, 1, joint);
    t.oracle = OracleKind::AnalyticMI;
    t.oracle_value = gamma_exponential_mi(rho);
    // p(y|x) = x e^{-xy}, p(y) = rho (1+y)^{-rho-1}
    t.log_ratio = [rho](const Vector& v) {
        return std::log(v[0]) - v[0] * v[1] - std::log(rho) + (rho + 1.0) * std::log1p(v[1]);
    };
    return t;
}

std::optional<Toy2d> parse_toy2d(std::string_view name) {
    if (name == "circles") return Toy2d::Circles;
    if (name == "rings") return Toy2d::Rings;
    if (name == "pinwheel") return Toy2d::Pinwheel;
    if (name == "two_spirals" || name == "2spirals") return Toy2d::TwoSpirals;
    if (name == "checkerboard") return Toy2d::Checkerboard;
    if (name == "tree") return Toy2d::Tree;
    return std::nullopt;
}

std::string_view to_string(Toy2d t) {
    switch (t) {
        case Toy2d::Circles: return "circles";
        case Toy2d::Rings: return "rings";
        case Toy2d::Pinwheel: return "pinwheel";
        case Toy2d::TwoSpirals: return "two_spirals";
        case Toy2d::Checkerboard: return "checkerboard";
        case Toy2d::Tree: return "tree";
    }
    return "unknown";
}

namespace {

struct Segment {
    double x0, y0, x1, y1;
};

// Trunk from (0,-3.5) upward, each branch splitting in two with shorter children.
const std::vector<Segment>& tree_segments() {
    static const std::vector<Segment> segs = [] {
        std::vector<Segment> out;
        struct Node {
            double x, y, angle, length;
            int depth;
        };
        std::vector<Node> stack{{0.0, -3.5, kPi / 2, 2.5, 0}};
        while (!stack.empty()) {
            const Node n = stack.back();
            stack.pop_back();
            const double ex = n.x + n.length * std::cos(n.angle);
            const double ey = n.y + n.length * std::sin(n.angle);
            out.push_back({n.x, n.y, ex, ey});
            if (n.depth < 5) {
                const double spread = 0.45 - 0.04 * n.depth;
                stack.push_back({ex, ey, n.angle - spread, n.length * 0.68, n.depth + 1});
                stack.push_back({ex, ey, n.angle + spread, n.length * 0.68, n.depth + 1});
            }
        }
        return out;
    }();
    return segs;
}

}  // namespace

Samples toy2d_samples(Toy2d which, Eigen::Index n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("toy2d: n must be >= 1");
    Samples x(n, 2);
    switch (which) {
        case Toy2d::Circles:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double r = rng.uniform() < 0.5 ? 1.0 : 0.5;
                const double a = rng.uniform(0.0, 2.0 * kPi);
                x(i, 0) = 3.0 * (r * std::cos(a) + 0.08 * rng.normal());
                x(i, 1) = 3.0 * (r * std::sin(a) + 0.08 * rng.normal());
            }
            break;
        case Toy2d::Rings:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double r = 0.25 * (1 + rng.integer(0, 3));
                const double a = rng.uniform(0.0, 2.0 * kPi);
                x(i, 0) = 3.0 * r * std::cos(a) + 0.08 * rng.normal();
                x(i, 1) = 3.0 * r * std::sin(a) + 0.08 * rng.normal();
            }
            break;
        case Toy2d::Pinwheel: {
            const int classes = 5;
            const double radial_std = 0.3, tangential_std = 0.1, rate = 0.25;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int label = rng.integer(0, classes - 1);
                const double f0 = radial_std * rng.normal() + 1.0;
                const double f1 = tangential_std * rng.normal();
                const double angle = 2.0 * kPi * label / classes + rate * std::exp(f0);
                const double c = std::cos(angle), s = std::sin(angle);
                x(i, 0) = 2.0 * (f0 * c + f1 * s);
                x(i, 1) = 2.0 * (-f0 * s + f1 * c);
            }
            break;
        }
        case Toy2d::TwoSpirals:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double r = std::sqrt(rng.uniform()) * 540.0 * (2.0 * kPi) / 360.0;
                const double dx = -std::cos(r) * r + 0.5 * rng.uniform();
                const double dy = std::sin(r) * r + 0.5 * rng.uniform();
                const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
                x(i, 0) = sign * dx / 3.0 + 0.1 * rng.normal();
                x(i, 1) = sign * dy / 3.0 + 0.1 * rng.normal();
            }
            break;
        case Toy2d::Checkerboard:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double x1 = rng.uniform() * 4.0 - 2.0;
                const double x2_ = rng.uniform() - 2.0 * rng.integer(0, 1);
                const double fl = std::floor(x1);
                const double x2 = x2_ + (fl - 2.0 * std::floor(fl / 2.0));
                x(i, 0) = 2.0 * x1;
                x(i, 1) = 2.0 * x2;
            }
            break;
        case Toy2d::Tree: {
            const auto& segs = tree_segments();
            std::vector<double> cum;
            double total = 0.0;
            for (const auto& s : segs) {
                total += std::hypot(s.x1 - s.x0, s.y1 - s.y0);
                cum.push_back(total);
            }
            for (Eigen::Index i = 0; i < n; ++i) {
                const double u = rng.uniform() * total;
                const auto k = std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(),
                                                     segs.size() - 1);
                const double v = rng.uniform();
                const auto& s = segs[k];
                x(i, 0) = s.x0 + v * (s.x1 - s.x0) + 0.05 * rng.normal();
                x(i, 1) = s.y0 + v * (s.y1 - s.y0) + 0.05 * rng.normal();
            }
            break;
        }
    }
    return x;
}

TaskSpec toy2d_task(Toy2d which) {
    TaskSpec t;
    t.name = std::string(to_string(which));
    t.dim = 2;
    t.sample_p0 = [](Eigen::Index n, Rng& rng) { return standard_normal(n, 2, rng); };
    t.sample_p1 = [which](Eigen::Index n, Rng& rng) { return toy2d_samples(which, n, rng); };
    t.interpolant = Interpolant::DI;
    return t;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

Samples load_csv_matrix(const std::filesystem::path& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path.string() + "': missing header row", 0, 0);
    const auto names = split_commas(trim(line));
    const auto cols = static_cast<int>(names.size());
    if (header) header->assign(names.begin(), names.end());

    std::vector<double> values;
    int row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_commas(trim(line));
        if (static_cast<int>(cells.size()) != cols)
            throw ParseError("'" + path.string() + "': row " + std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " columns, expected " + std::to_string(cols),
                             row, static_cast<int>(std::min<std::size_t>(cells.size(), cols)) + 1);
        for (int c = 0; c < cols; ++c) {
            double v = 0.0;
            const auto cell = cells[c];
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw ParseError("'" + path.string() + "': non-numeric value '" + std::string(cell) +
                                     "' at row " + std::to_string(row) + ", col " + std::to_string(c + 1),
                                 row, c + 1);
            values.push_back(v);
        }
    }
    if (row == 0) throw ParseError("'" + path.string() + "': no data rows", 0, 0);
    Samples x(row, cols);
    std::copy(values.begin(), values.end(), x.data());
    return x;
}

void standardize_columns(Samples& x) {
    if (x.rows() < 2) throw std::invalid_argument("standardize: need at least two rows");
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mu = x.col(c).mean();
        x.col(c).array() -= mu;
        // second centering pass removes the rounding left by the first
        x.col(c).array() -= x.col(c).mean();
        const double sd = std::sqrt(x.col(c).squaredNorm() / static_cast<double>(x.rows()));
        if (sd > 0.0) x.col(c) /= sd;
    }
}

TaskSpec load_tabular_csv(const std::filesystem::path& path, bool standardize) {
    auto data = std::make_shared<Samples>(load_csv_matrix(path));
    if (standardize) standardize_columns(*data);
    TaskSpec t;
    t.name = "tabular:" + path.filename().string();
    t.dim = static_cast<int>(data->cols());
    const int d = t.dim;
    t.sample_p0 = [d](Eigen::Index n, Rng& rng) { return standard_normal(n, d, rng); };
    t.sample_p1 = [data](Eigen::Index n, Rng& rng) {
        Samples out(n, data->cols());
        const int last = static_cast<int>(data->rows()) - 1;
        for (Eigen::Index i = 0; i < n; ++i) out.row(i) = data->row(rng.integer(0, last));
        return out;
    };
    t.interpolant = Interpolant::DI;
    return t;
}

std::optional<Preprocess> parse_preprocess(std::string_view s) {
    if (s == "none") return Preprocess::None;
    if (s == "standardize") return Preprocess::Standardize;
    if (s == "log_standardize") return Preprocess::LogStandardize;
    return std::nullopt;
}

std::string_view to_string(Preprocess p) {
    switch (p) {
        case Preprocess::None: return "none";
        case Preprocess::Standardize: return "standardize";
        case Preprocess::LogStandardize: return "log_standardize";
    }
    return "unknown";
}

TaskSpec with_preprocessing(TaskSpec task, Preprocess kind, std::uint64_t seed, Eigen::Index pilot) {
    if (kind == Preprocess::None) return task;
    const bool use_log = kind == Preprocess::LogStandardize;
    Rng rng(seed, "preprocess.pilot");
    Samples x = task.sample_p1(pilot, rng);
    if (use_log) {
        if ((x.array() <= 0.0).any()) throw std::invalid_argument("log preprocessing needs positive samples");
        x = x.array().log().matrix();
    }
    const Eigen::RowVectorXd mu = x.colwise().mean();
    const Eigen::RowVectorXd sd =
        ((x.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
    auto wrap = [use_log, mu, sd](Sampler inner) -> Sampler {
        return [=](Eigen::Index n, Rng& r) {
            Samples y = inner(n, r);
            if (use_log) y = y.array().log().matrix();
            return Samples((y.rowwise() - mu).array().rowwise() / sd.array());
        };
    };
    task.sample_p0 = wrap(task.sample_p0);
    task.sample_p1 = wrap(task.sample_p1);
    // the map is applied to both sides, so only the per-point ratio formula changes
    if (task.log_ratio) {
        auto inner = task.log_ratio;
        task.log_ratio = [inner, use_log, mu, sd](const Vector& z) {
            Vector x = (z.array() * sd.transpose().array() + mu.transpose().array()).matrix();
            if (use_log) x = x.array().exp().matrix();
            return inner(x);
        };
    }
    task.gaussian_sigma.reset();
    task.name += "+" + std::string(to_string(kind));
    return task;
}

double standard_normal_log_pdf(const Vector& x) {
    return -0.5 * x.squaredNorm() - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * kPi);
}

void export_task_samples(const TaskSpec& task, bool joint, Eigen::Index n, std::uint64_t seed,
                         const std::filesystem::path& path) {
    Rng rng(seed, joint ? "export.p1" : "export.p0");
    const Samples x = joint ? task.sample_p1(n, rng) : task.sample_p0(n, rng);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << "# task=" << task.name << " seed=" << seed << " dim=" << task.dim << '\n';
    for (int j = 0; j < task.dim; ++j) out << (j ? "," : "") << 'x' << j;
    out << '\n';
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < task.dim; ++j) out << (j ? "," : "") << format_double(x(i, j));
        out << '\n';
    }
}

}  // namespace mvp
