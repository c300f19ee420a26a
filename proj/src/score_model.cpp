#include "mvp/score_model.hpp"

#include "mvp/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace mvp {

namespace {

using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

constexpr char kMagic[4] = {'M', 'V', 'P', 'J'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

Eigen::ArrayXXd silu(const Eigen::ArrayXXd& z) { return z / (1.0 + (-z).exp()); }

Eigen::ArrayXXd silu_grad(const Eigen::ArrayXXd& z) {
    const Eigen::ArrayXXd s = 1.0 / (1.0 + (-z).exp());
    return s * (1.0 + z * (1.0 - s));
}

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw std::runtime_error("checkpoint '" + path.string() + "' is truncated");
    return v;
}

}  // namespace

JointScoreModel::JointScoreModel(MlpSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    if (spec_.d < 1) throw std::invalid_argument("mlp: d must be >= 1");
    std::vector<int> widths{spec_.feature_dim()};
    for (int h : spec_.hidden) {
        if (h < 1) throw std::invalid_argument("mlp: hidden widths must be >= 1");
        widths.push_back(h);
    }
    widths.push_back(spec_.output_dim());

    Eigen::Index offset = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        Layer layer{widths[l], widths[l + 1], offset, offset + Eigen::Index(widths[l]) * widths[l + 1]};
        offset = layer.b_offset + layer.out;
        layers_.push_back(layer);
    }
    params_ = Vector::Zero(offset);
    m_ = Vector::Zero(offset);
    v_ = Vector::Zero(offset);

    Rng rng(seed, "model.init");
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        const auto& L = layers_[l];
        const double limit = std::sqrt(6.0 / (L.in + L.out));
        for (Eigen::Index i = 0; i < Eigen::Index(L.in) * L.out; ++i)
            params_[L.w_offset + i] = rng.uniform(-limit, limit);
    }
}

Eigen::MatrixXd JointScoreModel::features(const Samples& x, const Vector& t) const {
    if (x.cols() != spec_.d) throw std::invalid_argument("mlp: input dimension mismatch");
    if (t.size() != x.rows()) throw std::invalid_argument("mlp: need one time per row");
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd f(spec_.feature_dim(), n);
    f.topRows(spec_.d) = x.transpose();
    const double w = 2.0 * std::numbers::pi;
    f.row(spec_.d) = t.transpose();
    f.row(spec_.d + 1) = (w * t.array()).sin().matrix().transpose();
    f.row(spec_.d + 2) = (w * t.array()).cos().matrix().transpose();
    return f;
}

Eigen::MatrixXd JointScoreModel::forward(const Samples& x, const Vector& t) const {
    Eigen::MatrixXd h = features(x, t);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& L = layers_[l];
        ConstMap W(params_.data() + L.w_offset, L.out, L.in);
        ConstVecMap b(params_.data() + L.b_offset, L.out);
        Eigen::MatrixXd z = W * h;
        z.colwise() += b;
        h = l + 1 < layers_.size() ? Eigen::MatrixXd(silu(z.array())) : z;
    }
    return h.transpose();
}

Vector JointScoreModel::forward(const Vector& x, double t) const {
    Samples xs = x.transpose();
    return forward(xs, Vector::Constant(1, t)).row(0).transpose();
}

void JointScoreModel::time_score(const Samples& x, double t, Eigen::Ref<Vector> out) const {
    out = forward(x, Vector::Constant(x.rows(), t)).col(spec_.d);
}

double JointScoreModel::loss(const Samples& x, const Vector& t, const Eigen::MatrixXd& targets,
                             Vector* grad) const {
    const Eigen::Index n = x.rows();
    if (targets.rows() != n || targets.cols() != spec_.output_dim())
        throw std::invalid_argument("cjsm: target shape mismatch");
    if (!targets.allFinite()) throw std::domain_error("cjsm: non-finite targets");

    std::vector<Eigen::MatrixXd> pre;  // pre-activations of hidden layers
    std::vector<Eigen::MatrixXd> act{features(x, t)};
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& L = layers_[l];
        ConstMap W(params_.data() + L.w_offset, L.out, L.in);
        ConstVecMap b(params_.data() + L.b_offset, L.out);
        Eigen::MatrixXd z = W * act.back();
        z.colwise() += b;
        if (l + 1 < layers_.size()) {
            act.emplace_back(silu(z.array()));
            pre.push_back(std::move(z));
        } else {
            act.push_back(std::move(z));
        }
    }
    const Eigen::MatrixXd resid = act.back() - targets.transpose();
    const double value = resid.squaredNorm() / n;
    if (!grad) return value;

    grad->setZero(params_.size());
    Eigen::MatrixXd delta = (2.0 / n) * resid;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& L = layers_[l];
        Eigen::Map<Eigen::MatrixXd> gW(grad->data() + L.w_offset, L.out, L.in);
        Eigen::Map<Eigen::VectorXd> gb(grad->data() + L.b_offset, L.out);
        gW.noalias() = delta * act[l].transpose();
        gb = delta.rowwise().sum();
        if (l == 0) break;
        ConstMap W(params_.data() + L.w_offset, L.out, L.in);
        Eigen::MatrixXd back = W.transpose() * delta;
        delta = (back.array() * silu_grad(pre[l - 1].array())).matrix();
    }
    return value;
}

void JointScoreModel::adam_step(const Vector& grad, double lr) {
    if (grad.size() != params_.size()) throw std::invalid_argument("adam: gradient size mismatch");
    ++adam_t_;
    m_ = adam_.beta1 * m_ + (1.0 - adam_.beta1) * grad;
    v_ = adam_.beta2 * v_ + (1.0 - adam_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(adam_t_));
    const double c2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(adam_t_));
    params_.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + adam_.eps);
}

void JointScoreModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(spec_.d));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(spec_.hidden.size()));
    for (int h : spec_.hidden) put<std::uint32_t>(out, static_cast<std::uint32_t>(h));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(params_.size()));
    out.write(reinterpret_cast<const char*>(params_.data()),
              static_cast<std::streamsize>(params_.size() * sizeof(double)));
}

JointScoreModel JointScoreModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("'" + path.string() + "' is not a model checkpoint");
    if (get<std::uint32_t>(in, path) != kVersion)
        throw std::runtime_error("checkpoint '" + path.string() + "' has an unsupported version");
    MlpSpec spec;
    spec.d = static_cast<int>(get<std::uint32_t>(in, path));
    const auto layers = get<std::uint32_t>(in, path);
    if (layers > 64) throw std::runtime_error("checkpoint '" + path.string() + "' is corrupt");
    spec.hidden.clear();
    for (std::uint32_t i = 0; i < layers; ++i) spec.hidden.push_back(static_cast<int>(get<std::uint32_t>(in, path)));
    JointScoreModel model(spec, 0);
    if (get<std::uint64_t>(in, path) != static_cast<std::uint64_t>(model.params_.size()))
        throw std::runtime_error("checkpoint '" + path.string() + "' parameter count does not match its shape");
    if (!in.read(reinterpret_cast<char*>(model.params_.data()),
                 static_cast<std::streamsize>(model.params_.size() * sizeof(double))))
        throw std::runtime_error("checkpoint '" + path.string() + "' is truncated");
    return model;
}

std::vector<double> uwso_weights(const std::vector<double>& losses, double T, double eps) {
    if (losses.empty()) return {};
    std::vector<double> logits(losses.size());
    for (std::size_t j = 0; j < losses.size(); ++j) logits[j] = 1.0 / (T * (losses[j] + eps));
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& l : logits) {
        l = std::exp(l - top);
        total += l;
    }
    for (double& l : logits) l /= total;
    return logits;
}

}  // namespace mvp
