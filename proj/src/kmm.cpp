#include "mvp/kmm.hpp"

#include "mvp/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace mvp {

namespace {

struct Component {
    double survival;  // (1 - t^a)^b
    double cdf;       // 1 - survival, without the cancellation
    double pdf;       // a b t^(a-1) (1 - t^a)^(b-1)
};

// Everything in log space: log t is tiny near t=1 and t^a is tiny near t=0,
// so neither 1 - t^a nor its powers are formed by direct subtraction.
Component eval_component(double a, double b, double t) {
    const double log_t = std::log1p(t - 1.0);
    // a == 1 and b == 1 are taken literally so a uniform component reproduces
    // the linear path exactly
    const double ta = a == 1.0 ? t : std::exp(a * log_t);
    const double log_1m_ta = ta < 0.5 ? std::log1p(-ta) : std::log(-std::expm1(a * log_t));
    Component c;
    if (b == 1.0) {
        c.survival = 1.0 - ta;
        c.cdf = ta;
    } else {
        c.survival = std::exp(b * log_1m_ta);
        c.cdf = -std::expm1(b * log_1m_ta);
    }
    c.pdf = a * b * std::exp((a - 1.0) * log_t + (b - 1.0) * log_1m_ta);
    return c;
}

void check_sizes(const KmmLatentParams& p) {
    if (p.w_hat.empty() || p.a_hat.size() != p.w_hat.size() ||
        p.b_hat.size() != p.w_hat.size())
        throw std::invalid_argument("kmm: latent parameter arrays must be non-empty and equal length");
}

}  // namespace

std::vector<double> KmmLatentParams::flatten() const {
    std::vector<double> out;
    out.reserve(3 * w_hat.size());
    out.insert(out.end(), w_hat.begin(), w_hat.end());
    out.insert(out.end(), a_hat.begin(), a_hat.end());
    out.insert(out.end(), b_hat.begin(), b_hat.end());
    return out;
}

KmmLatentParams KmmLatentParams::unflatten(const std::vector<double>& flat) {
    if (flat.empty() || flat.size() % 3 != 0)
        throw std::invalid_argument("kmm: flat parameter vector must have length 3K");
    const auto K = static_cast<std::ptrdiff_t>(flat.size() / 3);
    KmmLatentParams p;
    p.w_hat.assign(flat.begin(), flat.begin() + K);
    p.a_hat.assign(flat.begin() + K, flat.begin() + 2 * K);
    p.b_hat.assign(flat.begin() + 2 * K, flat.end());
    return p;
}

double stable_pow(double x, double y) {
    if (!(x > 0.0)) throw std::domain_error("stable_pow: base must be positive");
    return std::exp(y * std::log1p(x - 1.0));
}

double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double inverse_softplus(double y) {
    if (!(y > 0.0)) throw std::domain_error("inverse_softplus: argument must be positive");
    // log(e^y - 1) = y + log(1 - e^-y)
    return y + std::log(-std::expm1(-y));
}

KmmParams constrain(const KmmLatentParams& latent) {
    check_sizes(latent);
    const int K = latent.K();
    KmmParams p;
    p.weights.resize(K);
    p.a.resize(K);
    p.b.resize(K);
    const double shift = *std::max_element(latent.w_hat.begin(), latent.w_hat.end());
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        p.weights[k] = std::exp(latent.w_hat[k] - shift);
        total += p.weights[k];
    }
    for (int k = 0; k < K; ++k) {
        p.weights[k] /= total;
        p.a[k] = softplus(latent.a_hat[k]);
        p.b[k] = softplus(latent.b_hat[k]);
    }
    return p;
}

double kmm_survival(const KmmParams& p, double t_in) {
    const double t = clamp_time(t_in);
    double s = 0.0;
    for (int k = 0; k < p.K(); ++k) s += p.weights[k] * eval_component(p.a[k], p.b[k], t).survival;
    return s;
}

double kmm_cdf(const KmmParams& p, double t_in) {
    const double t = clamp_time(t_in);
    double f = 0.0;
    for (int k = 0; k < p.K(); ++k) f += p.weights[k] * eval_component(p.a[k], p.b[k], t).cdf;
    return std::clamp(f, 0.0, 1.0);
}

double kmm_pdf(const KmmParams& p, double t_in) {
    const double t = clamp_time(t_in);
    double f = 0.0;
    for (int k = 0; k < p.K(); ++k) f += p.weights[k] * eval_component(p.a[k], p.b[k], t).pdf;
    return f;
}

ScheduleEval eval_kmm_schedule(const KmmParams& p, Constraint kind, double t_in) {
    ScheduleEval e;
    e.t = clamp_time(t_in);
    double alpha = 0.0;
    double pdf = 0.0;
    for (int k = 0; k < p.K(); ++k) {
        const Component c = eval_component(p.a[k], p.b[k], e.t);
        alpha += p.weights[k] * c.survival;
        pdf += p.weights[k] * c.pdf;
    }
    e.alpha = std::min(alpha, 1.0);
    e.dalpha = -pdf;
    std::tie(e.beta, e.dbeta) = couple_beta(e.alpha, e.dalpha, kind);
    return e;
}

ScheduleEval eval_kmm_schedule(const KmmLatentParams& latent, Constraint kind, double t) {
    return eval_kmm_schedule(constrain(latent), kind, t);
}

KmmLatentParams init_diverse(int K) {
    if (K < 1) throw std::invalid_argument("init_diverse: K must be >= 1");
    KmmLatentParams p;
    for (int k = 0; k < K; ++k) {
        const double tau = (k + 0.5) / (K + 1.0);
        double a, b;
        if (tau < 0.5) {
            a = 1.5 + 0.5 * k;
            b = 3.0 + 2.0 * (K - k);
        } else {
            a = 3.0 + 2.0 * k;
            b = 1.5 + 0.5 * (K - k);
        }
        p.w_hat.push_back(std::log(1.0 / K));
        p.a_hat.push_back(inverse_softplus(a));
        p.b_hat.push_back(inverse_softplus(b));
    }
    return p;
}

std::vector<double> component_modes(const KmmParams& p) {
    std::vector<double> modes(p.K());
    for (int k = 0; k < p.K(); ++k) {
        const double a = p.a[k], b = p.b[k];
        if (a < 1.0 || b < 1.0 || a * b <= 1.0)
            modes[k] = std::numeric_limits<double>::quiet_NaN();
        else
            modes[k] = std::pow((a - 1.0) / (a * b - 1.0), 1.0 / a);
    }
    return modes;
}

nlohmann::json to_json(const KmmLatentParams& latent) {
    return {{"K", latent.K()}, {"w_hat", latent.w_hat}, {"a_hat", latent.a_hat}, {"b_hat", latent.b_hat}};
}

KmmLatentParams kmm_from_json(const nlohmann::json& j) {
    KmmLatentParams p;
    const int K = j.at("K").get<int>();
    p.w_hat = j.at("w_hat").get<std::vector<double>>();
    p.a_hat = j.at("a_hat").get<std::vector<double>>();
    p.b_hat = j.at("b_hat").get<std::vector<double>>();
    if (K < 1 || p.K() != K) throw std::invalid_argument("kmm json: K does not match array lengths");
    check_sizes(p);
    for (const auto* v : {&p.w_hat, &p.a_hat, &p.b_hat})
        for (double x : *v)
            if (!std::isfinite(x)) throw std::invalid_argument("kmm json: non-finite entry");
    return p;
}

}  // namespace mvp
