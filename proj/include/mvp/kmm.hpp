#pragma once

#include "mvp/schedules.hpp"

#include <json.hpp>

#include <vector>

namespace mvp {

/// Unconstrained parameters of a K-component Kumaraswamy mixture.
struct KmmLatentParams {
    std::vector<double> w_hat;
    std::vector<double> a_hat;
    std::vector<double> b_hat;

    int K() const { return static_cast<int>(w_hat.size()); }

    // Flat layout is [w_hat..., a_hat..., b_hat...]; used by the FD optimizer.
    std::vector<double> flatten() const;
    static KmmLatentParams unflatten(const std::vector<double>& flat);

    bool operator==(const KmmLatentParams&) const = default;
};

struct KmmParams {
    std::vector<double> weights;
    std::vector<double> a;
    std::vector<double> b;

    int K() const { return static_cast<int>(weights.size()); }
};

/// x^y computed as exp(y * log1p(x - 1)). Throws std::domain_error for x <= 0.
double stable_pow(double x, double y);

double softplus(double z);
double inverse_softplus(double y);

KmmParams constrain(const KmmLatentParams& latent);

double kmm_cdf(const KmmParams& p, double t);
double kmm_pdf(const KmmParams& p, double t);
/// 1 - F(t) evaluated as a sum of survival terms, so it keeps precision near t = 1.
double kmm_survival(const KmmParams& p, double t);

ScheduleEval eval_kmm_schedule(const KmmParams& p, Constraint kind, double t);
ScheduleEval eval_kmm_schedule(const KmmLatentParams& latent, Constraint kind, double t);

/// Components with modes spread across [0,1]; throws std::invalid_argument for K < 1.
KmmLatentParams init_diverse(int K);

/// Per-component modes ((a-1)/(ab-1))^(1/a). Diagnostic only; NaN where a<1 or b<1.
std::vector<double> component_modes(const KmmParams& p);

nlohmann::json to_json(const KmmLatentParams& latent);
KmmLatentParams kmm_from_json(const nlohmann::json& j);

}  // namespace mvp
