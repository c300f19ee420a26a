#include "mvp/path.hpp"

#include <stdexcept>

namespace mvp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

ScheduleEval eval_path(const PathSchedule& path, double t) {
    return std::visit(
        overloaded{[t](const FixedSchedule& f) { return eval_fixed(f, t); },
                   [t](const KmmPath& k) { return eval_kmm_schedule(k.latent, k.constraint, t); }},
        path);
}

std::string path_name(const PathSchedule& path) {
    if (const auto* f = std::get_if<FixedSchedule>(&path)) return std::string(to_string(f->kind));
    return "mvp";
}

nlohmann::json path_to_json(const PathSchedule& path) {
    if (const auto* f = std::get_if<FixedSchedule>(&path)) {
        nlohmann::json j = {{"type", "fixed"}, {"name", to_string(f->kind)}};
        if (f->kind == FixedSchedule::Kind::VP) {
            j["beta0"] = f->vp_beta0;
            j["beta1"] = f->vp_beta1;
        } else if (f->kind == FixedSchedule::Kind::Cosine) {
            j["s"] = f->cosine_s;
        }
        return j;
    }
    const auto& k = std::get<KmmPath>(path);
    return {{"type", "kmm"}, {"constraint", to_string(k.constraint)}, {"latent", to_json(k.latent)}};
}

PathSchedule path_from_json(const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "fixed") {
        auto f = parse_fixed_schedule(j.at("name").get<std::string>());
        if (!f) throw std::invalid_argument("path json: unknown fixed schedule");
        if (j.contains("beta0")) f->vp_beta0 = j.at("beta0").get<double>();
        if (j.contains("beta1")) f->vp_beta1 = j.at("beta1").get<double>();
        if (j.contains("s")) f->cosine_s = j.at("s").get<double>();
        return *f;
    }
    if (type == "kmm") {
        const auto c = parse_constraint(j.at("constraint").get<std::string>());
        if (!c) throw std::invalid_argument("path json: unknown constraint");
        return KmmPath{kmm_from_json(j.at("latent")), *c};
    }
    throw std::invalid_argument("path json: unknown type '" + type + "'");
}

}  // namespace mvp
