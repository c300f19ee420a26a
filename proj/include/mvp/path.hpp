#pragma once

#include "mvp/kmm.hpp"
#include "mvp/schedules.hpp"

#include <string>
#include <variant>

namespace mvp {

/// Learnable path: KMM latent parameters plus the coupling used to derive beta.
struct KmmPath {
    KmmLatentParams latent;
    Constraint constraint = Constraint::Spherical;
};

/// Either a closed-form baseline or a KMM path. Everything downstream of the
/// schedule only ever sees ScheduleEval values.
using PathSchedule = std::variant<FixedSchedule, KmmPath>;

ScheduleEval eval_path(const PathSchedule& path, double t);

/// "linear", "vp", ... for fixed paths; "mvp" for KMM paths.
std::string path_name(const PathSchedule& path);

/// Path description as JSON: {"type":"fixed","name":...} or
/// {"type":"kmm","constraint":...,"latent":{...}}.
nlohmann::json path_to_json(const PathSchedule& path);
PathSchedule path_from_json(const nlohmann::json& j);

}  // namespace mvp
