#pragma once

#include "mvp/benchmarks.hpp"
#include "mvp/config.hpp"
#include "mvp/estimator.hpp"
#include "mvp/path.hpp"
#include "mvp/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mvp {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int usage = 2;
inline constexpr int divergence = 3;
inline constexpr int output_conflict = 4;
inline constexpr int artifact_mismatch = 5;
}  // namespace exit_code

/// Entry point shared by the executable and the in-process tests.
/// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Config resolution, exposed for tests.
TaskSpec task_from_config(const Config& cfg);
/// Replaces interpolant.kind=auto by the task's protocol default.
Interpolant resolve_interpolant(Config& cfg, const TaskSpec& task);
TrainConfig train_config_from(const Config& cfg, Interpolant interp);
VarianceConfig variance_config_from(const Config& cfg, Interpolant interp);
InferenceConfig inference_config_from(const Config& cfg);
/// path.json when set, otherwise path.mode (mvp | fixed:<name>).
PathSchedule path_from_config(const Config& cfg);

/// Throws std::domain_error on NaN or infinity anywhere in the document.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mvp
