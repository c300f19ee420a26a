#include "mvp/cli.hpp"

#include "mvp/io.hpp"
#include "mvp/time_sampler.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

namespace mvp {

namespace {

namespace fs = std::filesystem;

struct CliFailure : std::runtime_error {
    CliFailure(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

void check_finite(const nlohmann::json& j, const std::string& where) {
    if (j.is_number_float() && !std::isfinite(j.get<double>()))
        throw std::domain_error("refusing to write non-finite number at " + where);
    if (j.is_object())
        for (const auto& [k, v] : j.items()) check_finite(v, where + "." + k);
    if (j.is_array())
        for (std::size_t i = 0; i < j.size(); ++i) check_finite(j[i], where + "[" + std::to_string(i) + "]");
}

void prepare_out_dir(const fs::path& dir, bool force) {
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir))
            throw CliFailure(exit_code::output_conflict, "output path '" + dir.string() + "' is not a directory");
        if (!fs::is_empty(dir) && !force)
            throw CliFailure(exit_code::output_conflict,
                             "output directory '" + dir.string() + "' is not empty (use --force to overwrite)");
    } else {
        fs::create_directories(dir);
    }
}

void check_out_file(const fs::path& file, bool force) {
    if (fs::exists(file) && !force)
        throw CliFailure(exit_code::output_conflict,
                         "output file '" + file.string() + "' exists (use --force to overwrite)");
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

class Timer {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Manifest {
    std::string command;
    nlohmann::json metrics = nlohmann::json::object();
    nlohmann::json timing = nlohmann::json::object();

    void write(const fs::path& dir, const Config& cfg) const {
        nlohmann::json config = nlohmann::json::object();
        for (const auto& [k, v] : cfg.values()) config[k] = v;
        write_json(dir / "manifest.json", {{"command", command},
                                           {"seed", cfg.get_u64("seed")},
                                           {"config", config},
                                           {"config_hash", git_blob_sha1(cfg.canonical())},
                                           {"metrics", metrics},
                                           {"timing_seconds", timing}});
    }
};

std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad number '" + item + "'");
        }
    }
    return out;
}

void write_curve(const fs::path& file, const PathSchedule& path, const VarianceConfig& vc, const DataMoments& m) {
    CsvWriter csv(file, {"t", "alpha", "beta", "integrand"});
    for (double t : variance_grid(vc)) {
        const ScheduleEval s = eval_path(path, t);
        csv.row({s.t, s.alpha, s.beta, variance_integrand(s, vc, m)});
    }
}

// ---- commands --------------------------------------------------------------

int cmd_compare_paths(Config& cfg, const fs::path& out_dir, bool force, std::ostream& out) {
    prepare_out_dir(out_dir, force);
    Timer timer;
    Manifest manifest{"compare-paths"};
    const TaskSpec task = task_from_config(cfg);
    const Interpolant interp = resolve_interpolant(cfg, task);
    const DataMoments m = task_moments(task, cfg.get_int("variance.moment_samples"), cfg.get_u64("seed"));
    const VarianceConfig vc = variance_config_from(cfg, interp);
    manifest.timing["moments"] = timer.lap();

    const auto constraint = parse_constraint(cfg.get("path.constraint"));
    if (!constraint) throw ConfigError("config key 'path.constraint': expected affine or spherical");
    OptimizeOptions opt;
    opt.steps = std::max(1, cfg.get_int("path.pretrain_steps"));
    opt.lr = cfg.get_double("path.lr");
    opt.trace_path = (out_dir / "path_trace.csv").string();
    const auto optimized = optimize_path(KmmPath{init_diverse(cfg.get_int("path.K")), *constraint}, vc, m, opt);
    write_json(out_dir / "path.json", path_to_json(optimized.path));
    manifest.timing["optimize"] = timer.lap();

    std::vector<PathSchedule> paths;
    for (auto kind : kAllFixedKinds) paths.push_back(FixedSchedule{kind});
    paths.push_back(optimized.path);

    std::vector<double> clamps{vc.t_clamp};
    if (!cfg.get("variance.t_clamp_sweep").empty())
        clamps = parse_double_list("variance.t_clamp_sweep", cfg.get("variance.t_clamp_sweep"));

    std::ofstream table(out_dir / "variance.csv", std::ios::binary);
    table << "schedule,t_clamp,variance\n";
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& p : paths) {
        for (double c : clamps) {
            VarianceConfig v = vc;
            v.t_clamp = c;
            const double value = path_variance(p, v, m);
            table << path_name(p) << ',' << format_double(c) << ',' << format_double(value) << '\n';
            if (c == clamps.front()) metrics["variance." + path_name(p)] = value;
        }
        write_curve(out_dir / ("curve_" + path_name(p) + ".csv"), p, vc, m);
    }
    table.close();
    manifest.timing["evaluate"] = timer.lap();
    manifest.metrics = metrics;
    manifest.metrics["mvp.initial_variance"] = optimized.initial_variance;
    manifest.write(out_dir, cfg);
    out << "wrote " << (out_dir / "variance.csv").string() << '\n';
    return exit_code::ok;
}

int cmd_train(Config& cfg, const fs::path& out_dir, bool force, std::ostream& out) {
    prepare_out_dir(out_dir, force);
    Timer timer;
    Manifest manifest{"train"};
    const TaskSpec task = task_from_config(cfg);
    const Interpolant interp = resolve_interpolant(cfg, task);
    const TrainConfig tc = train_config_from(cfg, interp);
    const PathSchedule path = path_from_config(cfg);

    TrainResult res = [&] {
        try {
            return train(task, path, tc);
        } catch (const TrainingDiverged& e) {
            throw CliFailure(exit_code::divergence, e.what());
        }
    }();
    manifest.timing["train"] = timer.lap();

    res.model.save(out_dir / "model.bin");
    write_loss_trace(res.trace, out_dir / "loss_trace.csv");
    write_json(out_dir / "path.json", path_to_json(res.path));
    write_table_csv(build_table(res.path, variance_config(tc), res.moments, tc.sampler_eps, tc.sampler_bins),
                    out_dir / "time_sampler.csv");

    double tail = 0.0;
    const std::size_t n_tail = std::min<std::size_t>(100, res.trace.size());
    for (std::size_t i = res.trace.size() - n_tail; i < res.trace.size(); ++i) tail += res.trace[i].cjsm;
    if (n_tail) manifest.metrics["cjsm_last100"] = tail / n_tail;
    manifest.metrics["path_variance.initial"] = res.initial_path_variance;
    manifest.metrics["path_variance.final"] = res.final_path_variance;
    manifest.metrics["moments"] = {{"d", res.moments.d}, {"c0", res.moments.c0}, {"c1", res.moments.c1},
                                   {"c01", res.moments.c01}};
    if (const auto* k = std::get_if<KmmPath>(&res.path)) {
        nlohmann::json modes = nlohmann::json::array();
        for (double v : component_modes(constrain(k->latent))) {
            if (std::isfinite(v)) modes.push_back(v);
            else modes.push_back(nullptr);
        }
        manifest.metrics["kmm_component_modes"] = modes;
    }
    manifest.timing["write"] = timer.lap();
    manifest.write(out_dir, cfg);
    out << "wrote " << (out_dir / "model.bin").string() << '\n';
    return exit_code::ok;
}

int cmd_estimate(Config& cfg, const std::string& checkpoint, const std::string& mode, bool analytic,
                 const fs::path& out_dir, bool force, std::ostream& out) {
    if (mode != "mi" && mode != "nll") throw ConfigError("--mode must be mi or nll");
    if (!analytic && checkpoint.empty()) throw ConfigError("--checkpoint is required unless --analytic-score is given");
    if (!analytic && !fs::exists(checkpoint))
        throw CliFailure(exit_code::artifact_mismatch, "checkpoint '" + checkpoint + "' not found");
    prepare_out_dir(out_dir, force);
    Timer timer;
    Manifest manifest{"estimate"};
    const TaskSpec task = task_from_config(cfg);
    const Interpolant interp = resolve_interpolant(cfg, task);
    const InferenceConfig ic = inference_config_from(cfg);

    std::optional<JointScoreModel> model;
    std::unique_ptr<TimeScoreFunction> score;
    if (analytic) {
        if (!task.gaussian_sigma)
            throw ConfigError("--analytic-score needs a Gaussian task (gaussian_block, gaussian_scale, edge_singular)");
        score = std::make_unique<GaussianTimeScore>(*task.gaussian_sigma, path_from_config(cfg), interp,
                                                    DdbiNoiseConfig{cfg.get_double("interpolant.gamma"),
                                                                    cfg.get_double("interpolant.epsilon")});
    } else {
        try {
            model = JointScoreModel::load(checkpoint);
        } catch (const std::exception& e) {
            throw CliFailure(exit_code::artifact_mismatch, e.what());
        }
        if (model->dim() != task.dim)
            throw CliFailure(exit_code::artifact_mismatch,
                             "checkpoint '" + checkpoint + "' has d=" + std::to_string(model->dim()) +
                                 " but task '" + task.name + "' has d=" + std::to_string(task.dim));
        score = std::make_unique<ModelTimeScore>(*model);
    }

    Rng rng(cfg.get_u64("seed"), "estimate.eval");
    const Samples x = task.sample_p1(cfg.get_int("estimate.samples"), rng);
    const Vector lr = log_ratios(*score, x, ic);
    manifest.timing["integrate"] = timer.lap();

    nlohmann::json result = {{"mode", mode}, {"I", ic.steps}, {"rule", to_string(ic.rule)},
                             {"samples", x.rows()}};
    if (mode == "mi") {
        const MiEstimate e = mean_and_stderr(lr);
        result["estimate"] = e.mi;
        result["std_err"] = e.std_err;
        if (task.has_mi_oracle()) {
            result["oracle"] = task.oracle_value;
            result["abs_error"] = std::abs(e.mi - task.oracle_value);
        }
    } else {
        Vector nll(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) nll[i] = -(lr[i] + standard_normal_log_pdf(x.row(i).transpose()));
        const MiEstimate e = mean_and_stderr(nll);
        result["estimate"] = e.mi;
        result["std_err"] = e.std_err;
        if (task.log_ratio) {
            double truth = 0.0;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const Vector xi = x.row(i).transpose();
                truth -= task.log_ratio(xi) + standard_normal_log_pdf(xi);
            }
            truth /= static_cast<double>(x.rows());
            result["oracle"] = truth;
            result["abs_error"] = std::abs(e.mi - truth);
        }
    }
    write_json(out_dir / "estimate.json", result);
    {
        CsvWriter csv(out_dir / "log_ratios.csv", {"sample_index", "log_ratio"});
        for (Eigen::Index i = 0; i < lr.size(); ++i) csv.row({static_cast<double>(i), lr[i]});
    }
    manifest.metrics = result;
    manifest.timing["write"] = timer.lap();
    manifest.write(out_dir, cfg);
    out << result.dump() << '\n';
    return exit_code::ok;
}

int cmd_export_schedule(Config& cfg, const std::string& path_arg, int grid, const fs::path& out_file, bool force,
                        std::ostream& out) {
    if (grid < 2) throw ConfigError("--grid must be >= 2");
    PathSchedule path;
    if (path_arg.size() > 5 && path_arg.substr(path_arg.size() - 5) == ".json") {
        try {
            path = path_from_json(nlohmann::json::parse(read_file(path_arg)));
        } catch (const std::exception& e) {
            throw ConfigError("cannot parse path file '" + path_arg + "': " + e.what());
        }
    } else if (path_arg == "mvp") {
        const auto c = parse_constraint(cfg.get("path.constraint"));
        if (!c) throw ConfigError("config key 'path.constraint': expected affine or spherical");
        path = KmmPath{init_diverse(cfg.get_int("path.K")), *c};
    } else if (auto f = parse_fixed_schedule(path_arg)) {
        path = *f;
    } else {
        throw ConfigError("unknown schedule '" + path_arg + "' (expected linear|vp|cosine|follmer|trig|mvp|<file>.json)");
    }
    check_out_file(out_file, force);
    const double lo = cfg.get_double("variance.t_clamp"), hi = 1.0 - lo;
    CsvWriter csv(out_file, {"t", "alpha", "beta", "dalpha", "dbeta"});
    for (int i = 0; i < grid; ++i) {
        const double t = i + 1 == grid ? hi : lo + (hi - lo) * i / (grid - 1);
        const ScheduleEval s = eval_path(path, t);
        csv.row({s.t, s.alpha, s.beta, s.dalpha, s.dbeta});
    }
    out << "wrote " << out_file.string() << '\n';
    return exit_code::ok;
}

int cmd_sample(Config& cfg, long n, bool product, const fs::path& out_file, bool force, std::ostream& out) {
    if (n < 1) throw ConfigError("--n must be >= 1");
    check_out_file(out_file, force);
    const TaskSpec task = task_from_config(cfg);
    export_task_samples(task, !product, n, cfg.get_u64("seed"), out_file);
    out << "wrote " << out_file.string() << '\n';
    return exit_code::ok;
}

}  // namespace

// ---- config resolution --------------------------------------------------------

static TaskSpec task_from_config_unchecked(const Config& cfg) {
    const std::string name = cfg.get("task.name");
    TaskSpec task;
    if (name == "gaussian_block") task = gaussian_block_task(cfg.get_int("task.dim"), cfg.get_double("task.rho"));
    else if (name == "gaussian_scale") task = gaussian_scale_task(cfg.get_int("task.dim"), cfg.get_double("task.sigma1_sq"));
    else if (name == "edge_singular") task = edge_singular_task(cfg.get_double("task.rho"));
    else if (name == "halfcube") task = halfcube_task(cfg.get_double("task.rho"));
    else if (name == "asinh") task = asinh_task(cfg.get_double("task.rho"));
    else if (name == "additive_noise") task = additive_noise_task(cfg.get_double("task.eps"));
    else if (name == "gamma_exponential") task = gamma_exponential_task(cfg.get_double("task.rho"));
    else if (auto toy = parse_toy2d(name)) task = toy2d_task(*toy);
    else if (name == "tabular") {
        if (cfg.get("task.csv").empty()) throw ConfigError("task 'tabular' needs task.csv");
        task = load_tabular_csv(cfg.get("task.csv"), cfg.get_bool("task.standardize"));
    } else {
        throw ConfigError("config key 'task.name': unknown task '" + name + "'");
    }
    const auto pre = parse_preprocess(cfg.get("task.preprocess"));
    if (!pre) throw ConfigError("config key 'task.preprocess': expected none|standardize|log_standardize");
    return with_preprocessing(std::move(task), *pre, cfg.get_u64("seed"));
}

TaskSpec task_from_config(const Config& cfg) {
    try {
        return task_from_config_unchecked(cfg);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("task data: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("task parameters: ") + e.what());
    }
}

Interpolant resolve_interpolant(Config& cfg, const TaskSpec& task) {
    const auto& kind = cfg.get("interpolant.kind");
    if (kind == "auto") {
        cfg.set("interpolant.kind", std::string(to_string(task.interpolant)));
        return task.interpolant;
    }
    const auto i = parse_interpolant(kind);
    if (!i) throw ConfigError("config key 'interpolant.kind': expected auto, di or ddbi");
    return *i;
}

VarianceConfig variance_config_from(const Config& cfg, Interpolant interp) {
    VarianceConfig v;
    v.interpolant = interp;
    v.noise = {cfg.get_double("interpolant.gamma"), cfg.get_double("interpolant.epsilon")};
    v.grid_points = cfg.get_int("variance.grid_points");
    v.t_clamp = cfg.get_double("variance.t_clamp");
    v.monte_carlo = cfg.get_bool("variance.monte_carlo");
    v.mc_samples = cfg.get_int("variance.mc_samples");
    v.mc_seed = cfg.get_u64("seed");
    if (v.grid_points < 16) throw ConfigError("config key 'variance.grid_points': must be >= 16");
    if (!(v.t_clamp > 0.0 && v.t_clamp < 0.5)) throw ConfigError("config key 'variance.t_clamp': must be in (0, 0.5)");
    return v;
}

TrainConfig train_config_from(const Config& cfg, Interpolant interp) {
    TrainConfig t;
    t.batch_size = cfg.get_int("train.batch_size");
    t.steps = cfg.get_int("train.steps");
    t.lr = cfg.get_double("train.lr");
    const auto& decay = cfg.get("train.lr_decay");
    if (decay == "cosine") t.lr_decay = LrDecay::Cosine;
    else if (decay == "none") t.lr_decay = LrDecay::None;
    else throw ConfigError("config key 'train.lr_decay': expected cosine or none");
    t.path_update_every = cfg.get_int("train.path_update_every");
    t.uwso_temperature = cfg.get_double("train.uwso_temperature");
    t.uwso_eps = cfg.get_double("train.uwso_eps");
    t.seed = cfg.get_u64("seed");
    t.hidden = cfg.get_int_list("train.hidden");
    t.interpolant = interp;
    t.noise = {cfg.get_double("interpolant.gamma"), cfg.get_double("interpolant.epsilon")};
    const auto& form = cfg.get("interpolant.target");
    if (form == "unit_noise") t.target_form = DdbiTargetForm::UnitNoise;
    else if (form == "printed") t.target_form = DdbiTargetForm::Printed;
    else throw ConfigError("config key 'interpolant.target': expected unit_noise or printed");
    t.path_pretrain_steps = cfg.get_int("path.pretrain_steps");
    t.path_lr = cfg.get_double("path.lr");
    const VarianceConfig v = variance_config_from(cfg, interp);
    t.variance_grid_points = v.grid_points;
    t.variance_t_clamp = v.t_clamp;
    t.variance_monte_carlo = v.monte_carlo;
    t.variance_mc_samples = v.mc_samples;
    t.sampler_bins = cfg.get_int("sampler.bins");
    t.sampler_eps = cfg.get_double("sampler.eps_w");
    t.sampler_jitter = cfg.get_bool("sampler.jitter");
    t.moment_samples = cfg.get_int("variance.moment_samples");
    if (t.batch_size < 1 || t.steps < 0 || !(t.lr > 0.0) || t.path_update_every < 0)
        throw ConfigError("train.*: batch_size and lr must be positive, steps and path_update_every non-negative");
    return t;
}

InferenceConfig inference_config_from(const Config& cfg) {
    InferenceConfig ic;
    ic.steps = cfg.get_int("estimate.steps");
    const auto rule = parse_rule(cfg.get("estimate.rule"));
    if (!rule) throw ConfigError("config key 'estimate.rule': expected trapezoid or paper_riemann");
    ic.rule = *rule;
    ic.chunk = cfg.get_int("estimate.chunk");
    if (ic.steps < 8) throw ConfigError("config key 'estimate.steps': must be >= 8");
    if (cfg.get_int("estimate.samples") < 1) throw ConfigError("config key 'estimate.samples': must be >= 1");
    return ic;
}

PathSchedule path_from_config(const Config& cfg) {
    if (!cfg.get("path.json").empty()) {
        const auto file = cfg.get("path.json");
        if (!fs::exists(file)) throw CliFailure(exit_code::artifact_mismatch, "path file '" + file + "' not found");
        try {
            return path_from_json(nlohmann::json::parse(read_file(file)));
        } catch (const std::exception& e) {
            throw CliFailure(exit_code::artifact_mismatch, "cannot parse path file '" + file + "': " + e.what());
        }
    }
    const auto& mode = cfg.get("path.mode");
    if (mode == "mvp") {
        const auto c = parse_constraint(cfg.get("path.constraint"));
        if (!c) throw ConfigError("config key 'path.constraint': expected affine or spherical");
        const int K = cfg.get_int("path.K");
        if (K < 1 || K > 64) throw ConfigError("config key 'path.K': must be in [1, 64]");
        return KmmPath{init_diverse(K), *c};
    }
    if (mode.rfind("fixed:", 0) == 0) {
        if (auto f = parse_fixed_schedule(mode.substr(6))) return *f;
    }
    throw ConfigError("config key 'path.mode': expected mvp or fixed:<linear|vp|cosine|follmer|trig>, got '" + mode + "'");
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    check_finite(j, "$");
    write_file(path, j.dump(2) + "\n");
}

// ---- entry point --------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Minimum variance path density-ratio estimation"};
    app.require_subcommand(1);

    std::string config_file;
    std::vector<std::string> overrides;
    std::string seed;
    bool force = false;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "key=value config file");
        sub->add_option("--set", overrides, "override one config key, key=value (repeatable)");
        sub->add_option("--seed", seed, "root seed (same as --set seed=N)");
        sub->add_flag("--force", force, "write into a non-empty output location");
    };

    std::string task, interpolant, constraint, out_dir, path_mode, checkpoint, mode, path_arg, out_file;
    bool analytic = false, product = false;
    int grid = 1001;
    long n_samples = 1000;

    auto* compare = app.add_subcommand("compare-paths", "path variance of the fixed schedules and the optimized path");
    add_common(compare);
    compare->add_option("--task", task, "task name")->required();
    compare->add_option("--interpolant", interpolant, "di | ddbi (default: the task's protocol)");
    compare->add_option("--out", out_dir, "output directory")->required();

    auto* train_cmd = app.add_subcommand("train", "train a joint score model");
    add_common(train_cmd);
    train_cmd->add_option("--task", task, "task name")->required();
    train_cmd->add_option("--path", path_mode, "mvp | fixed:<name>");
    train_cmd->add_option("--interpolant", interpolant, "di | ddbi");
    train_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* estimate = app.add_subcommand("estimate", "log-ratio, MI or NLL estimation");
    add_common(estimate);
    estimate->add_option("--checkpoint", checkpoint, "model checkpoint (model.bin)");
    estimate->add_option("--task", task, "task name")->required();
    estimate->add_option("--mode", mode, "mi | nll")->required();
    estimate->add_flag("--analytic-score", analytic, "use the exact Gaussian time score instead of a model");
    estimate->add_option("--path", path_mode, "mvp | fixed:<name> (analytic score only)");
    estimate->add_option("--interpolant", interpolant, "di | ddbi");
    estimate->add_option("--out", out_dir, "output directory")->required();

    auto* export_cmd = app.add_subcommand("export-schedule", "write (t, alpha, beta, dalpha, dbeta) on a grid");
    add_common(export_cmd);
    export_cmd->add_option("--path", path_arg, "linear|vp|cosine|follmer|trig|mvp or a path .json")->required();
    export_cmd->add_option("--constraint", constraint, "affine | spherical (for mvp)");
    export_cmd->add_option("--grid", grid, "number of grid points");
    export_cmd->add_option("--out", out_file, "output CSV")->required();

    auto* sample = app.add_subcommand("sample", "export task samples to CSV");
    add_common(sample);
    sample->add_option("--task", task, "task name")->required();
    sample->add_option("--n", n_samples, "number of rows");
    sample->add_flag("--product", product, "draw from p0 instead of p1");
    sample->add_option("--out", out_file, "output CSV")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return exit_code::usage;
    }

    try {
        Config cfg = Config::defaults();
        if (!config_file.empty()) cfg.merge_file(config_file);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!seed.empty()) cfg.set("seed", seed);
        if (!task.empty()) cfg.set("task.name", task);
        if (!path_mode.empty()) cfg.set("path.mode", path_mode);

        if (compare->parsed()) {
            if (!interpolant.empty()) cfg.set("interpolant.kind", interpolant);
            return cmd_compare_paths(cfg, out_dir, force, out);
        }
        if (train_cmd->parsed()) {
            if (!interpolant.empty()) cfg.set("interpolant.kind", interpolant);
            return cmd_train(cfg, out_dir, force, out);
        }
        if (estimate->parsed()) {
            if (!interpolant.empty()) cfg.set("interpolant.kind", interpolant);
            return cmd_estimate(cfg, checkpoint, mode, analytic, out_dir, force, out);
        }
        if (export_cmd->parsed()) {
            if (!constraint.empty()) cfg.set("path.constraint", constraint);
            return cmd_export_schedule(cfg, path_arg, grid, out_file, force, out);
        }
        if (sample->parsed()) return cmd_sample(cfg, n_samples, product, out_file, force, out);
    } catch (const CliFailure& e) {
        err << "error: " << e.what() << '\n';
        return e.code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const TrainingDiverged& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::divergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::failure;
    }
    return exit_code::usage;
}

}  // namespace mvp
