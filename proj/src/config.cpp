#include "mvp/config.hpp"

#include "mvp/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <sstream>

namespace mvp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

}  // namespace

Config Config::defaults() {
    Config c;
    c.values_ = {
        {"seed", "0"},
        {"task.name", "gaussian_block"},
        {"task.dim", "2"},
        {"task.rho", "0.5"},
        {"task.eps", "0.25"},
        {"task.sigma1_sq", "4"},
        {"task.csv", ""},
        {"task.standardize", "true"},
        {"task.preprocess", "none"},
        {"interpolant.kind", "auto"},
        {"interpolant.gamma", "1"},
        {"interpolant.epsilon", "0.001"},
        {"interpolant.target", "unit_noise"},
        {"path.mode", "mvp"},
        {"path.constraint", "spherical"},
        {"path.K", "5"},
        {"path.lr", "10"},
        {"path.pretrain_steps", "200"},
        {"path.json", ""},
        {"variance.grid_points", "1000"},
        {"variance.t_clamp", "1e-05"},
        {"variance.t_clamp_sweep", ""},
        {"variance.monte_carlo", "false"},
        {"variance.mc_samples", "1000"},
        {"variance.moment_samples", "100000"},
        {"sampler.bins", "1000"},
        {"sampler.eps_w", "0.01"},
        {"sampler.jitter", "false"},
        {"train.batch_size", "512"},
        {"train.steps", "5000"},
        {"train.lr", "0.001"},
        {"train.lr_decay", "cosine"},
        {"train.path_update_every", "50"},
        {"train.uwso_temperature", "2"},
        {"train.uwso_eps", "1e-08"},
        {"train.hidden", "128,128"},
        {"estimate.steps", "1000"},
        {"estimate.rule", "trapezoid"},
        {"estimate.samples", "10000"},
        {"estimate.chunk", "4096"},
    };
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
}

void Config::merge_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        try {
            set(key, trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void Config::merge_file(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception&) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    merge_text(text, path.string());
}

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

double Config::get_double(const std::string& key) const {
    const auto& v = get(key);
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "a number");
    return out;
}

int Config::get_int(const std::string& key) const {
    const auto& v = get(key);
    int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "an integer");
    return out;
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const auto& v = get(key);
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
        bad_value(key, v, "a non-negative integer");
    return out;
}

bool Config::get_bool(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, v, "true or false");
}

std::vector<int> Config::get_int_list(const std::string& key) const {
    const auto& v = get(key);
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        auto end = v.find(',', start);
        if (end == std::string::npos) end = v.size();
        const std::string item = trim(v.substr(start, end - start));
        int x = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), x);
        if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
            bad_value(key, v, "a comma-separated list of integers");
        out.push_back(x);
        start = end + 1;
    }
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
}

std::string git_blob_sha1(const std::string& content) {
    const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
        throw std::runtime_error("sha1 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

}  // namespace mvp
