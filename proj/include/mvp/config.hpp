#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key=value configuration with dotted keys (train.lr=1e-3). Every key
/// has a default, so a resolved config always lists the full set.
class Config {
public:
    static Config defaults();

    /// Unknown keys are rejected.
    void set(const std::string& key, const std::string& value);
    /// Lines of key=value; '#' starts a comment. Errors name the line and key.
    void merge_file(const std::filesystem::path& path);
    void merge_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    /// Sorted key=value lines, LF-terminated.
    std::string canonical() const;
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// SHA-1 of "blob <len>\0<content>", as printed by `git hash-object`.
std::string git_blob_sha1(const std::string& content);

}  // namespace mvp
