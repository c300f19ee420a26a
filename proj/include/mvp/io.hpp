#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace mvp {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Comma-separated, LF line endings, header row first.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& row(const std::vector<double>& values);
    // For rows that lead with a label column.
    CsvWriter& row(std::string_view label, const std::vector<double>& values);
    void comment(std::string_view line);  // '# ...' line

private:
    std::ofstream out_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace mvp
