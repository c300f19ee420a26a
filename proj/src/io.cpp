#include "mvp/io.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace mvp {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return {buf, res.ptr};
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
    return *this;
}

CsvWriter& CsvWriter::row(std::string_view label, const std::vector<double>& values) {
    out_ << label;
    for (double v : values) out_ << ',' << format_double(v);
    out_ << '\n';
    return *this;
}

void CsvWriter::comment(std::string_view line) { out_ << "# " << line << '\n'; }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << content;
}

}  // namespace mvp
