#pragma once

#include "mahl/field_core.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace mahl {

/// shortest round-trip decimal formatting (std::to_chars); deterministic
std::string format_double(double x);

using CsvCell = std::variant<std::string, double, long long, bool>;

/// Deterministic CSV writer; doubles via format_double.
class CsvWriter {
  public:
    CsvWriter(std::filesystem::path path, std::vector<std::string> header);
    void row(const std::vector<CsvCell>& cells);
    void close();
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
    std::string buffer_;
    std::size_t columns_;
    bool closed_ = false;
};

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Collects written artifacts and emits manifest.json (content hashes,
/// versions) plus timings.json (excluded from determinism comparisons).
class RunManifest {
  public:
    RunManifest(std::filesystem::path out_dir, std::string command);
    void add_artifact(const std::filesystem::path& path);
    void add_timing(const std::string& name, double seconds);
    void set_config(const json& resolved);
    void write();
    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    std::string command_;
    json config_;
    std::vector<std::filesystem::path> artifacts_;
    json timings_ = json::object();
};

void write_json_file(const std::filesystem::path& path, const json& j);
json read_json_file(const std::filesystem::path& path);

} // namespace mahl
