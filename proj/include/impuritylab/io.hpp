#pragma once

#include <charconv>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "impuritylab/common.hpp"

namespace impuritylab {

inline constexpr const char* code_version = "0.1.0";

// Locale-independent number formatting: shortest round-trip form, switching
// to scientific notation below 1e-4 in magnitude. std::to_chars never looks
// at the locale, so the decimal separator is always '.'.
inline std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  const bool sci = std::abs(x) < 1e-4;
  const auto res = sci ? std::to_chars(buf, buf + sizeof(buf), x,
                                       std::chars_format::scientific)
                       : std::to_chars(buf, buf + sizeof(buf), x,
                                       std::chars_format::general);
  return std::string(buf, res.ptr);
}

inline std::string format_number(int x) { return std::to_string(x); }

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) out += ',';
      out += header[c];
    }
    out += '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        out += row[c];
      }
      out += '\n';
    }
    return out;
  }
};

// FNV-1a 64-bit, used for the per-output checksums in the manifest.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// Collects written files and emits manifest.json once at the end of a run.
class RunRecorder {
 public:
  RunRecorder(std::filesystem::path dir, nlohmann::json config_echo)
      : dir_(std::move(dir)), config_(std::move(config_echo)),
        started_(iso_timestamp()) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec)
      throw resource_error("cannot create output directory " + dir_.string() +
                           ": " + ec.message());
  }

  const std::filesystem::path& dir() const { return dir_; }

  void write_file(const std::string& name, const std::string& contents) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw resource_error("cannot open " + path.string() + " for writing");
    out << contents;
    out.close();
    if (!out) throw resource_error("write failed for " + path.string());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(contents)));
    checksums_[name] = buf;
  }

  void write_csv(const std::string& name, const CsvTable& table) {
    write_file(name, table.to_string());
  }

  void write_json(const std::string& name, const nlohmann::json& j) {
    write_file(name, j.dump(2) + "\n");
  }

  void finalize() {
    nlohmann::json manifest;
    manifest["config"] = config_;
    manifest["version"] = code_version;
    manifest["started"] = started_;
    manifest["finished"] = iso_timestamp();
    manifest["outputs"] = checksums_;
    const auto path = dir_ / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw resource_error("cannot open " + path.string() + " for writing");
    out << manifest.dump(2) << "\n";
  }

 private:
  std::filesystem::path dir_;
  nlohmann::json config_;
  std::string started_;
  std::map<std::string, std::string> checksums_;
};

}  // namespace impuritylab
