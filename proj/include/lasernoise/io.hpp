#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace lasernoise {

struct CsvTable {
  std::vector<double> col1;
  std::vector<double> col2;
};

// Two-column numeric CSV with a single header row.
CsvTable read_csv_pairs(const std::string& path);
void write_csv_pairs(const std::string& path, const std::string& header,
                     const std::vector<double>& col1, const std::vector<double>& col2);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

std::uint64_t fnv1a64(const std::string& data);

// Every CLI command writes one of these next to its outputs. The digest is
// recomputable from the stored resolved config.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& resolved_config,
                             std::uint64_t seed, const std::vector<std::string>& outputs);

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace lasernoise
