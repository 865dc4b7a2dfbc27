#include "lasernoise/io.hpp"

#include <fstream>
#include <sstream>

#include "lasernoise/errors.hpp"

namespace lasernoise {

CsvTable read_csv_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;  // header
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw validation_error(path + ": line " + std::to_string(lineno) + " is not two comma-separated columns");
    }
    try {
      t.col1.push_back(std::stod(line.substr(0, comma)));
      t.col2.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw validation_error(path + ": non-numeric value at line " + std::to_string(lineno));
    }
  }
  if (t.col1.empty()) throw validation_error(path + ": no data rows");
  return t;
}

void write_csv_pairs(const std::string& path, const std::string& header,
                     const std::vector<double>& col1, const std::vector<double>& col2) {
  if (col1.size() != col2.size()) throw validation_error("write_csv_pairs: column size mismatch");
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out.precision(17);
  out << header << '\n';
  for (std::size_t i = 0; i < col1.size(); ++i) out << col1[i] << ',' << col2[i] << '\n';
  if (!out) throw io_error("write failed for " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(path + ": invalid JSON: " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw io_error("write failed for " + path);
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& resolved_config,
                             std::uint64_t seed, const std::vector<std::string>& outputs) {
  nlohmann::json m;
  m["command"] = command;
  m["artifact_version"] = kArtifactVersion;
  m["seed"] = seed;
  m["resolved_config"] = resolved_config;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(resolved_config.dump())));
  m["config_digest"] = std::string("fnv1a64:") + buf;
  m["outputs"] = outputs;
  return m;
}

}  // namespace lasernoise
