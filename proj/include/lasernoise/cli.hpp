#pragma once

#include <string>

#include <json.hpp>

namespace lasernoise {

// Command implementations behind the CLI binary; each writes its outputs
// plus a manifest into out_dir and returns the manifest. Overrides with
// negative/zero values mean "use the config value".
nlohmann::json cmd_synth(const nlohmann::json& config, const std::string& out_dir);
nlohmann::json cmd_heterodyne(const nlohmann::json& config, const std::string& out_dir);
nlohmann::json cmd_fit(const std::string& data_csv, const std::string& meta_json,
                       std::size_t n_bumps, const std::string& out_dir);
nlohmann::json cmd_simulate(nlohmann::json config, const std::string& out_dir,
                            long long trials_override = 0, long long seed_override = -1);
nlohmann::json cmd_analytic(const nlohmann::json& query, const std::string& out_dir);

// Full argv interface; maps errors to exit codes
// (0 ok, 2 validation, 3 numerical, 4 io).
int run_cli(int argc, char** argv);

}  // namespace lasernoise
