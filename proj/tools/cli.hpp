#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace bandgap::cli {

// Invalid configuration: exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kExitOk = 0, kExitNumerical = 1, kExitConfig = 2;

inline const std::vector<std::string> kCommands = {"homogenize", "bands", "beta", "gaps",
                                                   "rates",      "ids",   "twoscale", "check"};
inline const std::vector<std::string> kModels = {"classical1d",    "difference1d",   "diffdiff1d", "magnetic1d",
                                                 "highcontrast1d", "highcontrast2d", "imperfect2d"};

// TOML file → JSON tree (tables → objects).
nlohmann::json load_toml(const std::string& path);
// Rejects unknown sections and keys.
void validate_keys(const nlohmann::json& cfg);

// Runs one subcommand. `out` receives the result table, `err` diagnostics.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace bandgap::cli
