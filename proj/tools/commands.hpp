#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bandgap/sweep.hpp"
#include "cli.hpp"

namespace bandgap::cli {

// Merged configuration plus a record of every value a command read.
class Context {
 public:
  Context(nlohmann::json cfg, std::string command, int workers)
      : cfg_(std::move(cfg)), command_(std::move(command)), workers_(workers) {}

  const std::string& command() const { return command_; }
  int workers() const { return workers_; }
  const nlohmann::json& effective() const { return effective_; }

  double num(const std::string& section, const std::string& key, double def);
  int integer(const std::string& section, const std::string& key, int def);
  bool flag(const std::string& section, const std::string& key, bool def);
  std::string str(const std::string& section, const std::string& key, const std::string& def);
  RVec vec(const std::string& section, const std::string& key, const RVec& def);
  bool has(const std::string& section, const std::string& key) const;

  // Shorthands for the active command's section.
  double num(const std::string& key, double def) { return num(command_, key, def); }
  int integer(const std::string& key, int def) { return integer(command_, key, def); }
  bool flag(const std::string& key, bool def) { return flag(command_, key, def); }
  std::string str(const std::string& key, const std::string& def) { return str(command_, key, def); }
  RVec vec(const std::string& key, const RVec& def) { return vec(command_, key, def); }

  void set_effective(const std::string& section, const std::string& key, const nlohmann::json& v) {
    effective_[section][key] = v;
  }

 private:
  const nlohmann::json* find(const std::string& section, const std::string& key) const;
  nlohmann::json cfg_, effective_ = nlohmann::json::object();
  std::string command_;
  int workers_;
};

struct CommandOutput {
  std::string name;  // file stem of the table
  Table table;
  std::optional<RunRecord> record;
  std::vector<std::string> notes;  // diagnostics for stderr
};

CommandOutput run_command(Context& ctx);

std::string table_csv(const Table& t);
nlohmann::json table_json(const Table& t);

}  // namespace bandgap::cli
