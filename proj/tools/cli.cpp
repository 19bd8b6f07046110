#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "bandgap/parallel.hpp"
#include "commands.hpp"
#include "toml.hpp"

namespace fs = std::filesystem;

namespace bandgap::cli {

namespace {

const std::map<std::string, std::set<std::string>> kModelKeys = {
    {"classical1d", {"mesh", "a", "a_breaks"}},
    {"difference1d", {"mesh", "d", "d_breaks"}},
    {"diffdiff1d", {"mesh", "a", "a_breaks", "d", "d_breaks"}},
    {"magnetic1d", {"mesh", "potential", "potential_breaks", "v", "v_breaks"}},
    {"highcontrast1d", {"mesh", "inclusion"}},
    {"highcontrast2d", {"s", "cells"}},
    {"imperfect2d", {"s", "cells"}},
};

const std::map<std::string, std::set<std::string>> kSectionKeys = {
    {"output", {"dir", "format"}},
    {"homogenize", {}},
    {"bands", {"eps", "k", "theta_points", "points_per_leg", "reduced"}},
    {"beta", {"lambda_min", "lambda_max", "lambda_points", "reduced"}},
    {"gaps", {"eps", "window", "theta_points", "k", "reduced"}},
    {"rates",
     {"kind", "norm", "eps", "theta_points", "k", "window", "floor", "fem_floor", "seed", "rhs_count", "reduced"}},
    {"ids", {"tau", "lambda", "k", "rays"}},
    {"twoscale", {"input", "eps", "samples", "op", "mask"}},
    {"check", {"theta_points"}},
};

nlohmann::json toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = n.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  if (const auto* v = n.as_string()) return v->get();
  throw ConfigError("unsupported TOML value (dates and times are not accepted)");
}

void json_to_toml(const nlohmann::json& j, toml::table& out);

toml::array json_to_toml_array(const nlohmann::json& j) {
  toml::array a;
  for (const auto& v : j) {
    if (v.is_number_integer())
      a.push_back(v.get<std::int64_t>());
    else if (v.is_number())
      a.push_back(v.get<double>());
    else if (v.is_boolean())
      a.push_back(v.get<bool>());
    else if (v.is_string())
      a.push_back(v.get<std::string>());
    else if (v.is_array())
      a.push_back(json_to_toml_array(v));
  }
  return a;
}

void json_to_toml(const nlohmann::json& j, toml::table& out) {
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      toml::table t;
      json_to_toml(v, t);
      out.insert_or_assign(k, std::move(t));
    } else if (v.is_array()) {
      out.insert_or_assign(k, json_to_toml_array(v));
    } else if (v.is_number_integer()) {
      out.insert_or_assign(k, v.get<std::int64_t>());
    } else if (v.is_number()) {
      out.insert_or_assign(k, v.get<double>());
    } else if (v.is_boolean()) {
      out.insert_or_assign(k, v.get<bool>());
    } else if (v.is_string()) {
      out.insert_or_assign(k, v.get<std::string>());
    }
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

std::string render(const Table& t, const std::string& format) {
  return format == "json" ? table_json(t).dump(2) + "\n" : table_csv(t);
}

// Stages every output file, then moves them into `dir`; on failure nothing is left behind.
void write_outputs(const std::string& dir, const std::string& format, const CommandOutput& res,
                   const nlohmann::json& effective) {
  const fs::path root(dir), stage = root / (".bandgap-staging-" + res.name);
  try {
    fs::create_directories(root);
    fs::remove_all(stage);
    fs::create_directories(stage);
    write_text(stage / (res.name + "." + format), render(res.table, format));
    toml::table tt;
    json_to_toml(effective, tt);
    std::ostringstream cfg;
    cfg << tt << "\n";
    write_text(stage / "config.toml", cfg.str());
    if (res.record) persist(*res.record, stage.string());
    for (const auto& entry : fs::directory_iterator(stage)) {
      const fs::path target = root / entry.path().filename();
      fs::remove_all(target);
      fs::rename(entry.path(), target);
    }
    fs::remove_all(stage);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(stage, ec);
    throw;
  }
}

// Flag → config binding.
struct Binding {
  CLI::Option* opt = nullptr;
  std::string section, key;
  std::function<nlohmann::json()> value;
};

class Flags {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& section, const std::string& key,
           const std::string& help, int expected = -1) {
    auto store = std::make_shared<T>();
    CLI::Option* o = app->add_option(flag, *store, help);
    if (expected > 0) o->expected(expected);
    bindings_.push_back({o, section, key, [store] { return nlohmann::json(*store); }});
  }

  void apply(nlohmann::json& cfg, const std::string& command) const {
    for (const Binding& b : bindings_) {
      if (b.opt->count() == 0) continue;
      const std::string section = b.section == "*" ? command : b.section;
      if (section.empty())
        cfg[b.key] = b.value();
      else
        cfg[section][b.key] = b.value();
    }
  }

 private:
  std::vector<Binding> bindings_;
};

void add_model_flags(CLI::App* sub, Flags& f) {
  f.add<std::string>(sub, "--model", "model", "name", "model name");
  f.add<int>(sub, "--mesh", "model", "mesh", "1D elements per cell");
  f.add<int>(sub, "--cells", "model", "cells", "2D squares per cell side");
  f.add<double>(sub, "--s", "model", "s", "2D inclusion side");
  for (const char* c : {"a", "d", "potential", "v"}) {
    f.add<std::vector<double>>(sub, std::string("--") + c, "model", c, std::string("values of ") + c);
    f.add<std::vector<double>>(sub, std::string("--") + c + "-breaks", "model", std::string(c) + "_breaks",
                               std::string("breakpoints of ") + c);
  }
  f.add<std::vector<double>>(sub, "--inclusion", "model", "inclusion", "1D inclusion [lo, hi]", 2);
}

void add_command_flags(const std::string& cmd, CLI::App* sub, Flags& f) {
  auto opt = [&](const std::string& key) { return "--" + [&] {
                                            std::string s = key;
                                            std::replace(s.begin(), s.end(), '_', '-');
                                            return s;
                                          }(); };
  for (const std::string& key : kSectionKeys.at(cmd)) {
    const std::string flag = opt(key);
    if (key == "eps" || key == "tau")
      f.add<std::vector<double>>(sub, flag, "*", key, key);
    else if (key == "window" || key == "mask")
      f.add<std::vector<double>>(sub, flag, "*", key, key + " [lo, hi]", 2);
    else if (key == "reduced" || key == "fem_floor")
      f.add<bool>(sub, flag, "*", key, key + " (true/false)");
    else if (key == "kind" || key == "norm" || key == "op" || key == "input")
      f.add<std::string>(sub, flag, "*", key, key);
    else if (key == "floor" || key == "lambda" || key == "lambda_min" || key == "lambda_max")
      f.add<double>(sub, flag, "*", key, key);
    else
      f.add<long long>(sub, flag, "*", key, key);
  }
}

}  // namespace

nlohmann::json load_toml(const std::string& path) {
  try {
    return toml_to_json(toml::parse_file(path));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config " << path << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(msg.str());
  }
}

void validate_keys(const nlohmann::json& cfg) {
  if (!cfg.is_object()) throw ConfigError("config must be a table");
  std::set<std::string> model_keys{"name"};
  for (const auto& [m, keys] : kModelKeys) model_keys.insert(keys.begin(), keys.end());
  for (const auto& [section, body] : cfg.items()) {
    if (section == "workers") {
      if (!body.is_number_integer() || body.get<long long>() < 1)
        throw ConfigError("workers must be a positive integer");
      continue;
    }
    const bool is_model = section == "model";
    if (!is_model && !kSectionKeys.count(section)) throw ConfigError("unknown config section '" + section + "'");
    if (!body.is_object()) throw ConfigError("config section '" + section + "' must be a table");
    const std::set<std::string>& allowed = is_model ? model_keys : kSectionKeys.at(section);
    for (const auto& [key, value] : body.items())
      if (!allowed.count(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
  }
  if (cfg.contains("model") && cfg["model"].contains("name")) {
    if (!cfg["model"]["name"].is_string()) throw ConfigError("model.name must be a string");
    const std::string name = cfg["model"]["name"];
    const auto it = kModelKeys.find(name);
    if (it == kModelKeys.end()) throw ConfigError("unknown model '" + name + "'");
    for (const auto& [key, value] : cfg["model"].items())
      if (key != "name" && !it->second.count(key))
        throw ConfigError("key 'model." + key + "' does not apply to model " + name);
  }
  if (cfg.contains("output") && cfg["output"].contains("format")) {
    const auto& f = cfg["output"]["format"];
    if (!f.is_string() || (f != "csv" && f != "json")) throw ConfigError("output.format must be csv or json");
  }
}

const std::map<std::string, std::string> kDescriptions = {
    {"homogenize", "homogenised coefficient or tensor"},
    {"bands", "fiber eigenvalues along a theta grid or the 2D symmetry path"},
    {"beta", "scalar beta function on a lambda grid"},
    {"gaps", "limit gaps against the collective spectrum at one epsilon"},
    {"rates", "convergence-rate sweep over epsilon"},
    {"ids", "integrated density of states, counted vs asymptotic"},
    {"twoscale", "two-scale interpolation of a sampled signal"},
    {"check", "structural constants of a model"},
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Band-gap homogenisation toolkit", "bandgap"};
  app.require_subcommand(1);
  std::string config_path;
  Flags flags;
  std::map<std::string, CLI::App*> subs;
  for (const std::string& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd, kDescriptions.at(cmd));
    sub->add_option("--config", config_path, "TOML config file");
    flags.add<std::string>(sub, "--out", "output", "dir", "output directory");
    flags.add<std::string>(sub, "--format", "output", "format", "csv or json");
    flags.add<long long>(sub, "--workers", "", "workers", "worker threads");
    if (cmd != "twoscale") add_model_flags(sub, flags);
    add_command_flags(cmd, sub, flags);
    subs[cmd] = sub;
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    nlohmann::json cfg = config_path.empty() ? nlohmann::json::object() : load_toml(config_path);
    validate_keys(cfg);
    int workers = cfg.contains("workers") ? cfg["workers"].get<int>() : default_workers();
    if (const char* env = std::getenv("BANDGAP_WORKERS")) {
      const int w = std::atoi(env);
      if (w < 1) throw ConfigError("BANDGAP_WORKERS must be a positive integer");
      workers = w;
    }
    flags.apply(cfg, command);
    validate_keys(cfg);
    if (cfg.contains("workers")) {
      if (!cfg["workers"].is_number_integer() || cfg["workers"].get<long long>() < 1)
        throw ConfigError("workers must be a positive integer");
      if (subs[command]->get_option("--workers")->count()) workers = cfg["workers"].get<int>();
    }
    if (command != "twoscale" && !(cfg.contains("model") && cfg["model"].contains("name")))
      throw ConfigError("no model given (use --model or [model] name)");

    const std::string dir = cfg.value("/output/dir"_json_pointer, std::string());
    const std::string format = cfg.value("/output/format"_json_pointer, std::string("csv"));

    Context ctx(cfg, command, workers);
    const CommandOutput res = run_command(ctx);

    nlohmann::json effective = cfg;
    for (const auto& [section, body] : ctx.effective().items())
      for (const auto& [key, value] : body.items()) effective[section][key] = value;
    effective["output"]["format"] = format;
    if (!dir.empty()) effective["output"]["dir"] = dir;
    effective["workers"] = workers;

    if (!dir.empty()) write_outputs(dir, format, res, effective);
    out << render(res.table, format);
    for (const std::string& n : res.notes) err << n << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bandgap::cli
