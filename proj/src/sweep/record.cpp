#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bandgap/sweep.hpp"

namespace fs = std::filesystem;

namespace bandgap {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json fit_json(const RateFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"points", f.points},
          {"flags", f.flags}};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw SweepError("cannot open " + p.string() + " for writing");
  out << text;
  if (!out) throw SweepError("write failed: " + p.string());
}

}  // namespace

nlohmann::json RunRecord::to_json() const {
  nlohmann::json t = nlohmann::json::object(), f = nlohmann::json::object();
  for (const auto& [name, table] : tables) t[name] = {{"columns", table.columns}, {"rows", table.rows}};
  for (const auto& [name, fit] : fits) f[name] = fit_json(fit);
  return {{"schema_version", kSchemaVersion},
          {"config", config},
          {"tables", t},
          {"fits", f},
          {"meta", {{"timestamp", timestamp}, {"code_version", code_version}}}};
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion) throw SweepError("unsupported record schema version");
  RunRecord r;
  r.config = j.at("config");
  for (const auto& [name, t] : j.at("tables").items())
    r.tables[name] = {t.at("columns").get<std::vector<std::string>>(), t.at("rows").get<std::vector<RVec>>()};
  for (const auto& [name, f] : j.at("fits").items()) {
    RateFit fit;
    fit.slope = f.at("slope");
    fit.intercept = f.at("intercept");
    fit.r_squared = f.at("r_squared");
    fit.points = f.at("points");
    fit.flags = f.at("flags").get<std::vector<std::string>>();
    r.fits[name] = fit;
  }
  r.timestamp = j.at("meta").at("timestamp");
  r.code_version = j.at("meta").at("code_version");
  return r;
}

Table rates_table(const SweepResult& r) {
  Table t{{"epsilon", "error", "error_floor_subtracted"}, {}};
  for (const SweepPoint& p : r.points) t.rows.push_back({p.eps, p.error, p.error_floor_subtracted});
  return t;
}

Table gap_table(const GapReport& r) {
  Table t{{"gap_lo", "gap_hi", "observed_lo", "observed_hi", "epsilon"}, {}};
  for (const GapEntry& g : r.gaps) {
    const double nan = std::nan("");
    t.rows.push_back({g.limit.lo, g.limit.hi, g.found ? g.observed.lo : nan, g.found ? g.observed.hi : nan, r.eps});
  }
  return t;
}

Table bands_table(const std::vector<RVec>& grid, const std::vector<RVec>& eigenvalues) {
  Table t;
  const int dim = grid.empty() ? 1 : int(grid[0].size());
  for (int j = 0; j < dim; ++j) t.columns.push_back("theta_" + std::to_string(j + 1));
  t.columns.push_back("k");
  t.columns.push_back("lambda");
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t k = 0; k < eigenvalues[i].size(); ++k) {
      RVec row = grid[i];
      row.push_back(double(k + 1));
      row.push_back(eigenvalues[i][k]);
      t.rows.push_back(std::move(row));
    }
  return t;
}

std::string write_csv(const Table& t) {
  std::string s;
  for (std::size_t c = 0; c < t.columns.size(); ++c) s += (c ? "," : "") + t.columns[c];
  s += "\n";
  for (const RVec& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) s += (c ? "," : "") + fmt(row[c]);
    s += "\n";
  }
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// FNV-1a over the canonical dump.
std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string persist(const RunRecord& record, const std::string& dir) {
  std::string model = record.config.value("model", std::string("run"));
  std::string name = model;
  if (record.config.contains("eps") && record.config["eps"].is_array() && !record.config["eps"].empty()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_eps%g", record.config["eps"].back().get<double>());
    name += buf;
  }
  name += "_" + config_hash(record.config).substr(0, 12);
  const fs::path root(dir), target = root / name, staging = root / ("." + name + ".partial");
  try {
    fs::create_directories(root);
    fs::remove_all(staging);
    fs::create_directories(staging);
    write_file(staging / "record.json", record.to_json().dump(2) + "\n");
    for (const auto& [table, t] : record.tables) write_file(staging / (table + ".csv"), write_csv(t));
    fs::remove_all(target);
    fs::rename(staging, target);
  } catch (const fs::filesystem_error& e) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw SweepError(std::string("persist failed: ") + e.what());
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  return target.string();
}

RunRecord load_record(const std::string& run_dir) {
  std::ifstream in(fs::path(run_dir) / "record.json");
  if (!in) throw SweepError("cannot read record.json in " + run_dir);
  return RunRecord::from_json(nlohmann::json::parse(in));
}

}  // namespace bandgap
