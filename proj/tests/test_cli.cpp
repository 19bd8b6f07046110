#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bandgap/models1d.hpp"
#include "bandgap/rng.hpp"
#include "bandgap/twoscale.hpp"
#include "cli.hpp"
#include "commands.hpp"
#include "doctest.h"

using namespace bandgap;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// CSV with one header line; "nan" cells parse to NaN.
Table parse_csv(const std::string& text) {
  Table t;
  std::stringstream ss(text);
  std::string line, cell;
  std::getline(ss, line);
  std::stringstream hs(line);
  while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    RVec row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    t.rows.push_back(row);
  }
  return t;
}

Table parse_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Table t;
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& r : j.at("rows")) {
    RVec row;
    for (const auto& x : r) row.push_back(x.is_null() ? std::nan("") : x.get<double>());
    t.rows.push_back(row);
  }
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same(double a, double b, double rel) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::fabs(a - b) <= rel * std::max(1.0, std::fabs(b));
}

void check_tables(const Table& a, const Table& b, double rel) {
  CHECK(a.columns == b.columns);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    REQUIRE(a.rows[i].size() == b.rows[i].size());
    for (std::size_t j = 0; j < a.rows[i].size(); ++j) CHECK(same(a.rows[i][j], b.rows[i][j], rel));
  }
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bandgap_cli_" + name);
  fs::remove_all(p);
  return p;
}

double column(const Table& t, const std::string& name, std::size_t row = 0) {
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (t.columns[c] == name) return t.rows.at(row).at(c);
  FAIL("missing column " << name);
  return 0;
}

const fs::path kGolden = BANDGAP_GOLDEN_DIR;

}  // namespace

TEST_CASE("golden: homogenize classical1d prints the harmonic mean") {
  const Result r = run({"homogenize", "--model", "classical1d"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  CHECK(std::fabs(column(t, "a_hom") - 1.6) < 1e-12);
  check_tables(t, parse_csv(slurp(kGolden / "homogenize_classical1d.csv")), 1e-12);
  for (int mesh : {8, 32}) {
    const Table m = parse_csv(run({"homogenize", "--model", "classical1d", "--mesh", std::to_string(mesh)}).out);
    CHECK(std::fabs(column(m, "a_hom") - 1.6) < 1e-12);
  }
}

TEST_CASE("golden: check difference1d reports the closed-form gap constant") {
  const Result r = run({"check", "--model", "difference1d"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  // m = 1: 4m/(π²(4m+1)).
  CHECK(column(t, "gamma") == doctest::Approx(4.0 / (5 * M_PI * M_PI)).epsilon(1e-10));
  CHECK(column(t, "h3_holds") == 1.0);
  check_tables(t, parse_csv(slurp(kGolden / "check_difference1d.csv")), 1e-9);
}

TEST_CASE("golden: gaps imperfect2d at eps = 0.05 contains [9.0, 10.3]") {
  const Result r = run({"gaps", "--model", "imperfect2d", "--s", "0.5", "--eps", "0.05"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 1);
  CHECK(column(t, "observed_lo") <= 9.0);
  CHECK(column(t, "observed_hi") >= 10.3);
  CHECK(column(t, "gap_lo") == doctest::Approx(8.0));
  CHECK(column(t, "gap_hi") == doctest::Approx(32.0 / 3));
  check_tables(t, parse_csv(slurp(kGolden / "gaps_imperfect2d.csv")), 1e-9);
}

TEST_CASE("subcommands match direct library calls") {
  SUBCASE("bands, 1D") {
    const Table t = parse_csv(run({"bands", "--model", "classical1d", "--theta-points", "9", "--k", "3"}).out);
    const auto fam = classical_1d(PiecewiseCoefficient::two_phase(1, 4), Grid1D(16));
    const std::vector<RVec> grid = theta_grid(1, 9);
    REQUIRE(t.rows.size() == 27);
    CHECK(t.columns == std::vector<std::string>{"theta_1", "k", "lambda"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const RVec ev = fiber_eigs(fam, 0.1, grid[i], 3);
      for (int k = 0; k < 3; ++k) CHECK(t.rows[3 * i + k][2] == ev[k]);
    }
  }
  SUBCASE("bands, 2D path") {
    const Table t = parse_csv(run({"bands", "--model", "highcontrast2d", "--cells", "8", "--k", "2"}).out);
    CHECK(t.columns == std::vector<std::string>{"theta_1", "theta_2", "k", "lambda"});
    REQUIRE(t.rows.size() == 2 * (3 * 64 + 1));
    CHECK(t.rows[2 * 64][0] == doctest::Approx(M_PI));
    CHECK(t.rows[2 * 128][1] == doctest::Approx(M_PI));
    const auto fam = highcontrast_2d(CellMesh(0.5, 8));
    const RVec ev = fiber_eigs(fam, 0.1, {t.rows[2 * 100][0], t.rows[2 * 100][1]}, 2);
    CHECK(t.rows[2 * 100][3] == reduced_from_fiber(ev[0]));
  }
  SUBCASE("beta") {
    const Table t = parse_csv(run({"beta", "--model", "imperfect2d", "--lambda-min", "1", "--lambda-max", "11",
                                   "--lambda-points", "11"})
                                  .out);
    const ImperfectLimit lim = imperfect_limit(0.5);
    REQUIRE(t.rows.size() == 11);
    for (const RVec& row : t.rows) {
      if (row[2] == 1.0) {
        CHECK(std::isnan(row[1]));
        continue;
      }
      CHECK(row[1] == doctest::Approx(lim.phi(row[0])).epsilon(1e-9));
      CHECK(row[3] == doctest::Approx(8.0).epsilon(1e-9));
    }
    CHECK(run({"beta", "--model", "difference1d"}).code == cli::kExitConfig);
  }
  SUBCASE("ids") {
    const Table t = parse_csv(run({"ids", "--model", "highcontrast2d", "--tau", "500", "--rays", "8"}).out);
    const CellMesh m(0.5, 16);
    const IdsResult direct = ids_asymptotic(highcontrast_2d(m), inclusion_spectrum(m, 4), ZhikovBeta(m, 49),
                                            perforated_homogenised(m), 500, 40, 1, 8);
    CHECK(column(t, "m_formula") == direct.m_formula);
    CHECK(column(t, "m_counted") == direct.m_counted);
  }
  SUBCASE("twoscale from a CSV signal") {
    const fs::path dir = scratch("twoscale");
    fs::create_directories(dir);
    SampledSignal f(0.25, 8, 4);
    SplitMix64 rng(3);
    std::ofstream in(dir / "signal.csv");
    in << "x,re,im\n";
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      f.values[i] = cplx(rng.normal(), rng.normal());
      in << write_csv({{}, {{f.x(int(i)), f.values[i].real(), f.values[i].imag()}}}).substr(1);
    }
    in.close();
    const Result r = run({"twoscale", "--input", (dir / "signal.csv").string(), "--eps", "0.25", "--samples", "4"});
    REQUIRE(r.code == 0);
    const Table t = parse_csv(r.out);
    const TwoScaleField j = compose_J(f, mask_interval(4, -0.25, 0.25));
    REQUIRE(t.rows.size() == j.values.size());
    CHECK(t.columns == std::vector<std::string>{"x", "y", "re", "im"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      CHECK(t.rows[i][2] == doctest::Approx(j.values[i].real()).epsilon(1e-12));
      CHECK(t.rows[i][3] == doctest::Approx(j.values[i].imag()).epsilon(1e-12));
    }
    CHECK(run({"twoscale", "--input", (dir / "signal.csv").string(), "--eps", "0.25", "--samples", "3"}).code ==
          cli::kExitConfig);
    fs::remove_all(dir);
  }
  SUBCASE("rates") {
    const Result r = run({"rates", "--model", "difference1d", "--theta-points", "33"});
    REQUIRE(r.code == 0);
    const Table t = parse_csv(r.out);
    CHECK(t.columns == std::vector<std::string>{"epsilon", "error", "error_floor_subtracted"});
    CHECK(t.rows.size() == 6);
    CHECK(r.err.find("slope 1.99") != std::string::npos);
  }
}

TEST_CASE("csv and json encode the same table") {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"beta", "--model", "highcontrast1d", "--lambda-points", "41", "--lambda-max", "80"},
        std::vector<std::string>{"check", "--model", "magnetic1d"},
        std::vector<std::string>{"homogenize", "--model", "imperfect2d", "--cells", "8"}}) {
    std::vector<std::string> csv = args, json = args;
    csv.insert(csv.end(), {"--format", "csv"});
    json.insert(json.end(), {"--format", "json"});
    check_tables(parse_csv(run(csv).out), parse_json(run(json).out), 0.0);
  }
}

TEST_CASE("config files, flag precedence and the echoed effective config") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "run.toml") << "[model]\nname = \"classical1d\"\nmesh = 8\na = [2, 2]\n\n"
                                       "[bands]\neps = 0.2\ntheta_points = 5\n\n[output]\nformat = \"json\"\n";
  }
  const Result file = run({"homogenize", "--config", (dir / "run.toml").string()});
  REQUIRE(file.code == 0);
  CHECK(column(parse_json(file.out), "a_hom") == doctest::Approx(2.0).epsilon(1e-12));
  const Result flag =
      run({"homogenize", "--config", (dir / "run.toml").string(), "--a", "1", "4", "--out", (dir / "o").string()});
  REQUIRE(flag.code == 0);
  CHECK(column(parse_json(flag.out), "a_hom") == doctest::Approx(1.6).epsilon(1e-12));
  REQUIRE(fs::exists(dir / "o" / "homogenized.json"));
  REQUIRE(fs::exists(dir / "o" / "config.toml"));

  // The echo reproduces the run on its own.
  const Result again = run({"homogenize", "--config", (dir / "o" / "config.toml").string()});
  REQUIRE(again.code == 0);
  CHECK(again.out == flag.out);
  const nlohmann::json echoed = cli::load_toml((dir / "o" / "config.toml").string());
  CHECK(echoed["model"]["mesh"] == 8);
  CHECK(echoed["model"]["a_breaks"].size() == 2);
  CHECK(echoed["bands"]["theta_points"] == 5);

  {
    std::ofstream(dir / "bad.toml") << "[model]\nname = \"classical1d\"\ncolour = 3\n";
  }
  const Result bad = run({"homogenize", "--config", (dir / "bad.toml").string()});
  CHECK(bad.code == cli::kExitConfig);
  CHECK(bad.err.find("colour") != std::string::npos);
  {
    std::ofstream(dir / "wrong.toml") << "[model]\nname = \"classical1d\"\ns = 0.5\n";
  }
  CHECK(run({"homogenize", "--config", (dir / "wrong.toml").string()}).code == cli::kExitConfig);
  {
    std::ofstream(dir / "broken.toml") << "[model\nname = 1\n";
  }
  CHECK(run({"homogenize", "--config", (dir / "broken.toml").string()}).code == cli::kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("exit codes and removal of partial outputs") {
  CHECK(run({}).code == cli::kExitConfig);
  CHECK(run({"frobnicate"}).code == cli::kExitConfig);
  CHECK(run({"homogenize"}).code == cli::kExitConfig);
  CHECK(run({"homogenize", "--model", "nosuch"}).code == cli::kExitConfig);
  CHECK(run({"gaps", "--model", "imperfect2d", "--cells", "10"}).code == cli::kExitConfig);
  CHECK(run({"gaps", "--model", "imperfect2d", "--eps", "1.5"}).code == cli::kExitConfig);
  CHECK(run({"homogenize", "--model", "classical1d", "--format", "xml"}).code == cli::kExitConfig);
  CHECK(run({"ids", "--model", "classical1d"}).code == cli::kExitConfig);

  const fs::path dir = scratch("fail");
  // λ outside the first band: numerical failure, and the output directory is never created.
  const Result r = run({"ids", "--model", "highcontrast2d", "--lambda", "85", "--out", dir.string()});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(r.err.find("error") != std::string::npos);
  CHECK_FALSE(fs::exists(dir));

  // Output path blocked by a file: nothing staged survives.
  fs::create_directories(dir);
  { std::ofstream(dir / "blocked") << "x"; }
  const Result w = run({"homogenize", "--model", "classical1d", "--out", (dir / "blocked" / "o").string()});
  CHECK(w.code == cli::kExitNumerical);
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  fs::remove_all(dir);
}

TEST_CASE("rates output: run record, worker override and determinism") {
  const fs::path dir = scratch("rates");
  const std::vector<std::string> args = {"rates", "--model", "difference1d", "--theta-points", "17",
                                         "--out", dir.string()};
  setenv("BANDGAP_WORKERS", "3", 1);
  const Result a = run(args);
  unsetenv("BANDGAP_WORKERS");
  REQUIRE(a.code == 0);
  CHECK(cli::load_toml((dir / "config.toml").string())["workers"] == 3);
  fs::path run_dir;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) run_dir = e.path();
  REQUIRE(!run_dir.empty());
  nlohmann::json first = nlohmann::json::parse(slurp(run_dir / "record.json"));
  CHECK(fs::exists(run_dir / "rates.csv"));

  const Result b = run({"rates", "--model", "difference1d", "--theta-points", "17", "--out", dir.string(),
                        "--workers", "1"});
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  nlohmann::json second = nlohmann::json::parse(slurp(run_dir / "record.json"));
  first["meta"].erase("timestamp");
  second["meta"].erase("timestamp");
  CHECK(first.dump() == second.dump());

  setenv("BANDGAP_WORKERS", "0", 1);
  CHECK(run(args).code == cli::kExitConfig);
  unsetenv("BANDGAP_WORKERS");
  fs::remove_all(dir);
}
