#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "bandgap/models1d.hpp"
#include "bandgap/parallel.hpp"
#include "bandgap/twoscale.hpp"

namespace bandgap::cli {

// ---------------------------------------------------------------- context

const nlohmann::json* Context::find(const std::string& section, const std::string& key) const {
  if (!cfg_.contains(section) || !cfg_[section].is_object() || !cfg_[section].contains(key)) return nullptr;
  return &cfg_[section][key];
}

bool Context::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

namespace {

[[noreturn]] void bad_type(const std::string& section, const std::string& key, const char* what) {
  throw ConfigError(section + "." + key + " must be " + what);
}

}  // namespace

double Context::num(const std::string& section, const std::string& key, double def) {
  double v = def;
  if (const auto* j = find(section, key)) {
    if (!j->is_number()) bad_type(section, key, "a number");
    v = j->get<double>();
  }
  if (!std::isfinite(v)) bad_type(section, key, "finite");
  effective_[section][key] = v;
  return v;
}

int Context::integer(const std::string& section, const std::string& key, int def) {
  int v = def;
  if (const auto* j = find(section, key)) {
    if (!j->is_number_integer()) bad_type(section, key, "an integer");
    v = j->get<int>();
  }
  effective_[section][key] = v;
  return v;
}

bool Context::flag(const std::string& section, const std::string& key, bool def) {
  bool v = def;
  if (const auto* j = find(section, key)) {
    if (!j->is_boolean()) bad_type(section, key, "a boolean");
    v = j->get<bool>();
  }
  effective_[section][key] = v;
  return v;
}

std::string Context::str(const std::string& section, const std::string& key, const std::string& def) {
  std::string v = def;
  if (const auto* j = find(section, key)) {
    if (!j->is_string()) bad_type(section, key, "a string");
    v = j->get<std::string>();
  }
  effective_[section][key] = v;
  return v;
}

RVec Context::vec(const std::string& section, const std::string& key, const RVec& def) {
  RVec v = def;
  if (const auto* j = find(section, key)) {
    v.clear();
    if (j->is_number()) {
      v.push_back(j->get<double>());
    } else if (j->is_array()) {
      for (const auto& x : *j) {
        if (!x.is_number()) bad_type(section, key, "a list of numbers");
        v.push_back(x.get<double>());
      }
    } else {
      bad_type(section, key, "a list of numbers");
    }
  }
  for (double x : v)
    if (!std::isfinite(x)) bad_type(section, key, "finite");
  effective_[section][key] = v;
  return v;
}

// ---------------------------------------------------------------- tables

std::string table_csv(const Table& t) { return write_csv(t); }

nlohmann::json table_json(const Table& t) { return {{"columns", t.columns}, {"rows", t.rows}}; }

namespace {

// ---------------------------------------------------------------- models

struct Model {
  std::string name;
  std::unique_ptr<FiberFamily> base;
  std::unique_ptr<FiberFamily> shifted;  // magnetic: degeneracy moved to θ = 0
  std::optional<CellMesh> mesh;
  double theta0 = 0;

  bool two_d() const { return mesh.has_value(); }
  const FiberFamily& analysis() const { return shifted ? *shifted : *base; }
};

PiecewiseCoefficient coefficient(Context& ctx, const std::string& key, const RVec& def) {
  const RVec values = ctx.vec("model", key, def);
  if (values.empty()) throw ConfigError("model." + key + " needs at least one value");
  RVec uniform;
  for (std::size_t i = 0; i < values.size(); ++i) uniform.push_back(double(i) / values.size());
  const RVec breaks = ctx.vec("model", key + "_breaks", uniform);
  if (breaks.size() != values.size()) throw ConfigError("model." + key + "_breaks must match model." + key);
  try {
    return PiecewiseCoefficient(breaks, values);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model." + key + ": " + e.what());
  }
}

void require_positive(const PiecewiseCoefficient& c, const std::string& key) {
  if (!(c.min_value() > 0)) throw ConfigError("model." + key + " must be positive");
}

Grid1D grid_1d(Context& ctx, int def) {
  const int m = ctx.integer("model", "mesh", def);
  if (m < 2) throw ConfigError("model.mesh must be at least 2");
  return Grid1D(m);
}

Model build_model(Context& ctx, int cells_override = -1) {
  Model m;
  m.name = ctx.str("model", "name", "");
  if (m.name.empty()) throw ConfigError("no model given");
  try {
    if (m.name == "classical1d") {
      const PiecewiseCoefficient a = coefficient(ctx, "a", {1.0, 4.0});
      require_positive(a, "a");
      m.base = std::make_unique<Classical1D>(classical_1d(a, grid_1d(ctx, 16)));
    } else if (m.name == "difference1d") {
      const PiecewiseCoefficient d = coefficient(ctx, "d", {1.0});
      require_positive(d, "d");
      m.base = std::make_unique<Difference1D>(difference_1d(d, grid_1d(ctx, 16)));
    } else if (m.name == "diffdiff1d") {
      const PiecewiseCoefficient a = coefficient(ctx, "a", {1.0, 4.0});
      const PiecewiseCoefficient d = coefficient(ctx, "d", {1.0});
      require_positive(a, "a");
      require_positive(d, "d");
      m.base = std::make_unique<DiffDiff1D>(diffdiff_1d(a, d, grid_1d(ctx, 16)));
    } else if (m.name == "magnetic1d") {
      const PiecewiseCoefficient pot = coefficient(ctx, "potential", {0.3});
      const PiecewiseCoefficient v = coefficient(ctx, "v", {1.0});
      require_positive(v, "v");
      auto fam = std::make_unique<Magnetic1D>(magnetic_1d(pot, v, grid_1d(ctx, 32)));
      m.theta0 = find_theta0(*fam).theta0;
      m.base = std::move(fam);
      m.shifted = std::make_unique<ShiftedFamily>(*m.base, RVec{m.theta0});
    } else if (m.name == "highcontrast1d") {
      const RVec inc = ctx.vec("model", "inclusion", {0.25, 0.75});
      if (inc.size() != 2 || !(0 < inc[0] && inc[0] < inc[1] && inc[1] < 1))
        throw ConfigError("model.inclusion must be [lo, hi] with 0 < lo < hi < 1");
      m.base = std::make_unique<HighContrast1D>(highcontrast_1d(inc[0], inc[1], grid_1d(ctx, 16)));
    } else if (m.name == "highcontrast2d" || m.name == "imperfect2d") {
      const double s = ctx.num("model", "s", 0.5);
      int cells = ctx.integer("model", "cells", 16);
      if (cells_override > 0) cells = cells_override;
      m.mesh.emplace(s, cells);
      if (m.name == "highcontrast2d")
        m.base = std::make_unique<HighContrast2D>(highcontrast_2d(*m.mesh));
      else
        m.base = std::make_unique<Imperfect2D>(imperfect_2d(*m.mesh));
    } else {
      throw ConfigError("unknown model '" + m.name + "'");
    }
  } catch (const ModelError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return m;
}

bool reduced_default(Context& ctx, const Model& m) { return ctx.flag("reduced", m.two_d()); }

double out_shift(bool reduced) { return reduced ? kFiberShift : 0.0; }

std::vector<RVec> analysis_grid(const Model& m, int points) {
  return m.two_d() ? theta_wedge_grid(points) : theta_grid(1, points);
}

void check_eps(double eps, const std::string& key) {
  if (!(eps > 0 && eps < 1)) throw ConfigError(key + " must lie in (0, 1)");
}

double single_eps(Context& ctx, double def) {
  const RVec e = ctx.vec("eps", {def});
  if (e.size() != 1) throw ConfigError(ctx.command() + ".eps takes one value");
  check_eps(e[0], ctx.command() + ".eps");
  return e[0];
}

Interval window(Context& ctx) {
  const RVec w = ctx.vec("window", {0.0, 12.0});
  if (w.size() != 2 || !(w[0] <= w[1])) throw ConfigError(ctx.command() + ".window must be [a, b] with a <= b");
  return {w[0], w[1]};
}

int positive(Context& ctx, const std::string& key, int def) {
  const int v = ctx.integer(key, def);
  if (v < 1) throw ConfigError(ctx.command() + "." + key + " must be positive");
  return v;
}

// ---------------------------------------------------------------- commands

CommandOutput homogenize(Context&, const Model& m) {
  const FiberFamily& fam = m.analysis();
  const DefectDecomposition def = build_defect(fam);
  const HomogenisedForm hom = homogenised_form(fam, def);
  CVec w, c;
  if (def.z.dim() == 1) {
    w = CVec{1.0};
    c = def.z.columns.col(0);
  } else {
    // Coordinates of the constant function in the Z basis.
    c = CVec(fam.basis_dim(), 1.0);
    w = def.z.columns.adjoint() * ((def.a0 + def.b0) * c);
  }
  const double mass = std::real(form(def.d0, c, c));
  CommandOutput out{"homogenized", {}, std::nullopt, {}};
  RVec row;
  const int n = fam.theta_dim();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      out.table.columns.push_back(n == 1 ? "a_hom" : "a" + std::to_string(j + 1) + std::to_string(k + 1));
      row.push_back(std::real(dot(w, hom.block(j, k) * w)) / mass);
    }
  out.table.rows.push_back(row);
  return out;
}

std::vector<RVec> brillouin_path(int per_leg) {
  const RVec corners[] = {{0, 0}, {M_PI, 0}, {M_PI, M_PI}, {0, 0}};
  std::vector<RVec> path;
  for (int leg = 0; leg < 3; ++leg)
    for (int i = 0; i < per_leg; ++i) {
      const double t = double(i) / per_leg;
      path.push_back({corners[leg][0] + t * (corners[leg + 1][0] - corners[leg][0]),
                      corners[leg][1] + t * (corners[leg + 1][1] - corners[leg][1])});
    }
  path.push_back(corners[3]);
  return path;
}

CommandOutput bands(Context& ctx, const Model& m) {
  const double eps = single_eps(ctx, 0.1);
  const int k = positive(ctx, "k", m.two_d() ? 6 : 4);
  const bool reduced = reduced_default(ctx, m);
  const std::vector<RVec> path =
      m.two_d() ? brillouin_path(positive(ctx, "points_per_leg", 64)) : theta_grid(1, positive(ctx, "theta_points", 129));
  std::vector<RVec> ev(path.size());
  parallel_for(int(path.size()), ctx.workers(), [&](int i) {
    ev[i] = fiber_eigs(*m.base, eps, path[i], k);
    for (double& x : ev[i]) x -= out_shift(reduced);
  });
  return {"bands", bands_table(path, ev), std::nullopt, {}};
}

CommandOutput beta(Context& ctx, const Model& m) {
  const bool reduced = reduced_default(ctx, m);
  const double lo = ctx.num("lambda_min", 0.0), hi = ctx.num("lambda_max", 20.0);
  const int count = positive(ctx, "lambda_points", 201);
  if (!(lo <= hi)) throw ConfigError("beta.lambda_min must not exceed beta.lambda_max");
  const BetaEvaluator ev(build_defect(m.analysis()));
  if (ev.z_dim() != 1) throw ConfigError("beta needs a model with one-dimensional Z");
  const double shift = out_shift(reduced);
  CommandOutput out{"beta", {{"lambda", "beta", "near_pole", "nearest_pole"}, {}}, std::nullopt, {}};
  for (int i = 0; i < count; ++i) {
    const double lam = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    const double lf = lam + shift;
    double nearest = std::nan("");
    for (double p : ev.poles())
      if (std::isnan(nearest) || std::fabs(p - lf) < std::fabs(nearest - lf)) nearest = p;
    nearest -= shift;
    const bool near = ev.near_pole(lf);
    const double b = near ? std::nan("") : ev.matrix(lf)(0, 0).real();
    out.table.rows.push_back({lam, b, near ? 1.0 : 0.0, nearest});
  }
  return out;
}

IntervalSet limit_set(const DefectDecomposition& def, bool reduced) {
  const IntervalSet s = limit_bands(def, 12).bands;
  return reduced ? reduced_from_fiber(s) : s;
}

CommandOutput gaps(Context& ctx, const Model& m) {
  const double eps = single_eps(ctx, 0.05);
  const Interval w = window(ctx);
  const int k = positive(ctx, "k", 4);
  const int tp = positive(ctx, "theta_points", m.two_d() ? 9 : 65);
  const bool reduced = reduced_default(ctx, m);
  const DefectDecomposition def = build_defect(m.analysis());
  const GapReport rep = gap_report(m.analysis(), limit_set(def, reduced), eps, w.lo, w.hi, analysis_grid(m, tp), k,
                                   reduced, ctx.workers());
  CommandOutput out{"gap", gap_table(rep), std::nullopt, {}};
  if (rep.gaps.empty()) out.notes.push_back("no limit gap in the window");
  for (const GapEntry& g : rep.gaps) {
    char buf[160];
    if (g.found)
      std::snprintf(buf, sizeof buf, "limit gap (%.6g, %.6g): eigenvalue-free (%.6g, %.6g)", g.limit.lo, g.limit.hi,
                    g.observed.lo, g.observed.hi);
    else
      std::snprintf(buf, sizeof buf, "limit gap (%.6g, %.6g): closed at this epsilon", g.limit.lo, g.limit.hi);
    out.notes.push_back(buf);
  }
  return out;
}

CommandOutput rates(Context& ctx, const Model& m) {
  const std::string kind = ctx.str("kind", "eig");
  if (kind != "eig" && kind != "resolvent" && kind != "distance")
    throw ConfigError("rates.kind must be eig, resolvent or distance");
  SweepConfig cfg;
  cfg.model = m.name;
  cfg.eps = ctx.vec("eps", cfg.eps);
  cfg.theta_points = positive(ctx, "theta_points", m.two_d() ? 9 : 65);
  cfg.k_count = positive(ctx, "k", 4);
  const Interval w = window(ctx);
  cfg.window_lo = w.lo;
  cfg.window_hi = w.hi;
  cfg.reduced = reduced_default(ctx, m);
  cfg.seed = std::uint64_t(ctx.integer("seed", 1));
  cfg.workers = ctx.workers();
  const int rhs_count = ctx.integer("rhs_count", 10);
  const std::string norm = ctx.str("norm", "energy");
  if (norm != "energy" && norm != "l2") throw ConfigError("rates.norm must be energy or l2");
  double floor = ctx.num("floor", 0.0);
  const bool fem = ctx.flag("fem_floor", false);
  if (fem && !m.two_d()) throw ConfigError("rates.fem_floor applies to 2D models only");
  if (fem && kind == "resolvent") throw ConfigError("rates.fem_floor applies to eig and distance sweeps");
  if (rhs_count < 0) throw ConfigError("rates.rhs_count must be nonnegative");
  try {
    cfg.validate();
  } catch (const SweepError& e) {
    throw ConfigError(std::string("rates: ") + e.what());
  }
  cfg.model_params = ctx.effective().at("model");
  std::optional<Model> coarse;
  if (fem) coarse = build_model(ctx, m.mesh->cells() / 2);

  const FiberFamily& fam = m.analysis();
  const DefectDecomposition def = build_defect(fam);
  SweepResult r;
  if (kind == "eig") {
    const HomogenisedForm hom = homogenised_form(fam, def);
    r = eig_rate_sweep(fam, def, hom, cfg);
    if (fem) {
      SweepConfig last = cfg;
      last.eps = {cfg.eps.back()};
      const DefectDecomposition cdef = build_defect(coarse->analysis());
      const double ce = eig_rate_sweep(coarse->analysis(), cdef, homogenised_form(coarse->analysis(), cdef), last)
                            .points.back()
                            .error;
      floor = fem_floor(ce, r.points.back().error);
    }
    if (floor > 0) r = eig_rate_sweep(fam, def, hom, cfg, nullptr, floor);
  } else if (kind == "resolvent") {
    const ResolventSweep rs = resolvent_rate_sweep(fam, def, homogenised_form(fam, def), cfg, rhs_count);
    r = norm == "energy" ? rs.energy : rs.l2;
  } else {
    const std::vector<RVec> grid = analysis_grid(m, cfg.theta_points);
    const IntervalSet limit = limit_set(def, cfg.reduced);
    r = spectral_distance_sweep(fam, limit, cfg, grid);
    if (fem) {
      SweepConfig last = cfg;
      last.eps = {cfg.eps.back()};
      const DefectDecomposition cdef = build_defect(coarse->analysis());
      const double ce =
          spectral_distance_sweep(coarse->analysis(), limit_set(cdef, cfg.reduced), last, grid).points.back().error;
      floor = fem_floor(ce, r.points.back().error);
    }
    if (floor > 0) r = spectral_distance_sweep(fam, limit, cfg, grid, floor);
  }
  ctx.set_effective("rates", "floor_applied", r.floor);

  CommandOutput out{"rates", rates_table(r), std::nullopt, {}};
  char buf[200];
  std::snprintf(buf, sizeof buf, "slope %.6g, r_squared %.6g, points %d, floor %.6g", r.fit.slope, r.fit.r_squared,
                r.fit.points, r.floor);
  out.notes.push_back(buf);
  for (const std::string& f : r.flags) out.notes.push_back("flag: " + f);
  RunRecord rec;
  rec.config = cfg.to_json();
  rec.config["kind"] = kind;
  if (kind == "resolvent") rec.config["norm"] = norm;
  rec.config["floor"] = r.floor;
  rec.tables["rates"] = out.table;
  rec.fits["rate"] = r.fit;
  rec.timestamp = utc_timestamp();
  rec.code_version = kCodeVersion;
  out.record = rec;
  return out;
}

CommandOutput ids(Context& ctx, const Model& m) {
  if (m.name != "highcontrast2d") throw ConfigError("ids needs model highcontrast2d");
  const RVec taus = ctx.vec("tau", {125, 250, 500, 1000});
  const double lambda = ctx.num("lambda", 40.0);
  const int k = positive(ctx, "k", 1);
  const int rays = positive(ctx, "rays", 16);
  for (double t : taus)
    if (!(t > 1)) throw ConfigError("ids.tau values must exceed 1");
  const auto& fam = static_cast<const HighContrast2D&>(*m.base);
  const int modes = std::min(100, int(m.mesh->interior_nodes().size()));
  const InclusionSpectrum spec = inclusion_spectrum(*m.mesh, k + 3);
  const ZhikovBeta zb(*m.mesh, modes);
  const RMatrix ahom = perforated_homogenised(*m.mesh);
  CommandOutput out{"ids", {{"tau", "m_formula", "m_counted", "discrepancy"}, {}}, std::nullopt, {}};
  for (const IdsRow& r : ids_sweep(fam, spec, zb, ahom, taus, lambda, k, rays))
    out.table.rows.push_back({r.tau, r.result.m_formula, r.result.m_counted, r.result.discrepancy()});
  return out;
}

SampledSignal read_signal(const std::string& path, double eps, int samples) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read twoscale.input '" + path + "'");
  std::vector<std::array<double, 3>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::array<double, 3> r{};
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      if (c >= 3) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected x,re,im");
      try {
        std::size_t used = 0;
        r[c] = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      ++c;
    }
    if (!numeric && rows.empty() && lineno == 1) continue;  // header
    if (!numeric || c != 3) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected x,re,im");
    rows.push_back(r);
  }
  if (rows.empty() || rows.size() % samples != 0)
    throw ConfigError("twoscale.input: row count must be a multiple of twoscale.samples");
  const int cells = int(rows.size()) / samples;
  if (!is_pow2(cells) || !is_pow2(samples))
    throw ConfigError("twoscale: cells and samples per cell must be powers of two");
  SampledSignal f(eps, cells, samples);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::fabs(rows[i][0] - f.x(int(i))) > 1e-9 * std::max(1.0, eps * cells))
      throw ConfigError("twoscale.input: x values must be i * eps / samples");
    f.values[i] = cplx(rows[i][1], rows[i][2]);
  }
  return f;
}

CommandOutput twoscale(Context& ctx) {
  const std::string input = ctx.str("input", "");
  const double eps = single_eps(ctx, 0.125);
  const int samples = positive(ctx, "samples", 8);
  const std::string op = ctx.str("op", "J");
  if (op != "J" && op != "interpolate") throw ConfigError("twoscale.op must be J or interpolate");
  const RVec mask = ctx.vec("mask", {-0.25, 0.25});
  if (mask.size() != 2 || !(mask[0] <= mask[1])) throw ConfigError("twoscale.mask must be [lo, hi]");
  SampledSignal f;
  if (input.empty()) {
    if (!is_pow2(samples)) throw ConfigError("twoscale: samples per cell must be a power of two");
    f = SampledSignal(eps, 16, samples);
    const double xi = 2 * M_PI * 3 / (eps * 16);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const double x = f.x(int(i));
      f.values[i] = std::polar(1.0, xi * x) * (1.0 + 0.5 * std::cos(2 * M_PI * x / eps));
    }
  } else {
    f = read_signal(input, eps, samples);
  }
  const TwoScaleField u = op == "J" ? compose_J(f, mask_interval(samples, mask[0], mask[1])) : interpolate(f);
  CommandOutput out{"twoscale", {{"x", "y", "re", "im"}, {}}, std::nullopt, {}};
  for (int mi = 0; mi < u.x_count(); ++mi)
    for (int k = 0; k < u.samples; ++k)
      out.table.rows.push_back({u.x(mi), u.y(k), u.at(mi, k).real(), u.at(mi, k).imag()});
  return out;
}

// ‖ℰ_θ − I‖ in the d₀ norm.
double transfer_deviation(const FiberFamily& fam, const RVec& theta, const Matrix& d0, double& unitarity) {
  const Matrix e = fam.transfer(theta);
  const Matrix d = fam.assemble_d(theta);
  unitarity = std::max(unitarity, (e.adjoint() * (d * e) - d).max_abs());
  bool diagonal = true;
  double diag = 0;
  for (int i = 0; i < e.rows() && diagonal; ++i)
    for (int j = 0; j < e.cols(); ++j) {
      if (i != j && std::abs(e(i, j)) != 0.0) {
        diagonal = false;
        break;
      }
      if (i == j) diag = std::max(diag, std::abs(e(i, i) - 1.0));
    }
  bool d_diagonal = true;
  for (int i = 0; i < d0.rows() && d_diagonal; ++i)
    for (int j = 0; j < d0.cols(); ++j)
      if (i != j && std::abs(d0(i, j)) != 0.0) {
        d_diagonal = false;
        break;
      }
  if (diagonal && d_diagonal) return diag;
  Matrix x = e;
  for (int i = 0; i < x.rows(); ++i) x(i, i) -= 1.0;
  const RVec ev = generalized_eigvals(x.adjoint() * (d0 * x), d0);
  return std::sqrt(std::max(0.0, ev.back()));
}

CommandOutput check(Context& ctx, const Model& m) {
  const int tp = positive(ctx, "theta_points", m.two_d() ? 9 : 33);
  const FiberFamily& fam = m.analysis();
  const std::vector<RVec> grid = theta_grid(fam.theta_dim(), tp);
  const DefectDecomposition def = build_defect(fam);
  const HomogenisedForm hom = homogenised_form(fam, def);
  const GapConstant g = gap_quadratic_constant(fam, grid);
  double ke = 0, unitarity = 0;
  const Matrix d0 = fam.assemble_d(RVec(fam.theta_dim(), 0.0));
  for (const RVec& t : grid) {
    double n2 = 0;
    for (double x : t) n2 += x * x;
    if (n2 == 0) continue;
    ke = std::max(ke, transfer_deviation(fam, t, d0, unitarity) / std::sqrt(n2));
  }
  CommandOutput out{"check",
                    {{"gamma", "nu_star", "K_Z", "K_e", "nu_zero", "dim_v_star", "dim_z", "h3_holds",
                      "transfer_unitarity_defect", "theta0"},
                     {}},
                    std::nullopt,
                    {}};
  out.table.rows.push_back({g.gamma, hom.nu_star, def.transversality, ke, def.gap_at_zero, double(def.v_star.dim()),
                            double(def.z.dim()), g.h3_holds ? 1.0 : 0.0, unitarity, m.theta0});
  if (!g.h3_holds) out.notes.push_back("flag: (H3) quadratic gap estimate not confirmed on this grid");
  if (!(def.transversality < 1)) out.notes.push_back("flag: K_Z >= 1");
  return out;
}

}  // namespace

CommandOutput run_command(Context& ctx) {
  const std::string& cmd = ctx.command();
  if (cmd == "twoscale") return twoscale(ctx);
  const Model m = build_model(ctx);
  if (cmd == "homogenize") return homogenize(ctx, m);
  if (cmd == "bands") return bands(ctx, m);
  if (cmd == "beta") return beta(ctx, m);
  if (cmd == "gaps") return gaps(ctx, m);
  if (cmd == "rates") return rates(ctx, m);
  if (cmd == "ids") return ids(ctx, m);
  if (cmd == "check") return check(ctx, m);
  throw ConfigError("unknown command '" + cmd + "'");
}

}  // namespace bandgap::cli
