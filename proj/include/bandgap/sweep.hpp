#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bandgap/fiber.hpp"
#include "bandgap/models2d.hpp"
#include "json.hpp"

namespace bandgap {

inline constexpr const char* kCodeVersion = "0.1.0";

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepConfig {
  std::string model = "model";
  nlohmann::json model_params = nlohmann::json::object();
  RVec eps = {0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  int theta_points = 65;
  int k_count = 4;
  double window_lo = 0, window_hi = 12;
  // Compare spectra in the reduced normalisation (fiber eigenvalues minus kFiberShift).
  bool reduced = false;
  std::string out_dir = "out";
  int workers = 1;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

struct RateFit {
  double slope = 0, intercept = 0, r_squared = 0;
  int points = 0;
  std::vector<std::string> flags;  // "poor fit", "no convergence"
  bool flagged() const { return !flags.empty(); }
};

// Least squares on (log ε, log err); points with err ≤ 1e-14 are dropped.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct SweepPoint {
  double eps = 0, error = 0, error_floor_subtracted = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  RateFit fit;  // on the floor-subtracted errors
  double floor = 0;
  std::vector<std::string> flags;  // "non-monotone" and the fit flags
  RVec tail_constant;              // eigenvalue sweeps: max |1/λ^{(p)}| / ε beyond dim V₀
};

// Richardson estimate of the ε-independent discretisation floor left on the
// fine mesh, from distances on meshes h and h/2 at the same ε (order p).
double fem_floor(double coarse, double fine, int order = 2);

struct EigRow {
  RVec theta;
  int k = 0;
  double lambda_eps = 0, lambda_limit = 0, error = 0;
};

SweepResult eig_rate_sweep(const FiberFamily& fam, const DefectDecomposition& def, const HomogenisedForm& hom,
                           const SweepConfig& cfg, std::vector<std::vector<EigRow>>* tables = nullptr,
                           double floor = 0);

struct ResolventSweep {
  SweepResult energy;  // worst ε⁻²a[e] + b[e] over ‖f‖²_*
  SweepResult l2;      // worst ‖e‖_d / ‖f‖_d
};
// Right-hand sides: `count` seeded random vectors plus the constant.
ResolventSweep resolvent_rate_sweep(const FiberFamily& fam, const DefectDecomposition& def,
                                    const HomogenisedForm& hom, const SweepConfig& cfg, int count = 10,
                                    const std::vector<RVec>* theta_subset = nullptr);

SweepResult spectral_distance_sweep(const FiberFamily& fam, const IntervalSet& limit, const SweepConfig& cfg,
                                    const std::vector<RVec>& theta_grid, double floor = 0);

struct GapEntry {
  Interval limit;     // gap of the limit spectrum
  Interval observed;  // widest fiber-eigenvalue-free interval meeting it
  bool found = false;
  double margin_lo = 0, margin_hi = 0;
};
struct GapReport {
  double eps = 0;
  std::vector<GapEntry> gaps;
};
GapReport gap_report(const FiberFamily& fam, const IntervalSet& limit, double eps, double window_lo, double window_hi,
                     const std::vector<RVec>& theta_grid, int k_count, bool reduced, int workers = 1);

struct IdsRow {
  double tau = 0;
  IdsResult result;
};
std::vector<IdsRow> ids_sweep(const HighContrast2D& fam, const InclusionSpectrum& spec, const ZhikovBeta& beta,
                              const RMatrix& ahom, const RVec& taus, double lambda, int k, int rays = 16);

struct Table {
  std::vector<std::string> columns;
  std::vector<RVec> rows;
};

struct RunRecord {
  static constexpr int kSchemaVersion = 1;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, Table> tables;
  std::map<std::string, RateFit> fits;
  std::string timestamp;
  std::string code_version;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

Table rates_table(const SweepResult& r);
Table gap_table(const GapReport& r);
Table bands_table(const std::vector<RVec>& grid, const std::vector<RVec>& eigenvalues);

std::string utc_timestamp();

// Writes <dir>/<model>_<hash>/record.json and one <name>.csv per table;
// returns the run directory.
std::string persist(const RunRecord& record, const std::string& dir);
RunRecord load_record(const std::string& run_dir);
std::string config_hash(const nlohmann::json& config);
std::string write_csv(const Table& t);

}  // namespace bandgap
