#pragma once

#include <stdexcept>
#include <vector>

#include "bandgap/densela.hpp"

namespace bandgap {

class TwoScaleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// In-place radix-2 FFT; length must be a power of two. The inverse includes 1/N.
void fft(CVec& a, bool inverse = false);
bool is_pow2(int n);

// F sampled at x_i = i ε/P, i < M·P, on the torus [0, εM).
// ‖F‖² = (ε/P) Σ |F_i|².
struct SampledSignal {
  double eps = 0;
  int cells = 0;    // M
  int samples = 0;  // P per cell
  CVec values;

  SampledSignal() = default;
  SampledSignal(double eps, int cells, int samples);
  double x(int i) const { return i * eps / samples; }
  double norm() const;
};

// f(x_m, y_k) with x_m = m ε/R (R·M points) and y_k = −1/2 + k/P.
// ‖f‖² = (ε/(R P)) Σ |f|². Row-major in x: values[m * P + k].
struct TwoScaleField {
  static constexpr int kOversample = 2;

  double eps = 0;
  int cells = 0, samples = 0;
  CVec values;

  TwoScaleField() = default;
  TwoScaleField(double eps, int cells, int samples);
  int x_count() const { return kOversample * cells; }
  double x(int m) const { return m * eps / kOversample; }
  double y(int k) const { return -0.5 + double(k) / samples; }
  cplx& at(int m, int k) { return values[std::size_t(m) * samples + k]; }
  const cplx& at(int m, int k) const { return values[std::size_t(m) * samples + k]; }
  double norm() const;
};

// G(θ_j, y_k) with θ_j = 2π(j − M/2)/M; ‖G‖² = (2π/(M P)) Σ |G|².
struct FiberField {
  double eps = 0;
  int cells = 0, samples = 0;
  CVec values;  // values[j * P + k]

  double theta(int j) const { return 2.0 * M_PI * (j - cells / 2) / cells; }
  double y(int k) const { return -0.5 + double(k) / samples; }
  cplx& at(int j, int k) { return values[std::size_t(j) * samples + k]; }
  const cplx& at(int j, int k) const { return values[std::size_t(j) * samples + k]; }
  double norm() const;
};

// Rows y_k selected for translation (the inclusion in ℰ^{(2)}).
using CellMask = std::vector<bool>;
CellMask mask_interval(int samples, double lo, double hi);

cplx inner(const SampledSignal& a, const SampledSignal& b);
cplx inner(const TwoScaleField& a, const TwoScaleField& b);

FiberField gelfand(const SampledSignal& f);
SampledSignal gelfand_inverse(const FiberField& g);

// 𝓘_ε: per y-row, band-limited interpolation of the samples F(ε(n + y)).
TwoScaleField interpolate(const SampledSignal& f);
SampledSignal interpolate_adjoint(const TwoScaleField& f);
// Evaluates f(x, {x/ε}) at the signal grid through the x-interpolant.
SampledSignal readoff(const TwoScaleField& f);

// T_ε f(x, y) = f(x + εy, y) on masked rows; rejects x-spectral mass outside
// the macro band |ξ| < π/ε.
TwoScaleField translate(const TwoScaleField& f, const CellMask& mask);
TwoScaleField translate_inverse(const TwoScaleField& f, const CellMask& mask);
// Adjoint of T_ε: band projection followed by the inverse shift.
TwoScaleField translate_adjoint(const TwoScaleField& f, const CellMask& mask);

// S_ε on signals: keep |ξ| < π/ε.
SampledSignal smooth(const SampledSignal& f);
// Band projection in x of a two-scale field (the range of 𝓘_ε and 𝓙_ε).
TwoScaleField smooth_field(const TwoScaleField& f);
// Fraction of ‖f‖² outside the macro band.
double out_of_band_fraction(const TwoScaleField& f);

TwoScaleField compose_J(const SampledSignal& f, const CellMask& mask);
SampledSignal compose_J_adjoint(const TwoScaleField& f, const CellMask& mask);

}  // namespace bandgap
