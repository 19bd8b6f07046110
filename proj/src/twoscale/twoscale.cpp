#include "bandgap/twoscale.hpp"

#include <cmath>

namespace bandgap {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft(CVec& a, bool inverse) {
  const int n = int(a.size());
  if (!is_pow2(n)) throw TwoScaleError("FFT length must be a power of two");
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = 2 * M_PI / len * (inverse ? 1 : -1);
    for (int i = 0; i < n; i += len) {
      for (int k = 0; k < len / 2; ++k) {
        const cplx w = std::polar(1.0, ang * k);
        const cplx u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse)
    for (cplx& x : a) x /= double(n);
}

namespace {

void check_grid(double eps, int cells, int samples) {
  if (!(eps > 0)) throw TwoScaleError("cell size must be positive");
  if (!is_pow2(cells) || !is_pow2(samples) || cells < 2 || samples < 2)
    throw TwoScaleError("cell count and samples per cell must be powers of two (at least 2)");
}

double sq_sum(const CVec& v) {
  double s = 0;
  for (const cplx& x : v) s += std::norm(x);
  return s;
}

// Frequency of DFT index t on a grid of n points.
int freq(int t, int n) { return t < n / 2 ? t : t - n; }
int index_of(int q, int n) { return ((q % n) + n) % n; }

// Samples F(ε(n + y_k)), n < M, for row k.
CVec signal_row(const SampledSignal& f, int k) {
  const int mp = f.cells * f.samples;
  CVec a(f.cells);
  for (int n = 0; n < f.cells; ++n) a[n] = f.values[index_of(n * f.samples + k - f.samples / 2, mp)];
  return a;
}

void set_signal_row(SampledSignal& f, int k, const CVec& a) {
  const int mp = f.cells * f.samples;
  for (int n = 0; n < f.cells; ++n) f.values[index_of(n * f.samples + k - f.samples / 2, mp)] = a[n];
}

CVec field_row(const TwoScaleField& f, int k) {
  CVec r(f.x_count());
  for (int m = 0; m < f.x_count(); ++m) r[m] = f.at(m, k);
  return r;
}

void set_field_row(TwoScaleField& f, int k, const CVec& r) {
  for (int m = 0; m < f.x_count(); ++m) f.at(m, k) = r[m];
}

bool in_band(int q, int cells) { return q >= -cells / 2 && q < cells / 2; }

// Multiplies the in-band x-spectrum of row k by e^{2πi q y_k s/M}; out-of-band
// components are dropped when `project`.
void shift_row(TwoScaleField& f, int k, double s, bool project) {
  CVec r = field_row(f, k);
  fft(r);
  const int nx = f.x_count();
  const double y = f.y(k);
  for (int t = 0; t < nx; ++t) {
    const int q = freq(t, nx);
    if (in_band(q, f.cells))
      r[t] *= std::polar(1.0, 2 * M_PI * q * y * s / f.cells);
    else if (project)
      r[t] = 0;
  }
  fft(r, true);
  set_field_row(f, k, r);
}

void check_mask(const CellMask& mask, int samples) {
  if (int(mask.size()) != samples) throw TwoScaleError("mask length must equal samples per cell");
}

}  // namespace

SampledSignal::SampledSignal(double e, int m, int p) : eps(e), cells(m), samples(p) {
  check_grid(e, m, p);
  values.assign(std::size_t(m) * p, 0.0);
}

double SampledSignal::norm() const { return std::sqrt(eps / samples * sq_sum(values)); }

TwoScaleField::TwoScaleField(double e, int m, int p) : eps(e), cells(m), samples(p) {
  check_grid(e, m, p);
  values.assign(std::size_t(kOversample) * m * p, 0.0);
}

double TwoScaleField::norm() const { return std::sqrt(eps / (kOversample * samples) * sq_sum(values)); }

double FiberField::norm() const { return std::sqrt(2 * M_PI / (double(cells) * samples) * sq_sum(values)); }

CellMask mask_interval(int samples, double lo, double hi) {
  CellMask m(samples);
  for (int k = 0; k < samples; ++k) {
    const double y = -0.5 + double(k) / samples;
    m[k] = y >= lo && y <= hi;
  }
  return m;
}

cplx inner(const SampledSignal& a, const SampledSignal& b) {
  if (a.values.size() != b.values.size()) throw TwoScaleError("signal grids differ");
  return a.eps / a.samples * dot(b.values, a.values);
}

cplx inner(const TwoScaleField& a, const TwoScaleField& b) {
  if (a.values.size() != b.values.size()) throw TwoScaleError("field grids differ");
  return a.eps / (TwoScaleField::kOversample * a.samples) * dot(b.values, a.values);
}

FiberField gelfand(const SampledSignal& f) {
  FiberField g{f.eps, f.cells, f.samples, CVec(f.values.size())};
  const double c = std::sqrt(f.eps / (2 * M_PI));
  for (int k = 0; k < f.samples; ++k) {
    CVec a = signal_row(f, k);
    for (int n = 1; n < f.cells; n += 2) a[n] = -a[n];
    fft(a);
    for (int j = 0; j < f.cells; ++j) g.at(j, k) = c * a[j] * std::polar(1.0, -g.theta(j) * g.y(k));
  }
  return g;
}

SampledSignal gelfand_inverse(const FiberField& g) {
  SampledSignal f(g.eps, g.cells, g.samples);
  const double c = std::sqrt(g.eps / (2 * M_PI));
  for (int k = 0; k < g.samples; ++k) {
    CVec a(g.cells);
    for (int j = 0; j < g.cells; ++j) a[j] = g.at(j, k) * std::polar(1.0, g.theta(j) * g.y(k)) / c;
    fft(a, true);
    for (int n = 1; n < g.cells; n += 2) a[n] = -a[n];
    set_signal_row(f, k, a);
  }
  return f;
}

TwoScaleField interpolate(const SampledSignal& f) {
  TwoScaleField out(f.eps, f.cells, f.samples);
  const int nx = out.x_count();
  for (int k = 0; k < f.samples; ++k) {
    CVec a = signal_row(f, k);
    fft(a);
    CVec s(nx, 0.0);
    for (int t = 0; t < f.cells; ++t) {
      const int q = freq(t, f.cells);
      s[index_of(q, nx)] = a[t] / double(f.cells) * std::polar(1.0, -2 * M_PI * q * out.y(k) / f.cells);
    }
    fft(s, true);
    for (cplx& x : s) x *= double(nx);
    set_field_row(out, k, s);
  }
  return out;
}

SampledSignal interpolate_adjoint(const TwoScaleField& f) {
  SampledSignal out(f.eps, f.cells, f.samples);
  const int nx = f.x_count();
  for (int k = 0; k < f.samples; ++k) {
    CVec s = field_row(f, k);
    fft(s);
    CVec a(f.cells);
    for (int t = 0; t < f.cells; ++t) {
      const int q = freq(t, f.cells);
      a[t] = s[index_of(q, nx)] / double(nx) * std::polar(1.0, 2 * M_PI * q * f.y(k) / f.cells);
    }
    fft(a, true);
    for (cplx& x : a) x *= double(f.cells);
    set_signal_row(out, k, a);
  }
  return out;
}

SampledSignal readoff(const TwoScaleField& f) {
  SampledSignal out(f.eps, f.cells, f.samples);
  const int nx = f.x_count();
  for (int k = 0; k < f.samples; ++k) {
    CVec s = field_row(f, k);
    fft(s);
    for (int t = 0; t < nx; ++t) s[t] *= std::polar(1.0, 2 * M_PI * freq(t, nx) * f.y(k) / f.cells);
    fft(s, true);
    CVec a(f.cells);
    for (int n = 0; n < f.cells; ++n) a[n] = s[n * TwoScaleField::kOversample];
    set_signal_row(out, k, a);
  }
  return out;
}

double out_of_band_fraction(const TwoScaleField& f) {
  const int nx = f.x_count();
  double out = 0, total = 0;
  for (int k = 0; k < f.samples; ++k) {
    CVec s = field_row(f, k);
    fft(s);
    for (int t = 0; t < nx; ++t) {
      const double w = std::norm(s[t]);
      total += w;
      if (!in_band(freq(t, nx), f.cells)) out += w;
    }
  }
  return total > 0 ? out / total : 0.0;
}

TwoScaleField translate(const TwoScaleField& f, const CellMask& mask) {
  check_mask(mask, f.samples);
  if (out_of_band_fraction(f) > 1e-10) throw TwoScaleError("aliasing: spectral mass outside the macro band");
  TwoScaleField out = f;
  for (int k = 0; k < f.samples; ++k)
    if (mask[k]) shift_row(out, k, 1.0, false);
  return out;
}

TwoScaleField translate_inverse(const TwoScaleField& f, const CellMask& mask) {
  check_mask(mask, f.samples);
  if (out_of_band_fraction(f) > 1e-10) throw TwoScaleError("aliasing: spectral mass outside the macro band");
  TwoScaleField out = f;
  for (int k = 0; k < f.samples; ++k)
    if (mask[k]) shift_row(out, k, -1.0, false);
  return out;
}

TwoScaleField translate_adjoint(const TwoScaleField& f, const CellMask& mask) {
  check_mask(mask, f.samples);
  TwoScaleField out = f;
  for (int k = 0; k < f.samples; ++k) shift_row(out, k, mask[k] ? -1.0 : 0.0, true);
  return out;
}

SampledSignal smooth(const SampledSignal& f) {
  SampledSignal out = f;
  const int n = int(f.values.size());
  fft(out.values);
  for (int t = 0; t < n; ++t)
    if (!in_band(freq(t, n), f.cells)) out.values[t] = 0;
  fft(out.values, true);
  return out;
}

TwoScaleField smooth_field(const TwoScaleField& f) {
  TwoScaleField out = f;
  for (int k = 0; k < f.samples; ++k) shift_row(out, k, 0.0, true);
  return out;
}

TwoScaleField compose_J(const SampledSignal& f, const CellMask& mask) { return translate(interpolate(f), mask); }

SampledSignal compose_J_adjoint(const TwoScaleField& f, const CellMask& mask) {
  return interpolate_adjoint(translate_adjoint(f, mask));
}

}  // namespace bandgap
