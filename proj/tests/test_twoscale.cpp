#include <cmath>

#include "bandgap/twoscale.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bandgap;
using namespace testutil;

namespace {

constexpr double kEps = 0.125;
constexpr int kM = 16, kP = 8;

SampledSignal random_signal(SplitMix64& rng) {
  SampledSignal f(kEps, kM, kP);
  for (cplx& x : f.values) x = cplx(rng.normal(), rng.normal());
  return f;
}

TwoScaleField random_field(SplitMix64& rng) {
  TwoScaleField f(kEps, kM, kP);
  for (cplx& x : f.values) x = cplx(rng.normal(), rng.normal());
  return f;
}

double diff(const SampledSignal& a, const SampledSignal& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

double diff(const TwoScaleField& a, const TwoScaleField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

// Macro frequency ξ_q = 2πq/(εM).
double xi(int q) { return 2 * M_PI * q / (kEps * kM); }

SampledSignal plane_wave(int q) {
  SampledSignal f(kEps, kM, kP);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = std::polar(1.0, xi(q) * f.x(int(i)));
  return f;
}

const CellMask kMask = mask_interval(kP, -0.25, 0.25);

}  // namespace

TEST_CASE("fft matches the direct DFT") {
  SplitMix64 rng(1);
  CVec a = random_vec(16, rng);
  CVec b = a;
  fft(b);
  for (int k = 0; k < 16; ++k) {
    cplx s = 0;
    for (int n = 0; n < 16; ++n) s += a[n] * std::polar(1.0, -2 * M_PI * k * n / 16);
    CHECK(std::abs(s - b[k]) < 1e-12);
  }
  fft(b, true);
  for (int n = 0; n < 16; ++n) CHECK(std::abs(a[n] - b[n]) < 1e-13);
  CVec bad(12);
  CHECK_THROWS_AS(fft(bad), TwoScaleError);
  CHECK_THROWS_AS(SampledSignal(0.1, 12, 4), TwoScaleError);
}

TEST_CASE("gelfand transform: unitary, invertible, plane waves sit on one fiber") {
  SplitMix64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const SampledSignal f = random_signal(rng);
    const FiberField g = gelfand(f);
    CHECK(g.norm() == doctest::Approx(f.norm()).epsilon(1e-12));
    CHECK(diff(gelfand_inverse(g), f) < 1e-12);
  }
  const int q = 3;
  const FiberField g = gelfand(plane_wave(q));
  const double theta = std::remainder(kEps * xi(q), 2 * M_PI);
  for (int j = 0; j < kM; ++j) {
    double mass = 0;
    for (int k = 0; k < kP; ++k) mass += std::norm(g.at(j, k));
    if (std::fabs(g.theta(j) - theta) < 1e-12)
      CHECK(mass > 1);
    else
      CHECK(mass < 1e-20);
  }
}

TEST_CASE("interpolation: isometry, readoff, plane waves and the sampling theorem") {
  SplitMix64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const SampledSignal f = random_signal(rng);
    const TwoScaleField u = interpolate(f);
    CHECK(u.norm() == doctest::Approx(f.norm()).epsilon(1e-10));
    CHECK(diff(readoff(u), f) < 1e-10);
    CHECK(diff(interpolate_adjoint(u), f) < 1e-10);
  }
  // e^{iξx} with |ξ| < π/ε interpolates to itself, independent of y.
  for (int q : {-8, -3, 0, 5, 7}) {
    const TwoScaleField u = interpolate(plane_wave(q));
    for (int m = 0; m < u.x_count(); ++m)
      for (int k = 0; k < kP; ++k) CHECK(std::abs(u.at(m, k) - std::polar(1.0, xi(q) * u.x(m))) < 1e-12);
  }
  // Φ(x, y) = Σ_q c_q(y) e^{iξ_q x}, sampled along x ↦ Φ(x, x/ε), is recovered.
  auto g = [](int q, double y) { return cplx(std::cos(3 * y + q), y * y - 0.1 * q); };
  auto phi = [&](double x, double y) {
    cplx s = 0;
    for (int q : {-8, -2, 1, 6}) s += g(q, y) * std::polar(1.0, xi(q) * x);
    return s;
  };
  SampledSignal f(kEps, kM, kP);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double x = f.x(int(i));
    const double y = x / kEps - std::floor(x / kEps + 0.5);
    f.values[i] = phi(x, y);
  }
  const TwoScaleField u = interpolate(f);
  for (int m = 0; m < u.x_count(); ++m)
    for (int k = 0; k < kP; ++k) CHECK(std::abs(u.at(m, k) - phi(u.x(m), u.y(k))) < 1e-11);
}

TEST_CASE("interpolation adjoint: pairing and projection identities") {
  SplitMix64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const SampledSignal f = random_signal(rng);
    const TwoScaleField u = random_field(rng);
    CHECK(std::abs(inner(interpolate(f), u) - inner(f, interpolate_adjoint(u))) < 1e-10 * f.norm() * u.norm());
    CHECK(diff(interpolate(interpolate_adjoint(u)), smooth_field(u)) < 1e-10);
  }
  // Band-limited field: 𝓘*f(x) = f(x, {x/ε}).
  const TwoScaleField b = smooth_field(random_field(rng));
  CHECK(diff(interpolate_adjoint(b), readoff(b)) < 1e-10);
}

TEST_CASE("translation: phase shift on masked rows, inverse and aliasing") {
  SplitMix64 rng(5);
  const TwoScaleField u = interpolate(random_signal(rng));
  CHECK(diff(translate(u, CellMask(kP, false)), u) == 0.0);
  const TwoScaleField t = translate(u, kMask);
  CHECK(t.norm() == doctest::Approx(u.norm()).epsilon(1e-12));
  CHECK(diff(translate_inverse(t, kMask), u) < 1e-10);
  // e^{iξx} g(y) → e^{iξεy} e^{iξx} g(y) on masked rows.
  const int q = 5;
  TwoScaleField w(kEps, kM, kP);
  for (int m = 0; m < w.x_count(); ++m)
    for (int k = 0; k < kP; ++k) w.at(m, k) = std::polar(1.0, xi(q) * w.x(m)) * (1.0 + w.y(k));
  const TwoScaleField tw = translate(w, kMask);
  for (int m = 0; m < w.x_count(); ++m)
    for (int k = 0; k < kP; ++k) {
      const cplx expect = kMask[k] ? std::polar(1.0, xi(q) * kEps * w.y(k)) * w.at(m, k) : w.at(m, k);
      CHECK(std::abs(tw.at(m, k) - expect) < 1e-12);
    }
  CHECK_THROWS_WITH_AS(translate(random_field(rng), kMask), doctest::Contains("aliasing"), TwoScaleError);
}

TEST_CASE("smoothing: projection onto the macro band") {
  SplitMix64 rng(6);
  const SampledSignal f = random_signal(rng);
  const SampledSignal s = smooth(f);
  CHECK(diff(smooth(s), s) < 1e-12);
  CHECK(s.norm() < f.norm());
  CHECK(diff(smooth(plane_wave(4)), plane_wave(4)) < 1e-12);
  CHECK(smooth(plane_wave(kM)).norm() < 1e-12);
  CHECK(smooth(plane_wave(3 * kM)).norm() < 1e-12);
}

TEST_CASE("composite J: isometry, left inverse, range projection") {
  SplitMix64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const SampledSignal f = random_signal(rng);
    const TwoScaleField j = compose_J(f, kMask);
    CHECK(j.norm() == doctest::Approx(f.norm()).epsilon(1e-10));
    CHECK(j.norm() == doctest::Approx(gelfand(f).norm()).epsilon(1e-10));
    CHECK(diff(compose_J_adjoint(j, kMask), f) < 1e-10);
    const TwoScaleField u = random_field(rng);
    CHECK(std::abs(inner(j, u) - inner(f, compose_J_adjoint(u, kMask))) < 1e-10 * f.norm() * u.norm());
    CHECK(diff(compose_J(compose_J_adjoint(u, kMask), kMask), smooth_field(u)) < 1e-10);
  }
  const SampledSignal f = random_signal(rng);
  CHECK(diff(compose_J(f, CellMask(kP, false)), interpolate(f)) == 0.0);
}
