#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cmath>

#include "lnse/field.hpp"
#include "lnse/operators.hpp"
#include "lnse/rng.hpp"

namespace lnse::testutil {

inline SpectralField random_field(Dims d, int nc, int band, uint64_t seed) {
  SpectralField f(d, nc);
  for (int c = 0; c < nc; ++c)
    f.for_each_mode(c, [&](int k0, int k1, int k2, cplx& v) {
      if (std::abs(k0) > band || std::abs(k1) > band || std::abs(k2) > band) return;
      double g0, g1;
      normal_pair(seed, uint64_t(c), uint64_t(k0 + 128), uint64_t(k1 + 128),
                  uint64_t(k2 + 128), g0, g1);
      v = cplx(g0, g1);
    });
  f.zero_nyquist();
  f.enforce_hermitian();
  return f;
}

inline SpectralField random_divfree(Dims d, int band, uint64_t seed) {
  return leray_project(random_field(d, 3, band, seed));
}

// Smooth symmetric traceless tensor field with L-infinity size about `scale`.
inline SpectralField random_stress(Dims d, int band, double scale, uint64_t seed) {
  SpectralField t = random_field(d, 9, band, seed);
  t = traceless_part(symmetric_part(t));
  double m = norm_linf(t);
  if (m > 0.0) t *= scale / m;
  return t;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double err = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i)
    err = std::max(err, std::abs(a.data()[i] - b.data()[i]));
  return err;
}

}  // namespace lnse::testutil
