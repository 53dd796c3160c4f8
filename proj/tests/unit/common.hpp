#pragma once

#include <random>

#include "modnls/spectral.hpp"

namespace testutil {

/// Random field with DFT support in |xi|_inf <= band (band = 0: all modes).
inline modnls::SpectralField random_field(const modnls::GridSpec& g, std::uint64_t seed, double band = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  modnls::CVector spec(g.size());
  std::vector<int> idx(static_cast<std::size_t>(g.d));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    g.unravel(i, idx);
    bool keep = true;
    for (int v : idx) keep = keep && (band <= 0.0 || std::abs(g.frequency(v)) <= band + 1e-12);
    const double re = n(rng);
    const double im = n(rng);
    if (keep) spec[i] = {re, im};
  }
  return modnls::SpectralField::from_spectrum(g, std::move(spec));
}

inline double rel_diff(const modnls::SpectralField& a, const modnls::SpectralField& b) {
  return modnls::lp_norm(modnls::subtract(a, b), 2.0) / std::max(modnls::lp_norm(b, 2.0), 1e-300);
}

}  // namespace testutil
