#pragma once

#include <complex>
#include <span>

#include "absqm/numerics.hpp"
#include "fft.hpp"

namespace absqm::detail {

inline double mean(std::span<const double> f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s / static_cast<double>(f.size());
}

// Peierls factorisation of the periodic kinetic operator: with a1 = abar + a(x)
// and chi' = a, (d - i a1) = e^{i chi} (d - i abar) e^{-i chi}.
struct PeierlsFactor {
  double abar = 0.0;
  ComplexField gauge;  // e^{i chi}
  RealField shifted_k2;  // (k - abar)^2

  PeierlsFactor(const Grid& g, const RealField& a1) {
    abar = mean(a1);
    RealField fluct(a1.size());
    for (std::size_t i = 0; i < a1.size(); ++i) fluct[i] = a1[i] - abar;
    const RealField chi = antiderivative(fluct, g);
    gauge.resize(a1.size());
    for (std::size_t i = 0; i < a1.size(); ++i) gauge[i] = std::polar(1.0, chi[i]);
    const RealField k = g.wavenumbers();
    shifted_k2.resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) shifted_k2[i] = (k[i] - abar) * (k[i] - abar);
  }

  // Applies e^{i chi} m(k) e^{-i chi} with m given per Fourier mode.
  template <class Multiplier>
  void apply(ComplexField& psi, Multiplier m) const {
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::conj(gauge[i]);
    detail::fft_forward(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= m(shifted_k2[i]);
    detail::fft_inverse(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= gauge[i];
  }
};

}  // namespace absqm::detail
