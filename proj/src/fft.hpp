#pragma once

#include <complex>
#include <span>

namespace absqm::detail {

// In-place transforms. The inverse is normalised (forward then inverse is the
// identity). Safe to call from concurrent threads.
void fft_forward(std::span<std::complex<double>> data);
void fft_inverse(std::span<std::complex<double>> data);

}  // namespace absqm::detail
