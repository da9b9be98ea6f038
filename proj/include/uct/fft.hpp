#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace uct {

std::size_t next_pow2(std::size_t n);

/// In-place iterative radix-2 transform. Size must be a power of two.
/// The inverse includes the 1/n factor, so ifft(fft(x)) == x.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

/// Forward transform of a real signal zero-padded to next_pow2(n).
std::vector<std::complex<double>> fft_real_padded(const double* x, std::size_t n);

}  // namespace uct
