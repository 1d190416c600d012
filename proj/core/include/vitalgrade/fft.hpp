#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vitalgrade::fft {

/// Forward DFT of a real signal, any length >= 1. Returns the full complex
/// spectrum X[k] = sum_n x[n] * exp(-2*pi*i*k*n/L). Power-of-two lengths run
/// the radix-2 path directly; other lengths go through Bluestein's chirp-z
/// reformulation. Both are O(L log L).
std::vector<std::complex<double>> forward(std::span<const double> x);

/// In-place complex FFT; length must be a power of two.
void forward_pow2(std::vector<std::complex<double>>& a);

/// One-sided magnitude spectrum |X[k]| for k = 0 .. floor(L/2); index 0 is DC.
std::vector<double> magnitude_spectrum(std::span<const double> x);

} // namespace vitalgrade::fft
