#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace asc {

// In-place complex FFT. Radix-2 for power-of-two lengths, O(n^2) DFT
// otherwise; both paths are pure functions, so callers may run them
// concurrently without shared plan state.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

// Power spectrum (|X_k|^2, k = 0..fft_len/2) of a real frame zero-padded to
// fft_len. frame_len must be <= fft_len.
std::vector<double> rfft_power(const double* frame, std::size_t frame_len, std::size_t fft_len);

}  // namespace asc
