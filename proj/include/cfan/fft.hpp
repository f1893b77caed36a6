#pragma once

// Complex FFT for arbitrary lengths: iterative radix-2 for powers of two,
// Bluestein's chirp-z algorithm otherwise (segment lengths here include the
// prime 257 as well as 250 and 6000).

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "cfan/util.hpp"

namespace cfan::fft {

namespace detail {

inline bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (n <= 1) return;

  for (size_t i = 1, j = 0; i < n; ++i) {  // bit reversal
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / double(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= double(n);
}

inline void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  // chirp[k] = exp(-i*pi*k^2/n); k^2 taken mod 2n keeps the angle small.
  std::vector<std::complex<double>> chirp(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (size_t k = 0; k < n; ++k) {
    const uint64_t k2 = (uint64_t(k) * k) % (2 * n);
    const double ang = sign * std::numbers::pi * double(k2) / double(n);
    chirp[k] = {std::cos(ang), std::sin(ang)};
  }

  std::vector<std::complex<double>> u(m), v(m);
  for (size_t k = 0; k < n; ++k) u[k] = a[k] * chirp[k];
  v[0] = std::conj(chirp[0]);
  for (size_t k = 1; k < n; ++k) v[k] = v[m - k] = std::conj(chirp[k]);

  fft_pow2(u, false);
  fft_pow2(v, false);
  for (size_t k = 0; k < m; ++k) u[k] *= v[k];
  fft_pow2(u, true);

  for (size_t k = 0; k < n; ++k) a[k] = u[k] * chirp[k];
  if (inverse)
    for (auto& x : a) x /= double(n);
}

}  // namespace detail

// In-place DFT with the e^{-2pi i kt/n} sign convention (inverse includes 1/n).
inline void transform(std::vector<std::complex<double>>& a, bool inverse = false) {
  if (a.size() <= 1) return;
  if (detail::is_pow2(a.size()))
    detail::fft_pow2(a, inverse);
  else
    detail::fft_bluestein(a, inverse);
}

}  // namespace cfan::fft
