#pragma once

// Signal-processing primitives used by the segmentation pipelines: Savitzky-
// Golay smoothing, normalization, one-sided FFT features, STFT spectrograms
// and Pan-Tompkins R-peak detection. All functions are pure.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "cfan/fft.hpp"
#include "cfan/util.hpp"

namespace cfan::dsp {

// ---- Savitzky-Golay ------------------------------------------------------------

namespace detail {

// Least-squares polynomial smoothing weights: row r gives the weights that
// evaluate the order-`order` fit of a full window at offset `offsets[r]` from
// the window center. Solved through the normal equations; windows here are
// tiny (5 points) so this is well-conditioned.
inline std::vector<std::vector<double>> savgol_weights(int window, int order) {
  const int half = window / 2;
  const int terms = order + 1;

  // G[i][j] = offset_i^j for offsets -half..half
  std::vector<std::vector<double>> G(static_cast<size_t>(window), std::vector<double>(static_cast<size_t>(terms)));
  for (int i = 0; i < window; ++i) {
    double p = 1.0;
    for (int j = 0; j < terms; ++j) {
      G[size_t(i)][size_t(j)] = p;
      p *= double(i - half);
    }
  }

  // N = G^T G,  B = N^{-1} via Gauss-Jordan
  std::vector<std::vector<double>> N(static_cast<size_t>(terms), std::vector<double>(static_cast<size_t>(2 * terms), 0.0));
  for (int a = 0; a < terms; ++a) {
    for (int b = 0; b < terms; ++b)
      for (int i = 0; i < window; ++i)
        N[size_t(a)][size_t(b)] += G[size_t(i)][size_t(a)] * G[size_t(i)][size_t(b)];
    N[size_t(a)][size_t(terms + a)] = 1.0;
  }
  for (int col = 0; col < terms; ++col) {
    int piv = col;
    for (int r = col + 1; r < terms; ++r)
      if (std::abs(N[size_t(r)][size_t(col)]) > std::abs(N[size_t(piv)][size_t(col)])) piv = r;
    std::swap(N[size_t(col)], N[size_t(piv)]);
    const double d = N[size_t(col)][size_t(col)];
    for (int c = 0; c < 2 * terms; ++c) N[size_t(col)][size_t(c)] /= d;
    for (int r = 0; r < terms; ++r) {
      if (r == col) continue;
      const double f = N[size_t(r)][size_t(col)];
      for (int c = 0; c < 2 * terms; ++c)
        N[size_t(r)][size_t(c)] -= f * N[size_t(col)][size_t(c)];
    }
  }

  // weight(eval_offset e, sample i) = sum_j e^j * (N^{-1} G^T)[j][i]
  std::vector<std::vector<double>> weights(static_cast<size_t>(window), std::vector<double>(static_cast<size_t>(window)));
  for (int e = -half; e <= half; ++e) {
    for (int i = 0; i < window; ++i) {
      double w = 0.0, p = 1.0;
      for (int j = 0; j < terms; ++j) {
        double binv = 0.0;
        for (int a = 0; a < terms; ++a)
          binv += N[size_t(j)][size_t(terms + a)] * G[size_t(i)][size_t(a)];
        w += p * binv;
        p *= double(e);
      }
      weights[size_t(e + half)][size_t(i)] = w;
    }
  }
  return weights;
}

}  // namespace detail

// Sliding least-squares polynomial smoothing. Interior points evaluate the fit
// at the window center; boundary points reuse the nearest full window,
// evaluating its polynomial at the off-center position, so the output keeps
// the input length and stays exact on polynomials up to `order`.
inline std::vector<double> savitzky_golay(std::span<const double> x, int window = 5,
                                          int order = 3) {
  require(window % 2 == 1, "savitzky_golay: window must be odd");
  require(order < window, "savitzky_golay: order must be below the window length");
  if (int(x.size()) < window)
    fail("savitzky_golay: input of %zu samples is shorter than the window (%d)",
         x.size(), window);

  const auto weights = detail::savgol_weights(window, order);
  const int half = window / 2;
  const int n = int(x.size());
  std::vector<double> out(static_cast<size_t>(n));

  for (int t = 0; t < n; ++t) {
    int start = std::clamp(t - half, 0, n - window);
    const auto& w = weights[size_t(t - start)];
    double acc = 0.0;
    for (int i = 0; i < window; ++i) acc += w[size_t(i)] * x[size_t(start + i)];
    out[size_t(t)] = acc;
  }
  return out;
}

// ---- normalization ---------------------------------------------------------------

inline double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / double(x.size());
}

inline std::vector<double> mean_subtract(std::span<const double> x) {
  require(!x.empty(), "mean_subtract: empty input");
  const double m = mean_of(x);
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] - m;
  return out;
}

// Population (not sample) standard deviation; a zero-variance input is an
// error so degenerate segments get rejected upstream.
inline std::vector<double> zscore(std::span<const double> x) {
  require(x.size() >= 2, "zscore: need at least two samples");
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / double(x.size()));
  if (!(sd > 1e-12)) throw Error("zscore: zero standard deviation");
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / sd;
  return out;
}

// ---- FFT features -----------------------------------------------------------------

// One-sided spectrum of a real signal, bins k = 0..floor(n/2).
struct ComplexSpectrum {
  std::vector<double> real;
  std::vector<double> imag;
  size_t bins() const { return real.size(); }
};

inline ComplexSpectrum fft_real_imag(std::span<const double> x) {
  require(!x.empty(), "fft_real_imag: empty input");
  const size_t n = x.size();
  std::vector<std::complex<double>> a(n);
  for (size_t i = 0; i < n; ++i) a[i] = x[i];
  fft::transform(a);

  const size_t bins = n / 2 + 1;
  ComplexSpectrum s;
  s.real.resize(bins);
  s.imag.resize(bins);
  for (size_t k = 0; k < bins; ++k) {
    s.real[k] = a[k].real();
    s.imag[k] = a[k].imag();
  }
  s.imag[0] = 0.0;  // exact for real input
  if (n % 2 == 0) s.imag[bins - 1] = 0.0;
  return s;
}

// ---- STFT spectrogram ---------------------------------------------------------------

struct Spectrogram {
  static constexpr int kSize = 64;
  std::array<double, kSize * kSize> pixels{};  // row = frequency bin, col = frame
  double at(int row, int col) const { return pixels[size_t(row) * kSize + size_t(col)]; }
  double& at(int row, int col) { return pixels[size_t(row) * kSize + size_t(col)]; }
};

namespace detail {

inline constexpr int kStftWindow = 64;
inline constexpr int kStftHop = 16;  // window 64, overlap 48
inline constexpr int kStftBins = kStftWindow / 2 + 1;

// Periodic Hann window.
inline std::array<double, kStftWindow> hann64() {
  std::array<double, kStftWindow> w{};
  for (int i = 0; i < kStftWindow; ++i)
    w[size_t(i)] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / kStftWindow));
  return w;
}

}  // namespace detail

// Hann-windowed frame magnitudes over the 33 one-sided bins; frames hop by 16.
// Matrix layout: frame-major [n_frames][33].
inline std::vector<std::array<double, detail::kStftBins>> stft_frames(
    std::span<const double> x) {
  using namespace detail;
  if (int(x.size()) < kStftWindow)
    fail("stft: input of %zu samples is shorter than one %d-sample window", x.size(),
         kStftWindow);
  const auto window = hann64();
  const int n_frames = (int(x.size()) - kStftWindow) / kStftHop + 1;

  std::vector<std::array<double, kStftBins>> frames(static_cast<size_t>(n_frames));
  std::vector<std::complex<double>> buf(kStftWindow);
  for (int f = 0; f < n_frames; ++f) {
    for (int i = 0; i < kStftWindow; ++i)
      buf[size_t(i)] = x[size_t(f * kStftHop + i)] * window[size_t(i)];
    fft::transform(buf);
    for (int k = 0; k < kStftBins; ++k) frames[size_t(f)][size_t(k)] = std::abs(buf[size_t(k)]);
  }
  return frames;
}

// Grayscale 64x64 magnitude image: STFT frame magnitudes resized with
// corner-aligned bilinear interpolation.
inline Spectrogram stft_spectrogram(std::span<const double> x) {
  using namespace detail;
  const auto frames = stft_frames(x);
  const int n_frames = int(frames.size());

  Spectrogram img;
  for (int r = 0; r < Spectrogram::kSize; ++r) {
    const double sr = double(r) * (kStftBins - 1) / (Spectrogram::kSize - 1);
    const int r0 = int(sr);
    const int r1 = std::min(r0 + 1, kStftBins - 1);
    const double fr = sr - r0;
    for (int c = 0; c < Spectrogram::kSize; ++c) {
      const double sc =
          n_frames == 1 ? 0.0 : double(c) * (n_frames - 1) / (Spectrogram::kSize - 1);
      const int c0 = int(sc);
      const int c1 = std::min(c0 + 1, n_frames - 1);
      const double fc = sc - c0;
      const double top = frames[size_t(c0)][size_t(r0)] * (1 - fc) +
                         frames[size_t(c1)][size_t(r0)] * fc;
      const double bot = frames[size_t(c0)][size_t(r1)] * (1 - fc) +
                         frames[size_t(c1)][size_t(r1)] * fc;
      img.at(r, c) = top * (1 - fr) + bot * fr;
    }
  }
  return img;
}

// ---- Pan-Tompkins R-peak detection ------------------------------------------------

namespace detail {

struct Biquad {
  double b0, b1, b2, a1, a2;  // y = b0 x + b1 x1 + b2 x2 - a1 y1 - a2 y2
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  double step(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1; x1 = x;
    y2 = y1; y1 = y;
    return y;
  }
};

// Order-2 Butterworth sections via the bilinear transform.
inline Biquad butter_lowpass(double fc, double fs) {
  const double k = std::tan(std::numbers::pi * fc / fs);
  const double q = std::numbers::sqrt2;  // 1/Q for Butterworth
  const double norm = 1.0 / (1.0 + q * k + k * k);
  return {k * k * norm, 2.0 * k * k * norm, k * k * norm,
          2.0 * (k * k - 1.0) * norm, (1.0 - q * k + k * k) * norm};
}

inline Biquad butter_highpass(double fc, double fs) {
  const double k = std::tan(std::numbers::pi * fc / fs);
  const double q = std::numbers::sqrt2;
  const double norm = 1.0 / (1.0 + q * k + k * k);
  return {norm, -2.0 * norm, norm, 2.0 * (k * k - 1.0) * norm,
          (1.0 - q * k + k * k) * norm};
}

}  // namespace detail

// Classic Pan-Tompkins pipeline: 5-15 Hz band-pass (order-2 sections, forward
// only), five-point derivative, squaring, 150 ms moving-window integration,
// then adaptive dual-threshold peak picking with a 200 ms refractory period
// and a missed-beat searchback at half threshold. Detections are refined to
// the band-passed magnitude maximum within +-50 ms.
inline std::vector<int64_t> pan_tompkins_rpeaks(std::span<const double> x, double fs) {
  require(fs > 0, "pan_tompkins: sampling frequency must be positive");
  const int64_t n = int64_t(x.size());
  if (n < int64_t(2 * fs)) fail("pan_tompkins: need at least 2 s of signal");

  // band-pass
  auto hp = detail::butter_highpass(5.0, fs);
  auto lp = detail::butter_lowpass(15.0, fs);
  std::vector<double> bp(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) bp[size_t(i)] = lp.step(hp.step(x[size_t(i)]));

  // derivative, squaring
  std::vector<double> sq(static_cast<size_t>(n), 0.0);
  for (int64_t i = 4; i < n; ++i) {
    const double d = (2 * bp[size_t(i)] + bp[size_t(i - 1)] - bp[size_t(i - 3)] -
                      2 * bp[size_t(i - 4)]) / 8.0;
    sq[size_t(i)] = d * d;
  }

  // moving-window integration, 150 ms
  const int64_t win = std::max<int64_t>(1, int64_t(std::lround(0.150 * fs)));
  std::vector<double> mwi(static_cast<size_t>(n), 0.0);
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    acc += sq[size_t(i)];
    if (i >= win) acc -= sq[size_t(i - win)];
    mwi[size_t(i)] = acc / double(win);
  }

  // thresholds seeded from the first 2 s
  const int64_t init = int64_t(2.0 * fs);
  double init_max = 0.0, init_mean = 0.0;
  for (int64_t i = 0; i < init; ++i) {
    init_max = std::max(init_max, mwi[size_t(i)]);
    init_mean += mwi[size_t(i)];
  }
  init_mean /= double(init);
  double spk = init_max * 0.25 + init_mean * 0.75;
  double npk = init_mean * 0.5;

  const int64_t refractory = int64_t(std::lround(0.200 * fs));
  const int64_t refine_half = int64_t(std::lround(0.050 * fs));
  const int64_t delay = win / 2 + 2;  // integrator + derivative group delay

  std::vector<int64_t> peaks;          // accepted, on the mwi time axis
  std::vector<int64_t> candidates;     // local maxima of mwi
  for (int64_t i = 1; i + 1 < n; ++i)
    if (mwi[size_t(i)] > mwi[size_t(i - 1)] && mwi[size_t(i)] >= mwi[size_t(i + 1)])
      candidates.push_back(i);

  std::vector<double> rr_recent;
  auto rr_average = [&]() {
    if (rr_recent.empty()) return 0.0;
    double s = 0.0;
    const size_t k = std::min<size_t>(8, rr_recent.size());
    for (size_t i = rr_recent.size() - k; i < rr_recent.size(); ++i) s += rr_recent[i];
    return s / double(k);
  };

  size_t last_accepted_candidate = 0;
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const int64_t i = candidates[ci];
    const double v = mwi[size_t(i)];
    const double threshold = npk + 0.25 * (spk - npk);

    if (!peaks.empty() && i - peaks.back() < refractory) continue;

    if (v > threshold) {
      if (!peaks.empty()) rr_recent.push_back(double(i - peaks.back()));
      peaks.push_back(i);
      last_accepted_candidate = ci;
      spk = 0.125 * v + 0.875 * spk;
    } else {
      npk = 0.125 * v + 0.875 * npk;
      // searchback: if a beat is overdue, accept the best candidate above
      // half threshold since the last accepted peak
      const double rr = rr_average();
      if (!peaks.empty() && rr > 0 && double(i - peaks.back()) > 1.66 * rr) {
        size_t best = 0;
        double best_v = 0.0;
        for (size_t cj = last_accepted_candidate + 1; cj <= ci; ++cj) {
          const int64_t j = candidates[cj];
          if (j - peaks.back() < refractory) continue;
          const double vj = mwi[size_t(j)];
          if (vj > 0.5 * threshold && vj > best_v) {
            best_v = vj;
            best = cj;
          }
        }
        if (best_v > 0.0) {
          const int64_t j = candidates[best];
          rr_recent.push_back(double(j - peaks.back()));
          peaks.push_back(j);
          last_accepted_candidate = best;
          spk = 0.25 * best_v + 0.75 * spk;
        }
      }
    }
  }

  // Refine to the band-passed magnitude maximum (|.|: leads may be inverted).
  // The integrator delay depends on how the burst length compares to the
  // window, so a single compensated guess can start on the wrong lobe;
  // hill-climb in +-50 ms hops until the point is a true local maximum.
  std::vector<int64_t> out;
  out.reserve(peaks.size());
  for (int64_t p : peaks) {
    int64_t cur = std::clamp<int64_t>(p - delay, 0, n - 1);
    for (int hop = 0; hop < 10; ++hop) {
      const int64_t lo = std::max<int64_t>(0, cur - refine_half);
      const int64_t hi = std::min<int64_t>(n - 1, cur + refine_half);
      int64_t best = cur;
      for (int64_t j = lo; j <= hi; ++j)
        if (std::abs(bp[size_t(j)]) > std::abs(bp[size_t(best)])) best = j;
      if (best == cur) break;
      cur = best;
    }
    if (out.empty() || cur > out.back()) out.push_back(cur);
  }
  return out;
}

}  // namespace cfan::dsp
