#include "speechgrade/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace speechgrade {

namespace {

constexpr double kLogFloor = 1e-10;

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::vector<double> hamming(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t n = 0; n < len; ++n)
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                  static_cast<double>(len - 1));
  return w;
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Triangular filters evaluated at bin center frequencies; rows n_mels,
// cols fft_size/2 + 1.
std::vector<std::vector<double>> mel_filterbank(const FrameConfig& cfg, int sr) {
  const std::size_t n_bins = cfg.fft_size / 2 + 1;
  const double f_hi = sr / 2.0;
  const double mel_hi = hz_to_mel(f_hi);
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t m = 0; m < edges.size(); ++m)
    edges[m] = mel_to_hz(mel_hi * static_cast<double>(m) /
                         static_cast<double>(cfg.n_mels + 1));
  std::vector<std::vector<double>> fb(cfg.n_mels, std::vector<double>(n_bins, 0.0));
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sr / static_cast<double>(cfg.fft_size);
      if (f >= lo && f <= mid && mid > lo)
        fb[m][k] = (f - lo) / (mid - lo);
      else if (f > mid && f <= hi && hi > mid)
        fb[m][k] = (hi - f) / (hi - mid);
    }
  }
  return fb;
}

// Orthonormal DCT-II rows: dct[j][m], j < n_mfcc, m < n_mels.
std::vector<std::vector<double>> dct_matrix(std::size_t n_out, std::size_t n_in) {
  std::vector<std::vector<double>> d(n_out, std::vector<double>(n_in));
  const double norm0 = std::sqrt(1.0 / static_cast<double>(n_in));
  const double norm = std::sqrt(2.0 / static_cast<double>(n_in));
  for (std::size_t j = 0; j < n_out; ++j)
    for (std::size_t m = 0; m < n_in; ++m)
      d[j][m] = (j == 0 ? norm0 : norm) *
                std::cos(std::numbers::pi * static_cast<double>(j) *
                         (static_cast<double>(m) + 0.5) / static_cast<double>(n_in));
  return d;
}

std::vector<double> preemphasize(const std::vector<double>& x, double c) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t t = 1; t < x.size(); ++t) y[t] = x[t] - c * x[t - 1];
  return y;
}

// |FFT|^2 of the windowed frame, bins 0..fft_size/2.
std::vector<double> power_spectrum(const double* frame, const FrameConfig& cfg,
                                   const std::vector<double>& window) {
  std::vector<std::complex<double>> buf(cfg.fft_size, {0.0, 0.0});
  for (std::size_t n = 0; n < cfg.frame_len; ++n)
    buf[n] = {frame[n] * window[n], 0.0};
  fft_radix2(buf);
  std::vector<double> p(cfg.fft_size / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(buf[k]);
  return p;
}

void check_clip(const AudioClip& clip, const FrameConfig& cfg) {
  cfg.validate();
  if (clip.samples.size() < cfg.frame_len)
    throw ValidationError("ClipTooShort: " + std::to_string(clip.samples.size()) +
                          " samples < frame_len " + std::to_string(cfg.frame_len));
}

}  // namespace

void FrameConfig::validate() const {
  if (hop == 0 || hop > frame_len || frame_len > fft_size)
    throw ValidationError("FrameConfig: need 0 < hop <= frame_len <= fft_size");
  if (!is_power_of_two(fft_size))
    throw ValidationError("FrameConfig: fft_size must be a power of two");
  if (preemphasis < 0.0 || preemphasis >= 1.0)
    throw ValidationError("FrameConfig: need 0 <= preemphasis < 1");
  if (rolloff_fraction <= 0.0 || rolloff_fraction > 1.0)
    throw ValidationError("FrameConfig: need 0 < rolloff_fraction <= 1");
  if (n_mfcc < 1 || n_mfcc > n_mels)
    throw ValidationError("FrameConfig: need 1 <= n_mfcc <= n_mels");
}

void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

std::size_t frame_count(std::size_t n_samples, const FrameConfig& cfg) {
  return 1 + (n_samples - cfg.frame_len) / cfg.hop;
}

MfccSequence compute_mfcc(const AudioClip& clip, const FrameConfig& cfg) {
  check_clip(clip, cfg);
  const auto y = preemphasize(clip.samples, cfg.preemphasis);
  const auto window = hamming(cfg.frame_len);
  const auto fb = mel_filterbank(cfg, clip.sample_rate_hz);
  const auto dct = dct_matrix(cfg.n_mfcc, cfg.n_mels);
  const std::size_t T = frame_count(clip.samples.size(), cfg);

  MfccSequence seq;
  seq.config = cfg;
  seq.frames.resize(T);
  std::vector<double> logmel(cfg.n_mels);
  for (std::size_t t = 0; t < T; ++t) {
    const auto power = power_spectrum(y.data() + t * cfg.hop, cfg, window);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += fb[m][k] * power[k];
      logmel[m] = std::log(std::max(e, kLogFloor));
    }
    auto& out = seq.frames[t];
    out.resize(cfg.n_mfcc);
    for (std::size_t j = 0; j < cfg.n_mfcc; ++j) {
      double acc = 0.0;
      for (std::size_t m = 0; m < cfg.n_mels; ++m) acc += dct[j][m] * logmel[m];
      out[j] = acc;
    }
  }
  return seq;
}

std::vector<std::optional<double>> estimate_pitch_track(const AudioClip& clip,
                                                        const FrameConfig& cfg) {
  check_clip(clip, cfg);
  const std::size_t T = frame_count(clip.samples.size(), cfg);
  const double sr = static_cast<double>(clip.sample_rate_hz);
  const std::size_t lag_min = static_cast<std::size_t>(sr / 400.0);
  const std::size_t lag_max =
      std::min(static_cast<std::size_t>(sr / 50.0), cfg.frame_len - 1);

  std::vector<std::optional<double>> track(T);
  std::vector<double> r(lag_max + 1, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double* f = clip.samples.data() + t * cfg.hop;
    double energy = 0.0;
    for (std::size_t n = 0; n < cfg.frame_len; ++n) energy += f[n] * f[n];
    const double rms = std::sqrt(energy / static_cast<double>(cfg.frame_len));
    if (rms < 0.01) continue;

    double rmax = -2.0;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      double dot = 0.0, e0 = 0.0, e1 = 0.0;
      const std::size_t n_ov = cfg.frame_len - lag;
      for (std::size_t n = 0; n < n_ov; ++n) {
        dot += f[n] * f[n + lag];
        e0 += f[n] * f[n];
        e1 += f[n + lag] * f[n + lag];
      }
      const double den = std::sqrt(e0 * e1);
      r[lag] = den > 0.0 ? dot / den : 0.0;
      rmax = std::max(rmax, r[lag]);
    }
    if (rmax < 0.5) continue;

    std::size_t best = 0;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      const double left = lag > lag_min ? r[lag - 1] : -2.0;
      const double right = lag < lag_max ? r[lag + 1] : -2.0;
      if (r[lag] >= left && r[lag] >= right && r[lag] >= 0.99 * rmax) {
        best = lag;
        break;
      }
    }
    if (best == 0) {  // monotone correlation curve; take the global argmax
      best = lag_min;
      for (std::size_t lag = lag_min; lag <= lag_max; ++lag)
        if (r[lag] > r[best]) best = lag;
    }
    track[t] = sr / static_cast<double>(best);
  }
  return track;
}

PerceptualFeatures extract_perceptual_features(const AudioClip& clip,
                                               const FrameConfig& cfg) {
  check_clip(clip, cfg);
  const auto window = hamming(cfg.frame_len);
  const std::size_t T = frame_count(clip.samples.size(), cfg);
  const double sr = static_cast<double>(clip.sample_rate_hz);
  const double bin_hz = sr / static_cast<double>(cfg.fft_size);

  double sum_sc = 0.0, sum_sr = 0.0, sum_rms = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double* f = clip.samples.data() + t * cfg.hop;
    const auto power = power_spectrum(f, cfg, window);

    double total = 0.0, weighted = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
      total += power[k];
      weighted += static_cast<double>(k) * bin_hz * power[k];
    }
    sum_sc += total > 0.0 ? weighted / total : 0.0;

    double rolloff = 0.0;
    if (total > 0.0) {
      const double target = cfg.rolloff_fraction * total;
      double cum = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) {
        cum += power[k];
        if (cum >= target) {
          rolloff = static_cast<double>(k) * bin_hz;
          break;
        }
      }
    }
    sum_sr += rolloff;

    double energy = 0.0;
    for (std::size_t n = 0; n < cfg.frame_len; ++n) {
      const double v = f[n] * window[n];
      energy += v * v;
    }
    sum_rms += std::sqrt(energy / static_cast<double>(cfg.frame_len));
  }

  PerceptualFeatures out;
  out.f_sc = sum_sc / static_cast<double>(T);
  out.f_sr = sum_sr / static_cast<double>(T);
  out.f_e = sum_rms / static_cast<double>(T);

  const auto mfcc = compute_mfcc(clip, cfg);
  double acc = 0.0;
  for (const auto& frame : mfcc.frames)
    for (const double c : frame) acc += c;
  out.f_mfcc = acc / static_cast<double>(T * cfg.n_mfcc);

  const auto track = estimate_pitch_track(clip, cfg);
  std::vector<double> voiced;
  for (const auto& f0 : track)
    if (f0) voiced.push_back(*f0);
  if (voiced.size() >= 2) {
    double mean = 0.0;
    for (const double v : voiced) mean += v;
    mean /= static_cast<double>(voiced.size());
    double var = 0.0;
    for (const double v : voiced) var += (v - mean) * (v - mean);
    out.f_pv = std::sqrt(var / static_cast<double>(voiced.size()));
  }
  return out;
}

}  // namespace speechgrade
