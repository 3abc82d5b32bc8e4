#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "speechgrade/corpus.hpp"
#include "speechgrade/errors.hpp"

namespace speechgrade {

// 25 ms / 10 ms framing at 16 kHz with the usual speech front-end settings.
struct FrameConfig {
  std::size_t frame_len = 400;
  std::size_t hop = 160;
  std::size_t fft_size = 512;
  double preemphasis = 0.97;
  std::size_t n_mels = 26;
  std::size_t n_mfcc = 13;
  double rolloff_fraction = 0.85;

  void validate() const;
};

// Utterance-level summaries of the five perceptual features.
struct PerceptualFeatures {
  double f_sc = 0.0;    // mean spectral centroid, Hz
  double f_sr = 0.0;    // mean spectral rolloff, Hz
  double f_mfcc = 0.0;  // mean over frames and coefficients
  double f_pv = 0.0;    // std of voiced F0, Hz
  double f_e = 0.0;     // mean frame RMS energy
};

struct MfccSequence {
  std::vector<std::vector<double>> frames;  // T x n_mfcc
  FrameConfig config;
};

// In-place radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

std::size_t frame_count(std::size_t n_samples, const FrameConfig& cfg);

// Pre-emphasis, Hamming window, |FFT|^2, triangular mel filters over
// 0..sr/2 (mel = 2595*log10(1 + f/700)), log with floor 1e-10, orthonormal
// DCT-II; keeps the first n_mfcc coefficients, c0 included.
MfccSequence compute_mfcc(const AudioClip& clip, const FrameConfig& cfg);

// Centroid/rolloff/RMS per windowed raw frame (no pre-emphasis so the
// values are invariant under time reversal); f_mfcc and f_pv from the ops
// below. Zero-energy frames define centroid and rolloff as 0.
PerceptualFeatures extract_perceptual_features(const AudioClip& clip,
                                               const FrameConfig& cfg);

// Per-frame F0 via normalized autocorrelation over lags for 50..400 Hz.
// Voiced iff the peak is >= 0.5 and the raw frame RMS is >= 0.01; the
// reported lag is the smallest local maximum within 1% of the peak, which
// resolves period-multiple ambiguity toward the higher frequency.
std::vector<std::optional<double>> estimate_pitch_track(const AudioClip& clip,
                                                        const FrameConfig& cfg);

}  // namespace speechgrade
