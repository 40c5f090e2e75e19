#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "eegaffect/segmentation.hpp"

namespace eegaffect {

struct BandDefinition {
  Band band = Band::kDelta;
  double low_hz = 0.0;
  double high_hz = 0.0;  // band is the half-open interval [low_hz, high_hz)
};

// Clinical convention band edges; the dataset only names the bands.
inline const std::array<BandDefinition, 4>& default_bands() {
  static const std::array<BandDefinition, 4> bands = {
      BandDefinition{Band::kDelta, 0.5, 4.0},
      BandDefinition{Band::kTheta, 4.0, 8.0},
      BandDefinition{Band::kAlpha, 8.0, 13.0},
      BandDefinition{Band::kBeta, 13.0, 30.0},
  };
  return bands;
}

inline constexpr int kStatsPerChannel = 5;   // mean, std, entropy, skewness, kurtosis
inline constexpr int kBandsPerChannel = 4;   // delta, theta, alpha, beta
inline constexpr int kFeaturesPerChannel = kStatsPerChannel + kBandsPerChannel;
inline constexpr int kFeatureDim = kNumChannels * kFeaturesPerChannel;  // 126
inline constexpr int kEntropyBins = 16;

// Column names in feature-vector order (ch01_mean ... ch14_bp_beta).
std::vector<std::string> feature_names();

struct FeatureVector {
  std::array<double, kFeatureDim> values{};
  std::string subject_id;
  GameId game_id = GameId::kG1;
  int window_index = 0;
  int padded_samples = 0;
};

struct TimeStats {
  double mean = 0.0;
  double stddev = 0.0;      // population
  double entropy = 0.0;     // Shannon bits over a 16-bin amplitude histogram
  double skewness = 0.0;
  double kurtosis = 0.0;    // excess (normal -> 0)
};

int next_pow2(int n);

// Iterative radix-2 DFT, X[k] = sum_t x[t] * exp(-2*pi*i*k*t/n), zero-padding
// the input to n. n must be a power of two >= signal length.
std::vector<std::complex<double>> fft(const std::vector<double>& signal, int n);

// Rectangular-window periodogram power inside [band.low_hz, band.high_hz):
// sum over one-sided bins of |X[k]|^2 / (n * fs) with n the next power of two
// >= the signal length. Throws Error("band_above_nyquist") when
// fs <= 2 * band.high_hz.
double band_power(const std::vector<double>& window_channel, const BandDefinition& band,
                  double sampling_rate_hz);

// Degenerate inputs return defined values: entropy 0 when min == max,
// skewness/kurtosis 0 when the second moment is below 1e-24.
TimeStats time_stats(const std::vector<double>& window_channel);

// Per channel: (mean, std, entropy, skewness, kurtosis, P_delta, P_theta,
// P_alpha, P_beta), concatenated channel-major.
FeatureVector extract_features(const Window& window,
                               const std::array<BandDefinition, 4>& bands,
                               double sampling_rate_hz);

struct NormalizationStats {
  std::array<double, kFeatureDim> mean{};
  std::array<double, kFeatureDim> stddev{};  // population; entries < kConstantEps flag constants

  static constexpr double kConstantEps = 1e-12;
};

// Fit on the training split only. Throws Error("empty_training_set").
NormalizationStats fit_normalization(const std::vector<FeatureVector>& train_features);

// (x - mean) / std elementwise; constant features map to 0.
FeatureVector apply_normalization(const FeatureVector& fv, const NormalizationStats& stats);

}  // namespace eegaffect
