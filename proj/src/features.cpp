#include "eegaffect/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eegaffect/error.hpp"
#include "eegaffect/util.hpp"

namespace eegaffect {

std::vector<std::string> feature_names() {
  static const char* kStatNames[kFeaturesPerChannel] = {
      "mean", "std", "entropy", "skew", "kurt", "bp_delta", "bp_theta", "bp_alpha", "bp_beta"};
  std::vector<std::string> names;
  names.reserve(kFeatureDim);
  for (int c = 0; c < kNumChannels; ++c) {
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "ch%02d_", c + 1);
    for (const char* stat : kStatNames) names.push_back(std::string(prefix) + stat);
  }
  return names;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> fft(const std::vector<double>& signal, int n) {
  if (n < 1 || (n & (n - 1)) != 0) fail("bad_fft_size", "fft size must be a power of two");
  if (static_cast<int>(signal.size()) > n) {
    fail("bad_fft_size", "signal length " + std::to_string(signal.size()) +
                             " exceeds fft size " + std::to_string(n));
  }

  std::vector<std::complex<double>> x(static_cast<size_t>(n));
  for (size_t i = 0; i < signal.size(); ++i) x[i] = signal[i];

  // bit-reversal permutation
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[static_cast<size_t>(i)], x[static_cast<size_t>(j)]);
  }

  for (int len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / len;
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const auto u = x[static_cast<size_t>(i + k)];
        const auto v = x[static_cast<size_t>(i + k + len / 2)] * w;
        x[static_cast<size_t>(i + k)] = u + v;
        x[static_cast<size_t>(i + k + len / 2)] = u - v;
        w *= wlen;
      }
    }
  }
  return x;
}

double band_power(const std::vector<double>& window_channel, const BandDefinition& band,
                  double sampling_rate_hz) {
  if (!(sampling_rate_hz > 2.0 * band.high_hz)) {
    fail("band_above_nyquist", std::string(to_string(band.band)) + " band [" +
                                   format_g9(band.low_hz) + ", " + format_g9(band.high_hz) +
                                   ") needs fs > " + format_g9(2.0 * band.high_hz) + " Hz, got " +
                                   format_g9(sampling_rate_hz));
  }
  const int n = next_pow2(static_cast<int>(window_channel.size()));
  const auto spectrum = fft(window_channel, n);
  double power = 0.0;
  for (int k = 0; k <= n / 2; ++k) {
    const double freq = static_cast<double>(k) * sampling_rate_hz / n;
    if (freq >= band.low_hz && freq < band.high_hz) {
      power += std::norm(spectrum[static_cast<size_t>(k)]) / (n * sampling_rate_hz);
    }
  }
  return power;
}

TimeStats time_stats(const std::vector<double>& window_channel) {
  TimeStats s;
  const size_t n = window_channel.size();
  if (n < 2) fail("bad_window", "time_stats needs at least 2 samples");

  double sum = 0.0;
  double lo = window_channel[0];
  double hi = window_channel[0];
  for (double v : window_channel) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  s.mean = sum / static_cast<double>(n);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : window_channel) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  s.stddev = std::sqrt(m2);
  if (m2 >= 1e-24) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2) - 3.0;
  }

  // Shannon entropy of the 16-bin equal-width amplitude histogram over
  // [min, max]; values exactly at max fall into the last bin.
  if (hi > lo) {
    std::array<int, kEntropyBins> counts{};
    const double width = (hi - lo) / kEntropyBins;
    for (double v : window_channel) {
      int b = static_cast<int>((v - lo) / width);
      b = std::clamp(b, 0, kEntropyBins - 1);
      ++counts[static_cast<size_t>(b)];
    }
    double entropy = 0.0;
    for (int c : counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / static_cast<double>(n);
      entropy -= p * std::log2(p);
    }
    s.entropy = entropy;
  }
  return s;
}

FeatureVector extract_features(const Window& window,
                               const std::array<BandDefinition, 4>& bands,
                               double sampling_rate_hz) {
  FeatureVector fv;
  fv.subject_id = window.session.subject_id;
  fv.game_id = window.session.game_id;
  fv.window_index = window.index;
  fv.padded_samples = window.padded_samples;

  for (int c = 0; c < kNumChannels; ++c) {
    const auto& chan = window.samples[static_cast<size_t>(c)];
    const TimeStats ts = time_stats(chan);
    const int base = c * kFeaturesPerChannel;
    fv.values[static_cast<size_t>(base + 0)] = ts.mean;
    fv.values[static_cast<size_t>(base + 1)] = ts.stddev;
    fv.values[static_cast<size_t>(base + 2)] = ts.entropy;
    fv.values[static_cast<size_t>(base + 3)] = ts.skewness;
    fv.values[static_cast<size_t>(base + 4)] = ts.kurtosis;
    for (int b = 0; b < kBandsPerChannel; ++b) {
      fv.values[static_cast<size_t>(base + kStatsPerChannel + b)] =
          band_power(chan, bands[static_cast<size_t>(b)], sampling_rate_hz);
    }
  }

  for (double v : fv.values) {
    if (!std::isfinite(v)) {
      fail("non_finite_feature", "non-finite feature for subject " + fv.subject_id +
                                     " window " + std::to_string(fv.window_index));
    }
  }
  return fv;
}

NormalizationStats fit_normalization(const std::vector<FeatureVector>& train_features) {
  if (train_features.empty()) fail("empty_training_set", "cannot fit normalization on zero vectors");
  NormalizationStats stats;
  const double n = static_cast<double>(train_features.size());
  for (const auto& fv : train_features) {
    for (int i = 0; i < kFeatureDim; ++i) stats.mean[static_cast<size_t>(i)] += fv.values[static_cast<size_t>(i)];
  }
  for (auto& m : stats.mean) m /= n;
  for (const auto& fv : train_features) {
    for (int i = 0; i < kFeatureDim; ++i) {
      const double d = fv.values[static_cast<size_t>(i)] - stats.mean[static_cast<size_t>(i)];
      stats.stddev[static_cast<size_t>(i)] += d * d;
    }
  }
  for (auto& sd : stats.stddev) sd = std::sqrt(sd / n);
  return stats;
}

FeatureVector apply_normalization(const FeatureVector& fv, const NormalizationStats& stats) {
  FeatureVector out = fv;
  for (int i = 0; i < kFeatureDim; ++i) {
    const auto idx = static_cast<size_t>(i);
    if (stats.stddev[idx] < NormalizationStats::kConstantEps) {
      out.values[idx] = 0.0;
    } else {
      out.values[idx] = (fv.values[idx] - stats.mean[idx]) / stats.stddev[idx];
    }
  }
  return out;
}

}  // namespace eegaffect
