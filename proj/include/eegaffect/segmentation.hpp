#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eegaffect/data_ingest.hpp"

namespace eegaffect {

struct SegmentConfig {
  double window_ms = 500.0;
  double overlap_fraction = 0.5;  // in [0, 1)

  // round-half-up conversions, documented so window counts are reproducible
  // across implementations.
  int window_samples(double sampling_rate_hz) const {
    return static_cast<int>(std::floor(window_ms * sampling_rate_hz / 1000.0 + 0.5));
  }
  int hop_samples(double sampling_rate_hz) const {
    const int w = window_samples(sampling_rate_hz);
    return static_cast<int>(std::floor(w * (1.0 - overlap_fraction) + 0.5));
  }

  // throws Error("bad_segment_config") when derived sizes are degenerate
  void validate(double sampling_rate_hz) const;
};

// One fixed-length multi-channel slice. The final window of a session is
// zero-padded to full length; padded_samples records how many trailing
// samples are padding.
struct Window {
  std::vector<std::vector<double>> samples;  // [kNumChannels][window_samples]
  SessionMeta session;
  int index = 0;
  int padded_samples = 0;
};

// Number of windows segment() emits: starts k*hop < T, i.e. ceil(T / hop).
int window_count(int64_t total_samples, int window_samples, int hop_samples);

// Window k covers [k*hop, k*hop + window); emitted while k*hop < T, tail
// zero-padded. Windows are returned in ascending index order.
std::vector<Window> segment(const RawRecording& recording, const SegmentConfig& config);

}  // namespace eegaffect
