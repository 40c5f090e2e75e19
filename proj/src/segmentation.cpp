#include "eegaffect/segmentation.hpp"

#include "eegaffect/error.hpp"
#include "eegaffect/util.hpp"

namespace eegaffect {

void SegmentConfig::validate(double sampling_rate_hz) const {
  if (!(window_ms > 0.0)) fail("bad_segment_config", "window_ms must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    fail("bad_segment_config", "overlap_fraction must be in [0, 1)");
  }
  if (!(sampling_rate_hz > 0.0)) fail("bad_segment_config", "sampling rate must be positive");
  const int w = window_samples(sampling_rate_hz);
  if (w < 2) {
    fail("bad_segment_config",
         "derived window_samples = " + std::to_string(w) + ", need >= 2");
  }
  if (hop_samples(sampling_rate_hz) < 1) fail("bad_segment_config", "derived hop_samples < 1");
}

int window_count(int64_t total_samples, int window_samples, int hop_samples) {
  (void)window_samples;
  if (total_samples <= 0) return 0;
  return static_cast<int>((total_samples + hop_samples - 1) / hop_samples);
}

std::vector<Window> segment(const RawRecording& recording, const SegmentConfig& config) {
  config.validate(recording.sampling_rate_hz);
  const int w = config.window_samples(recording.sampling_rate_hz);
  const int hop = config.hop_samples(recording.sampling_rate_hz);
  const int64_t total = recording.n_samples();
  if (total < 1) fail("empty_recording", "recording has no samples: " + recording.subject_id);
  if (recording.channels.size() != static_cast<size_t>(kNumChannels)) {
    fail("channel_count_mismatch",
         "recording has " + std::to_string(recording.channels.size()) + " channels, expected " +
             std::to_string(kNumChannels));
  }

  SessionMeta meta;
  meta.subject_id = recording.subject_id;
  meta.game_id = recording.game_id;

  std::vector<Window> out;
  out.reserve(static_cast<size_t>(window_count(total, w, hop)));
  for (int64_t start = 0, k = 0; start < total; start += hop, ++k) {
    Window win;
    win.session = meta;
    win.index = static_cast<int>(k);
    win.samples.assign(kNumChannels, std::vector<double>(static_cast<size_t>(w), 0.0));
    const int64_t avail = std::min<int64_t>(w, total - start);
    for (int c = 0; c < kNumChannels; ++c) {
      const auto& src = recording.channels[static_cast<size_t>(c)];
      for (int64_t i = 0; i < avail; ++i) {
        win.samples[static_cast<size_t>(c)][static_cast<size_t>(i)] =
            src[static_cast<size_t>(start + i)];
      }
    }
    win.padded_samples = static_cast<int>(w - avail);
    out.push_back(std::move(win));
  }
  return out;
}

}  // namespace eegaffect
