#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eegaffect/error.hpp"

namespace eegaffect {

inline constexpr int kNumChannels = 14;
inline constexpr double kDefaultSamplingRateHz = 128.0;

// Emotiv EPOC+ montage used by GAMEEMO-format recordings. Names are carried
// through for audit output only; every downstream stage is positional.
inline const std::array<std::string, kNumChannels>& default_channel_names() {
  static const std::array<std::string, kNumChannels> names = {
      "AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
      "O2", "P8", "T8", "FC6", "F4", "F8", "AF4"};
  return names;
}

enum class GameId { kG1, kG2, kG3, kG4 };
inline constexpr int kNumGames = 4;

const char* to_string(GameId game);
GameId game_from_string(const std::string& s);  // throws Error("bad_game_id")

// One subject x game EEG matrix, channels x samples, microvolts.
struct RawRecording {
  std::string subject_id;
  GameId game_id = GameId::kG1;
  std::vector<std::string> channel_names;          // size kNumChannels
  std::vector<std::vector<double>> channels;       // [kNumChannels][T]
  double sampling_rate_hz = kDefaultSamplingRateHz;

  int64_t n_samples() const { return channels.empty() ? 0 : static_cast<int64_t>(channels[0].size()); }
};

// The four self-report scores, each in [0, 10].
struct RatingVector {
  double boring = 0.0;
  double horrible = 0.0;
  double calm = 0.0;
  double funny = 0.0;
};

inline constexpr const char* kEmotionNames[4] = {"boring", "horrible", "calm", "funny"};

struct SessionMeta {
  std::string subject_id;
  GameId game_id = GameId::kG1;
  std::string source_path;  // file for loaded data, empty for synthetic
  bool synthetic = false;
};

struct Session {
  RawRecording recording;
  RatingVector rating;
  SessionMeta meta;
};

enum class Band { kDelta, kTheta, kAlpha, kBeta };

const char* to_string(Band band);
Band band_from_string(const std::string& s);

// Planted spectral signature for one synthetic game: a sinusoid at the center
// frequency of the dominant band. The dominant band also fixes the rating
// profile (delta->boring, theta->horrible, alpha->calm, beta->funny), so
// every label encoding is learnable from the band-power features.
struct GameSignature {
  Band dominant_band = Band::kAlpha;
  double amplitude = 1.0;
};

struct SynthSpec {
  int n_subjects = 8;
  double duration_s = 60.0;
  double noise_sigma = 0.5;
  double sampling_rate_hz = kDefaultSamplingRateHz;
  std::array<GameSignature, kNumGames> signatures = {
      GameSignature{Band::kDelta, 1.0},
      GameSignature{Band::kTheta, 1.0},
      GameSignature{Band::kAlpha, 1.0},
      GameSignature{Band::kBeta, 1.0},
  };
  uint64_t seed = 0;

  void validate() const;  // throws Error("bad_synth_spec")
};

// Parses the four rating fields in fixed order (boring, horrible, calm,
// funny). Throws Error("non_numeric_rating") / Error("out_of_range_rating").
RatingVector parse_rating_row(const std::vector<std::string>& fields);

// Loads a GAMEEMO-format tree: <root>/<subject_id>/<game>.csv with a header
// row of 14 channel names and one sample per row, plus a rating sidecar CSV
// with header subject_id,game_id,boring,horrible,calm,funny. Every discovered
// recording must have a sidecar row. Sessions come back sorted by
// (subject_id, game_id).
std::vector<Session> load_dataset(const std::filesystem::path& root_dir,
                                  const std::filesystem::path& rating_sidecar,
                                  double sampling_rate_hz = kDefaultSamplingRateHz);

// Deterministic synthetic dataset: per subject x game, every channel carries
// the game's signature sinusoid plus white noise, and ratings put the game's
// dominant emotion at 9 with the rest at 2.
std::vector<Session> generate_synthetic(const SynthSpec& spec);

// Writes sessions in the exact layout load_dataset reads (ratings sidecar at
// <root>/ratings.csv). Sample values are written with 9 significant digits.
void write_dataset(const std::vector<Session>& sessions, const std::filesystem::path& root_dir);

// write_dataset + synth_spec.json describing the generating spec.
void write_synthetic_dataset(const std::vector<Session>& sessions, const SynthSpec& spec,
                             const std::filesystem::path& root_dir);

double band_center_hz(Band band);

// Rating profile implied by a dominant band (dominant emotion 9, others 2).
RatingVector signature_rating(Band dominant_band);

// Order- and content-sensitive digest of every sample value, used by the
// synthetic determinism checks.
uint64_t dataset_hash(const std::vector<Session>& sessions);

}  // namespace eegaffect
