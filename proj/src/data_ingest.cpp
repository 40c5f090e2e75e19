#include "eegaffect/data_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "eegaffect/error.hpp"
#include "eegaffect/parallel.hpp"
#include "eegaffect/util.hpp"

namespace eegaffect {

namespace fs = std::filesystem;

const char* to_string(GameId game) {
  switch (game) {
    case GameId::kG1: return "G1";
    case GameId::kG2: return "G2";
    case GameId::kG3: return "G3";
    case GameId::kG4: return "G4";
  }
  fail("bad_game_id", "invalid game id value");
}

GameId game_from_string(const std::string& s) {
  if (s == "G1") return GameId::kG1;
  if (s == "G2") return GameId::kG2;
  if (s == "G3") return GameId::kG3;
  if (s == "G4") return GameId::kG4;
  fail("bad_game_id", "unknown game id: " + s);
}

const char* to_string(Band band) {
  switch (band) {
    case Band::kDelta: return "delta";
    case Band::kTheta: return "theta";
    case Band::kAlpha: return "alpha";
    case Band::kBeta: return "beta";
  }
  fail("bad_band", "invalid band value");
}

Band band_from_string(const std::string& s) {
  if (s == "delta") return Band::kDelta;
  if (s == "theta") return Band::kTheta;
  if (s == "alpha") return Band::kAlpha;
  if (s == "beta") return Band::kBeta;
  fail("bad_band", "unknown band name: " + s);
}

double band_center_hz(Band band) {
  switch (band) {
    case Band::kDelta: return (0.5 + 4.0) / 2.0;
    case Band::kTheta: return (4.0 + 8.0) / 2.0;
    case Band::kAlpha: return (8.0 + 13.0) / 2.0;
    case Band::kBeta: return (13.0 + 30.0) / 2.0;
  }
  fail("bad_band", "invalid band value");
}

RatingVector signature_rating(Band dominant_band) {
  RatingVector r{2.0, 2.0, 2.0, 2.0};
  switch (dominant_band) {
    case Band::kDelta: r.boring = 9.0; break;
    case Band::kTheta: r.horrible = 9.0; break;
    case Band::kAlpha: r.calm = 9.0; break;
    case Band::kBeta: r.funny = 9.0; break;
  }
  return r;
}

void SynthSpec::validate() const {
  if (n_subjects < 2) fail("bad_synth_spec", "n_subjects must be >= 2");
  if (!(duration_s > 0.0)) fail("bad_synth_spec", "duration_s must be positive");
  if (!(noise_sigma >= 0.0)) fail("bad_synth_spec", "noise_sigma must be non-negative");
  if (!(sampling_rate_hz > 0.0)) fail("bad_synth_spec", "sampling_rate_hz must be positive");
  for (const auto& sig : signatures) {
    if (!(sig.amplitude >= 0.0)) fail("bad_synth_spec", "signature amplitude must be >= 0");
  }
}

RatingVector parse_rating_row(const std::vector<std::string>& fields) {
  if (fields.size() != 4) {
    fail("non_numeric_rating", "expected 4 rating fields, got " + std::to_string(fields.size()));
  }
  double values[4];
  for (int i = 0; i < 4; ++i) {
    if (!try_parse_double(fields[static_cast<size_t>(i)], values[i]) ||
        !std::isfinite(values[i])) {
      fail("non_numeric_rating",
           std::string("rating field '") + fields[static_cast<size_t>(i)] + "' for " +
               kEmotionNames[i] + " is not a finite number");
    }
    if (values[i] < 0.0 || values[i] > 10.0) {
      fail("out_of_range_rating", std::string(kEmotionNames[i]) + " rating " +
                                      format_g9(values[i]) + " outside [0, 10]");
    }
  }
  return RatingVector{values[0], values[1], values[2], values[3]};
}

namespace {

struct RatingKey {
  std::string subject;
  GameId game;
  bool operator<(const RatingKey& o) const {
    if (subject != o.subject) return subject < o.subject;
    return static_cast<int>(game) < static_cast<int>(o.game);
  }
};

std::map<RatingKey, RatingVector> load_sidecar(const fs::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) fail("io_error", "cannot open rating sidecar: " + sidecar.string());

  std::string line;
  if (!std::getline(in, line)) fail("malformed_csv", "rating sidecar is empty: " + sidecar.string());
  const auto header = split_csv_row(line);
  const std::vector<std::string> expected = {"subject_id", "game_id", "boring",
                                             "horrible", "calm", "funny"};
  if (header != expected) {
    fail("malformed_csv", "rating sidecar header mismatch in " + sidecar.string() +
                              " (expected subject_id,game_id,boring,horrible,calm,funny)");
  }

  std::map<RatingKey, RatingVector> ratings;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 6) {
      fail("malformed_csv", sidecar.string() + ":" + std::to_string(lineno) + ": expected 6 fields, got " +
                                std::to_string(fields.size()));
    }
    RatingKey key{fields[0], game_from_string(fields[1])};
    try {
      ratings[key] = parse_rating_row({fields[2], fields[3], fields[4], fields[5]});
    } catch (const Error& e) {
      fail(e.code(), sidecar.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ratings;
}

RawRecording load_recording_csv(const fs::path& path, const std::string& subject, GameId game,
                                double sampling_rate_hz) {
  std::ifstream in(path);
  if (!in) fail("io_error", "cannot open recording: " + path.string());

  RawRecording rec;
  rec.subject_id = subject;
  rec.game_id = game;
  rec.sampling_rate_hz = sampling_rate_hz;

  std::string line;
  if (!std::getline(in, line)) fail("malformed_csv", path.string() + ": missing header row");
  const auto header = split_csv_row(line);
  if (header.size() != static_cast<size_t>(kNumChannels)) {
    fail("channel_count_mismatch", path.string() + ": header has " +
                                       std::to_string(header.size()) + " columns, expected " +
                                       std::to_string(kNumChannels));
  }
  rec.channel_names.assign(header.begin(), header.end());
  rec.channels.assign(kNumChannels, {});

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != static_cast<size_t>(kNumChannels)) {
      fail("malformed_csv", path.string() + ":" + std::to_string(lineno) + ": row has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(kNumChannels));
    }
    for (int c = 0; c < kNumChannels; ++c) {
      double v = 0.0;
      if (!try_parse_double(fields[static_cast<size_t>(c)], v)) {
        fail("malformed_csv", path.string() + ":" + std::to_string(lineno) +
                                  ": cannot parse sample '" + fields[static_cast<size_t>(c)] + "'");
      }
      if (!std::isfinite(v)) {
        fail("non_finite_sample", path.string() + ":" + std::to_string(lineno) +
                                      ": non-finite sample in column " + std::to_string(c + 1));
      }
      rec.channels[static_cast<size_t>(c)].push_back(v);
    }
  }
  if (rec.n_samples() < 1) fail("malformed_csv", path.string() + ": no sample rows");
  return rec;
}

}  // namespace

std::vector<Session> load_dataset(const fs::path& root_dir, const fs::path& rating_sidecar,
                                  double sampling_rate_hz) {
  if (!fs::exists(root_dir) || !fs::is_directory(root_dir)) {
    fail("io_error", "dataset root is not a directory: " + root_dir.string());
  }

  struct Discovered {
    std::string subject;
    GameId game;
    fs::path path;
  };
  std::vector<Discovered> found;
  std::vector<fs::path> subject_dirs;
  for (const auto& entry : fs::directory_iterator(root_dir)) {
    if (entry.is_directory()) subject_dirs.push_back(entry.path());
  }
  std::sort(subject_dirs.begin(), subject_dirs.end());
  for (const auto& dir : subject_dirs) {
    const std::string subject = dir.filename().string();
    for (int g = 0; g < kNumGames; ++g) {
      const GameId game = static_cast<GameId>(g);
      const fs::path file = dir / (std::string(to_string(game)) + ".csv");
      if (fs::exists(file)) found.push_back({subject, game, file});
    }
  }
  if (found.empty()) return {};

  const auto ratings = load_sidecar(rating_sidecar);

  std::vector<Session> sessions(found.size());
  // Per-file parsing is independent; slots are disjoint so ordering stays
  // deterministic. Errors are rethrown on the calling thread.
  std::vector<std::exception_ptr> errors(found.size());
  parallel_for(static_cast<int64_t>(found.size()), [&](int64_t i) {
    const auto& d = found[static_cast<size_t>(i)];
    try {
      const auto it = ratings.find(RatingKey{d.subject, d.game});
      if (it == ratings.end()) {
        fail("missing_rating", "no sidecar rating for subject " + d.subject + " game " +
                                   to_string(d.game) + " (" + d.path.string() + ")");
      }
      Session s;
      s.recording = load_recording_csv(d.path, d.subject, d.game, sampling_rate_hz);
      s.rating = it->second;
      s.meta = SessionMeta{d.subject, d.game, d.path.string(), false};
      sessions[static_cast<size_t>(i)] = std::move(s);
    } catch (...) {
      errors[static_cast<size_t>(i)] = std::current_exception();
    }
  });
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return sessions;
}

std::vector<Session> generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const int64_t n_samples = std::llround(spec.duration_s * spec.sampling_rate_hz);

  std::vector<Session> sessions;
  sessions.resize(static_cast<size_t>(spec.n_subjects) * kNumGames);
  parallel_for(static_cast<int64_t>(sessions.size()), [&](int64_t idx) {
    const int subj = static_cast<int>(idx) / kNumGames;
    const int g = static_cast<int>(idx) % kNumGames;
    const GameId game = static_cast<GameId>(g);
    const GameSignature& sig = spec.signatures[static_cast<size_t>(g)];

    char name[16];
    std::snprintf(name, sizeof(name), "S%02d", subj + 1);

    Session s;
    s.recording.subject_id = name;
    s.recording.game_id = game;
    s.recording.sampling_rate_hz = spec.sampling_rate_hz;
    s.recording.channel_names.assign(default_channel_names().begin(), default_channel_names().end());
    s.recording.channels.assign(kNumChannels, std::vector<double>(static_cast<size_t>(n_samples)));

    const double freq = band_center_hz(sig.dominant_band);
    std::mt19937_64 rng(derive_seed(spec.seed, static_cast<uint64_t>(idx)));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int c = 0; c < kNumChannels; ++c) {
      auto& chan = s.recording.channels[static_cast<size_t>(c)];
      for (int64_t t = 0; t < n_samples; ++t) {
        const double phase = 2.0 * std::numbers::pi * freq * static_cast<double>(t) /
                             spec.sampling_rate_hz;
        double v = sig.amplitude * std::sin(phase);
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
        chan[static_cast<size_t>(t)] = v;
      }
    }

    s.rating = signature_rating(sig.dominant_band);
    s.meta = SessionMeta{name, game, "", true};
    sessions[static_cast<size_t>(idx)] = std::move(s);
  });
  return sessions;
}

void write_dataset(const std::vector<Session>& sessions, const fs::path& root_dir) {
  fs::create_directories(root_dir);

  std::ostringstream sidecar;
  sidecar << "subject_id,game_id,boring,horrible,calm,funny\n";
  for (const auto& s : sessions) {
    const fs::path dir = root_dir / s.meta.subject_id;
    fs::create_directories(dir);
    const fs::path file = dir / (std::string(to_string(s.meta.game_id)) + ".csv");
    std::ofstream out(file);
    if (!out) fail("io_error", "cannot write " + file.string());

    for (int c = 0; c < kNumChannels; ++c) {
      out << s.recording.channel_names[static_cast<size_t>(c)] << (c + 1 < kNumChannels ? ',' : '\n');
    }
    const int64_t n = s.recording.n_samples();
    for (int64_t t = 0; t < n; ++t) {
      for (int c = 0; c < kNumChannels; ++c) {
        out << format_g9(s.recording.channels[static_cast<size_t>(c)][static_cast<size_t>(t)])
            << (c + 1 < kNumChannels ? ',' : '\n');
      }
    }
    if (!out) fail("io_error", "write failed: " + file.string());

    sidecar << s.meta.subject_id << ',' << to_string(s.meta.game_id) << ','
            << format_g9(s.rating.boring) << ',' << format_g9(s.rating.horrible) << ','
            << format_g9(s.rating.calm) << ',' << format_g9(s.rating.funny) << '\n';
  }

  const fs::path sidecar_path = root_dir / "ratings.csv";
  std::ofstream out(sidecar_path);
  if (!out) fail("io_error", "cannot write " + sidecar_path.string());
  out << sidecar.str();
}

void write_synthetic_dataset(const std::vector<Session>& sessions, const SynthSpec& spec,
                             const fs::path& root_dir) {
  write_dataset(sessions, root_dir);

  nlohmann::json bands = nlohmann::json::object();
  for (int g = 0; g < kNumGames; ++g) {
    bands[to_string(static_cast<GameId>(g))] = {
        {"band", to_string(spec.signatures[static_cast<size_t>(g)].dominant_band)},
        {"amplitude", spec.signatures[static_cast<size_t>(g)].amplitude},
    };
  }
  const nlohmann::json j = {
      {"n_subjects", spec.n_subjects},
      {"duration_s", spec.duration_s},
      {"noise_sigma", spec.noise_sigma},
      {"sampling_rate_hz", spec.sampling_rate_hz},
      {"signatures", bands},
      {"seed", spec.seed},
  };
  std::ofstream out(root_dir / "synth_spec.json");
  if (!out) fail("io_error", "cannot write synth_spec.json");
  out << j.dump(2) << '\n';
}

uint64_t dataset_hash(const std::vector<Session>& sessions) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& s : sessions) {
    h = fnv1a64(s.meta.subject_id, h);
    h = fnv1a64(to_string(s.meta.game_id), h);
    for (const auto& chan : s.recording.channels) {
      for (double v : chan) {
        static_assert(sizeof(double) == 8);
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        char bytes[8];
        std::memcpy(bytes, &bits, sizeof(bytes));
        h = fnv1a64(std::string_view(bytes, 8), h);
      }
    }
    h = fnv1a64(format_g9(s.rating.boring), h);
    h = fnv1a64(format_g9(s.rating.horrible), h);
    h = fnv1a64(format_g9(s.rating.calm), h);
    h = fnv1a64(format_g9(s.rating.funny), h);
  }
  return h;
}

}  // namespace eegaffect
