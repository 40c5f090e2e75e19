#include "eegaffect/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "eegaffect/error.hpp"
#include "eegaffect/parallel.hpp"
#include "eegaffect/util.hpp"

namespace eegaffect {

namespace fs = std::filesystem;

FeaturizedDataset featurize_sessions(const std::vector<Session>& sessions,
                                     const SegmentConfig& seg_cfg, const BinningConfig& bin_cfg,
                                     double split_ratio, uint64_t seed) {
  if (sessions.empty()) fail("no_sessions", "dataset contains no sessions");
  bin_cfg.validate();
  const double fs_hz = sessions.front().recording.sampling_rate_hz;
  seg_cfg.validate(fs_hz);

  FeaturizedDataset out;
  out.sampling_rate_hz = fs_hz;
  out.window_samples = seg_cfg.window_samples(fs_hz);
  out.hop_samples = seg_cfg.hop_samples(fs_hz);
  out.n_bins = bin_cfg.n_bins;

  // featurize sessions independently, then flatten in session order
  std::vector<std::vector<WindowRow>> per_session(sessions.size());
  std::vector<std::exception_ptr> errors(sessions.size());
  parallel_for(static_cast<int64_t>(sessions.size()), [&](int64_t i) {
    try {
      const Session& s = sessions[static_cast<size_t>(i)];
      const LabelSet labels = encode_labels(s.rating, bin_cfg);
      const auto windows = segment(s.recording, seg_cfg);
      auto& rows = per_session[static_cast<size_t>(i)];
      rows.reserve(windows.size());
      for (const auto& w : windows) {
        const FeatureVector fv = extract_features(w, default_bands(), fs_hz);
        WindowRow row;
        row.subject_id = fv.subject_id;
        row.game_id = fv.game_id;
        row.window_index = fv.window_index;
        row.padded_samples = fv.padded_samples;
        row.features = fv.values;
        row.labels = labels;
        rows.push_back(std::move(row));
      }
    } catch (...) {
      errors[static_cast<size_t>(i)] = std::current_exception();
    }
  });
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  for (auto& rows : per_session) {
    out.rows.insert(out.rows.end(), std::make_move_iterator(rows.begin()),
                    std::make_move_iterator(rows.end()));
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const WindowRow& a, const WindowRow& b) {
    if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
    if (a.game_id != b.game_id) return static_cast<int>(a.game_id) < static_cast<int>(b.game_id);
    return a.window_index < b.window_index;
  });

  std::set<std::string> subjects;
  for (const auto& s : sessions) subjects.insert(s.meta.subject_id);
  out.split = subject_split(subjects, split_ratio, seed);

  std::vector<FeatureVector> train_features;
  for (const auto& row : out.rows) {
    if (!out.split.is_train(row.subject_id)) continue;
    FeatureVector fv;
    fv.values = row.features;
    train_features.push_back(std::move(fv));
  }
  if (train_features.empty()) fail("empty_training_set", "subject split left no training windows");
  out.stats = fit_normalization(train_features);
  return out;
}

void write_featurized(const FeaturizedDataset& data, const fs::path& dir) {
  fs::create_directories(dir);

  {
    std::ofstream out(dir / "features.csv");
    if (!out) fail("io_error", "cannot write features.csv in " + dir.string());
    out << "subject_id,game_id,window_index,padded_samples";
    for (const auto& name : feature_names()) out << ',' << name;
    out << '\n';
    for (const auto& row : data.rows) {
      out << row.subject_id << ',' << to_string(row.game_id) << ',' << row.window_index << ','
          << row.padded_samples;
      for (double v : row.features) out << ',' << format_g9(v);
      out << '\n';
    }
  }

  {
    std::ofstream out(dir / "labels.csv");
    if (!out) fail("io_error", "cannot write labels.csv in " + dir.string());
    out << "subject,game,window,binary,categorical,bin_boring,bin_horrible,bin_calm,bin_funny\n";
    for (const auto& row : data.rows) {
      out << row.subject_id << ',' << to_string(row.game_id) << ',' << row.window_index << ','
          << row.labels.binary_valence << ',' << to_string(row.labels.categorical);
      for (int b : row.labels.ordinal_bins) out << ',' << b;
      out << '\n';
    }
  }

  {
    nlohmann::json j = {
        {"sampling_rate_hz", data.sampling_rate_hz},
        {"window_samples", data.window_samples},
        {"hop_samples", data.hop_samples},
        {"n_bins", data.n_bins},
        {"split",
         {{"ratio", data.split.ratio},
          {"seed", data.split.seed},
          {"train_subjects", std::vector<std::string>(data.split.train_subjects.begin(),
                                                      data.split.train_subjects.end())},
          {"eval_subjects", std::vector<std::string>(data.split.eval_subjects.begin(),
                                                     data.split.eval_subjects.end())}}},
        {"mean", std::vector<double>(data.stats.mean.begin(), data.stats.mean.end())},
        {"std", std::vector<double>(data.stats.stddev.begin(), data.stats.stddev.end())},
    };
    std::ofstream out(dir / "norm_stats.json");
    if (!out) fail("io_error", "cannot write norm_stats.json in " + dir.string());
    out << j.dump(2) << '\n';
  }
}

FeaturizedDataset load_featurized(const fs::path& dir) {
  FeaturizedDataset data;

  {
    std::ifstream in(dir / "norm_stats.json");
    if (!in) fail("missing_features", "no norm_stats.json in " + dir.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) fail("malformed_json", "norm_stats.json is not valid JSON");
    data.sampling_rate_hz = j.at("sampling_rate_hz").get<double>();
    data.window_samples = j.at("window_samples").get<int>();
    data.hop_samples = j.at("hop_samples").get<int>();
    data.n_bins = j.at("n_bins").get<int>();
    data.split.ratio = j.at("split").at("ratio").get<double>();
    data.split.seed = j.at("split").at("seed").get<uint64_t>();
    for (const auto& s : j.at("split").at("train_subjects")) {
      data.split.train_subjects.insert(s.get<std::string>());
    }
    for (const auto& s : j.at("split").at("eval_subjects")) {
      data.split.eval_subjects.insert(s.get<std::string>());
    }
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto stddev = j.at("std").get<std::vector<double>>();
    if (mean.size() != kFeatureDim || stddev.size() != kFeatureDim) {
      fail("malformed_json", "norm_stats.json arrays must have length " +
                                 std::to_string(kFeatureDim));
    }
    std::copy(mean.begin(), mean.end(), data.stats.mean.begin());
    std::copy(stddev.begin(), stddev.end(), data.stats.stddev.begin());
  }

  std::map<std::pair<std::string, int>, LabelSet> labels;
  {
    std::ifstream in(dir / "labels.csv");
    if (!in) fail("missing_features", "no labels.csv in " + dir.string());
    std::string line;
    std::getline(in, line);
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto f = split_csv_row(line);
      if (f.size() != 9) {
        fail("malformed_csv", "labels.csv:" + std::to_string(lineno) + ": expected 9 fields");
      }
      LabelSet ls;
      int64_t window = 0, binary = 0;
      if (!try_parse_int64(f[2], window) || !try_parse_int64(f[3], binary)) {
        fail("malformed_csv", "labels.csv:" + std::to_string(lineno) + ": bad numeric field");
      }
      ls.binary_valence = static_cast<int>(binary);
      ls.categorical = emotion_from_string(f[4]);
      for (int g = 0; g < 4; ++g) {
        int64_t b = 0;
        if (!try_parse_int64(f[static_cast<size_t>(5 + g)], b)) {
          fail("malformed_csv", "labels.csv:" + std::to_string(lineno) + ": bad bin");
        }
        ls.ordinal_bins[static_cast<size_t>(g)] = static_cast<int>(b);
      }
      const std::string key = f[0] + "/" + f[1];
      labels[{key, static_cast<int>(window)}] = ls;
    }
  }

  {
    std::ifstream in(dir / "features.csv");
    if (!in) fail("missing_features", "no features.csv in " + dir.string());
    std::string line;
    std::getline(in, line);
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto f = split_csv_row(line);
      if (f.size() != 4 + kFeatureDim) {
        fail("malformed_csv", "features.csv:" + std::to_string(lineno) + ": expected " +
                                  std::to_string(4 + kFeatureDim) + " fields, got " +
                                  std::to_string(f.size()));
      }
      WindowRow row;
      row.subject_id = f[0];
      row.game_id = game_from_string(f[1]);
      int64_t window = 0, padded = 0;
      if (!try_parse_int64(f[2], window) || !try_parse_int64(f[3], padded)) {
        fail("malformed_csv", "features.csv:" + std::to_string(lineno) + ": bad numeric field");
      }
      row.window_index = static_cast<int>(window);
      row.padded_samples = static_cast<int>(padded);
      for (int i = 0; i < kFeatureDim; ++i) {
        if (!try_parse_double(f[static_cast<size_t>(4 + i)], row.features[static_cast<size_t>(i)])) {
          fail("malformed_csv", "features.csv:" + std::to_string(lineno) + ": bad feature value");
        }
      }
      const auto it = labels.find({row.subject_id + "/" + f[1], row.window_index});
      if (it == labels.end()) {
        fail("missing_features", "features.csv row has no matching labels.csv row (line " +
                                     std::to_string(lineno) + ")");
      }
      row.labels = it->second;
      data.rows.push_back(std::move(row));
    }
  }
  if (data.rows.empty()) fail("no_sessions", "features.csv holds no rows");
  return data;
}

SplitSide split_side_from_string(const std::string& s) {
  if (s == "train") return SplitSide::kTrain;
  if (s == "eval") return SplitSide::kEval;
  if (s == "all") return SplitSide::kAll;
  fail("usage", "unknown split side: " + s + " (expected train, eval or all)");
}

const char* to_string(SplitSide side) {
  switch (side) {
    case SplitSide::kTrain: return "train";
    case SplitSide::kEval: return "eval";
    case SplitSide::kAll: return "all";
  }
  fail("usage", "invalid split side value");
}

namespace {

bool side_keeps(const FeaturizedDataset& data, const std::string& subject, SplitSide side) {
  if (side == SplitSide::kAll) return true;
  return data.split.is_train(subject) == (side == SplitSide::kTrain);
}

}  // namespace

SequenceDataset assemble_sequences(const FeaturizedDataset& data, int seq_len, SplitSide side) {
  if (seq_len < 1) fail("bad_model_config", "seq_len must be >= 1");
  SequenceDataset out;
  size_t i = 0;
  while (i < data.rows.size()) {
    // collect one session (rows are sorted, windows contiguous)
    size_t j = i;
    while (j < data.rows.size() && data.rows[j].subject_id == data.rows[i].subject_id &&
           data.rows[j].game_id == data.rows[i].game_id) {
      ++j;
    }
    if (side_keeps(data, data.rows[i].subject_id, side)) {
      for (size_t start = i; start + static_cast<size_t>(seq_len) <= j;
           start += static_cast<size_t>(seq_len)) {
        SequenceSample sample;
        sample.subject_id = data.rows[start].subject_id;
        sample.game_id = data.rows[start].game_id;
        sample.labels = data.rows[start].labels;
        sample.steps.reserve(static_cast<size_t>(seq_len));
        for (int s = 0; s < seq_len; ++s) {
          FeatureVector fv;
          fv.values = data.rows[start + static_cast<size_t>(s)].features;
          sample.steps.push_back(apply_normalization(fv, data.stats).values);
        }
        out.push_back(std::move(sample));
      }
    }
    i = j;
  }
  return out;
}

FlatDataset flat_windows(const FeaturizedDataset& data, SplitSide side) {
  FlatDataset out;
  for (const auto& row : data.rows) {
    if (!side_keeps(data, row.subject_id, side)) continue;
    FeatureVector fv;
    fv.values = row.features;
    out.x.push_back(apply_normalization(fv, data.stats).values);
    out.labels.push_back(row.labels);
  }
  return out;
}

}  // namespace eegaffect
