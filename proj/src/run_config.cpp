#include "eegaffect/run_config.hpp"

#include <fstream>
#include <set>

#include "eegaffect/error.hpp"
#include "eegaffect/util.hpp"

namespace eegaffect {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail("config_error", where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail("config_error", "unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("config_error", std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (precision != "f32" && precision != "f64") {
    fail("config_error", "precision must be \"f32\" or \"f64\"");
  }
  if (seq_len < 1) fail("config_error", "seq_len must be >= 1");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) fail("config_error", "split_ratio must be in (0, 1)");
  if (!(sampling_rate_hz > 0.0)) fail("config_error", "sampling_rate_hz must be positive");
  segmentation.validate(sampling_rate_hz);
  binning.validate();
  sequence.validate();
  train.validate();
  forest.validate();
  linear.validate();
  synth.validate();
}

RunConfig default_run_config() { return RunConfig{}; }

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  require_keys(j, "", {"seed", "sampling_rate_hz", "precision", "seq_len", "split_ratio",
                       "segmentation", "binning", "sequence", "train", "forest", "linear",
                       "synth"});
  read_field(j, "seed", cfg.seed);
  read_field(j, "sampling_rate_hz", cfg.sampling_rate_hz);
  read_field(j, "precision", cfg.precision);
  read_field(j, "seq_len", cfg.seq_len);
  read_field(j, "split_ratio", cfg.split_ratio);

  if (j.contains("segmentation")) {
    const auto& s = j.at("segmentation");
    require_keys(s, "segmentation.", {"window_ms", "overlap_fraction"});
    read_field(s, "window_ms", cfg.segmentation.window_ms);
    read_field(s, "overlap_fraction", cfg.segmentation.overlap_fraction);
  }
  if (j.contains("binning")) {
    const auto& b = j.at("binning");
    require_keys(b, "binning.", {"n_bins"});
    read_field(b, "n_bins", cfg.binning.n_bins);
  }
  if (j.contains("sequence")) {
    const auto& s = j.at("sequence");
    require_keys(s, "sequence.",
                 {"architecture", "input_dim", "hidden1", "hidden2", "conv", "dropout_p"});
    if (s.contains("architecture")) {
      cfg.sequence.architecture = architecture_from_string(s.at("architecture").get<std::string>());
    }
    read_field(s, "input_dim", cfg.sequence.input_dim);
    read_field(s, "hidden1", cfg.sequence.hidden1);
    read_field(s, "hidden2", cfg.sequence.hidden2);
    read_field(s, "dropout_p", cfg.sequence.dropout_p);
    if (s.contains("conv")) {
      const auto& c = s.at("conv");
      require_keys(c, "sequence.conv.", {"kernel", "filters", "stride"});
      read_field(c, "kernel", cfg.sequence.conv.kernel);
      read_field(c, "filters", cfg.sequence.conv.filters);
      read_field(c, "stride", cfg.sequence.conv.stride);
    }
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    require_keys(t, "train.",
                 {"lr", "epochs", "batch_size", "weight_decay", "clip_norm", "dropout_p",
                  "warmup_epochs", "eta_min", "beta1", "beta2", "eps"});
    read_field(t, "lr", cfg.train.lr);
    read_field(t, "epochs", cfg.train.epochs);
    read_field(t, "batch_size", cfg.train.batch_size);
    read_field(t, "weight_decay", cfg.train.weight_decay);
    read_field(t, "clip_norm", cfg.train.clip_norm);
    read_field(t, "dropout_p", cfg.train.dropout_p);
    read_field(t, "warmup_epochs", cfg.train.warmup_epochs);
    read_field(t, "eta_min", cfg.train.eta_min);
    read_field(t, "beta1", cfg.train.beta1);
    read_field(t, "beta2", cfg.train.beta2);
    read_field(t, "eps", cfg.train.eps);
  }
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    require_keys(f, "forest.",
                 {"n_trees", "max_depth", "min_leaf", "features_per_split", "bootstrap"});
    read_field(f, "n_trees", cfg.forest.n_trees);
    read_field(f, "max_depth", cfg.forest.max_depth);
    read_field(f, "min_leaf", cfg.forest.min_leaf);
    read_field(f, "features_per_split", cfg.forest.features_per_split);
    read_field(f, "bootstrap", cfg.forest.bootstrap);
  }
  if (j.contains("linear")) {
    const auto& l = j.at("linear");
    require_keys(l, "linear.", {"l2", "epochs", "lr"});
    read_field(l, "l2", cfg.linear.l2);
    read_field(l, "epochs", cfg.linear.epochs);
    read_field(l, "lr", cfg.linear.lr);
  }
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    require_keys(s, "synth.",
                 {"n_subjects", "duration_s", "noise_sigma", "sampling_rate_hz", "signatures"});
    read_field(s, "n_subjects", cfg.synth.n_subjects);
    read_field(s, "duration_s", cfg.synth.duration_s);
    read_field(s, "noise_sigma", cfg.synth.noise_sigma);
    read_field(s, "sampling_rate_hz", cfg.synth.sampling_rate_hz);
    if (s.contains("signatures")) {
      const auto& sig = s.at("signatures");
      require_keys(sig, "synth.signatures.", {"G1", "G2", "G3", "G4"});
      for (int g = 0; g < kNumGames; ++g) {
        const char* game = to_string(static_cast<GameId>(g));
        if (!sig.contains(game)) continue;
        const auto& entry = sig.at(game);
        require_keys(entry, std::string("synth.signatures.") + game + ".", {"band", "amplitude"});
        auto& target = cfg.synth.signatures[static_cast<size_t>(g)];
        if (entry.contains("band")) {
          target.dominant_band = band_from_string(entry.at("band").get<std::string>());
        }
        read_field(entry, "amplitude", target.amplitude);
      }
    }
  }

  // shared knobs propagate to the stages that use them
  cfg.sequence.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  cfg.forest.seed = cfg.seed;
  cfg.linear.seed = cfg.seed;
  cfg.synth.seed = cfg.seed;
  cfg.train.dropout_p = cfg.sequence.dropout_p;
  if (!j.contains("synth") || !j.at("synth").contains("sampling_rate_hz")) {
    cfg.synth.sampling_rate_hz = cfg.sampling_rate_hz;
  }

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("config_error", "cannot open config file: " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail("config_error", path.string() + " is not valid JSON");
  return run_config_from_json(j);
}

json run_config_to_json(const RunConfig& cfg) {
  json signatures = json::object();
  for (int g = 0; g < kNumGames; ++g) {
    const auto& sig = cfg.synth.signatures[static_cast<size_t>(g)];
    signatures[to_string(static_cast<GameId>(g))] = {
        {"band", to_string(sig.dominant_band)},
        {"amplitude", sig.amplitude},
    };
  }
  return json{
      {"seed", cfg.seed},
      {"sampling_rate_hz", cfg.sampling_rate_hz},
      {"precision", cfg.precision},
      {"seq_len", cfg.seq_len},
      {"split_ratio", cfg.split_ratio},
      {"segmentation",
       {{"window_ms", cfg.segmentation.window_ms},
        {"overlap_fraction", cfg.segmentation.overlap_fraction}}},
      {"binning", {{"n_bins", cfg.binning.n_bins}}},
      {"sequence",
       {{"architecture", to_string(cfg.sequence.architecture)},
        {"input_dim", cfg.sequence.input_dim},
        {"hidden1", cfg.sequence.hidden1},
        {"hidden2", cfg.sequence.hidden2},
        {"conv",
         {{"kernel", cfg.sequence.conv.kernel},
          {"filters", cfg.sequence.conv.filters},
          {"stride", cfg.sequence.conv.stride}}},
        {"dropout_p", cfg.sequence.dropout_p}}},
      {"train",
       {{"lr", cfg.train.lr},
        {"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"weight_decay", cfg.train.weight_decay},
        {"clip_norm", cfg.train.clip_norm},
        {"dropout_p", cfg.train.dropout_p},
        {"warmup_epochs", cfg.train.warmup_epochs},
        {"eta_min", cfg.train.eta_min},
        {"beta1", cfg.train.beta1},
        {"beta2", cfg.train.beta2},
        {"eps", cfg.train.eps}}},
      {"forest",
       {{"n_trees", cfg.forest.n_trees},
        {"max_depth", cfg.forest.max_depth},
        {"min_leaf", cfg.forest.min_leaf},
        {"features_per_split", cfg.forest.features_per_split},
        {"bootstrap", cfg.forest.bootstrap}}},
      {"linear", {{"l2", cfg.linear.l2}, {"epochs", cfg.linear.epochs}, {"lr", cfg.linear.lr}}},
      {"synth",
       {{"n_subjects", cfg.synth.n_subjects},
        {"duration_s", cfg.synth.duration_s},
        {"noise_sigma", cfg.synth.noise_sigma},
        {"sampling_rate_hz", cfg.synth.sampling_rate_hz},
        {"signatures", signatures}}},
  };
}

std::string run_id(const json& resolved) {
  const uint64_t h = fnv1a64(resolved.dump());
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace eegaffect
