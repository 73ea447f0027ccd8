// Copyright 2026 The DMC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "dmc/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dmc/errors.hpp"

namespace dmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("invalid value '{}' for key '{}'", text, key));
  }
  return value;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Access>
Field field(std::string key, Access access) {
  Field f;
  f.key = key;
  f.set = [key, access](RunConfig& c, const std::string& v) { access(c) = parse_number<T>(key, v); };
  f.get = [access](const RunConfig& c) {
    return fmt::format("{}", access(const_cast<RunConfig&>(c)));
  };
  return f;
}

#define DMC_FIELD(type, key, expr) \
  field<type>(key, [](RunConfig& c) -> type& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t{
        DMC_FIELD(std::size_t, "visual_height", c.generator.visual_height),
        DMC_FIELD(std::size_t, "visual_width", c.generator.visual_width),
        DMC_FIELD(std::size_t, "visual_channels", c.generator.visual_channels),
        DMC_FIELD(std::size_t, "visual_patch", c.generator.visual_patch),
        DMC_FIELD(std::size_t, "audio_frames", c.generator.audio_frames),
        DMC_FIELD(std::size_t, "audio_bins", c.generator.audio_bins),
        DMC_FIELD(std::size_t, "audio_patch", c.generator.audio_patch),
        DMC_FIELD(std::size_t, "latent_dim", c.generator.latent_dim),
        DMC_FIELD(double, "latent_max_cosine", c.generator.latent_max_cosine),
        DMC_FIELD(std::size_t, "min_components", c.generator.min_components),
        DMC_FIELD(std::size_t, "max_components", c.generator.max_components),
        DMC_FIELD(int, "visual_radius_min", c.generator.visual_radius_min),
        DMC_FIELD(int, "visual_radius_max", c.generator.visual_radius_max),
        DMC_FIELD(int, "audio_span_min", c.generator.audio_span_min),
        DMC_FIELD(int, "audio_span_max", c.generator.audio_span_max),
        DMC_FIELD(int, "audio_width_min", c.generator.audio_width_min),
        DMC_FIELD(int, "audio_width_max", c.generator.audio_width_max),
        DMC_FIELD(double, "amplitude_min", c.generator.amplitude_min),
        DMC_FIELD(double, "amplitude_max", c.generator.amplitude_max),
        DMC_FIELD(double, "noise", c.generator.noise),
        DMC_FIELD(double, "distractor_prob", c.generator.distractor_prob),
        DMC_FIELD(std::uint64_t, "world_seed", c.generator.world_seed),
        DMC_FIELD(std::size_t, "scene_count", c.scene_count),
        DMC_FIELD(std::size_t, "feature_dim", c.model.feature_dim),
        DMC_FIELD(std::size_t, "center_dim", c.model.center_dim),
        DMC_FIELD(std::size_t, "k", c.model.cluster.k),
        DMC_FIELD(std::size_t, "cluster_iterations", c.model.cluster.iterations),
        DMC_FIELD(double, "z", c.model.cluster.z),
        DMC_FIELD(double, "projection_gain", c.model.projection_gain),
        DMC_FIELD(double, "margin", c.train.loss.margin),
        DMC_FIELD(double, "learning_rate", c.train.adam.learning_rate),
        DMC_FIELD(double, "beta1", c.train.adam.beta1),
        DMC_FIELD(double, "beta2", c.train.adam.beta2),
        DMC_FIELD(double, "epsilon", c.train.adam.epsilon),
        DMC_FIELD(std::size_t, "batch_size", c.train.batch_size),
        DMC_FIELD(std::size_t, "train_iterations", c.train.iterations),
        DMC_FIELD(std::uint64_t, "seed", c.seed),
        DMC_FIELD(double, "threshold", c.threshold),
        DMC_FIELD(double, "auc_step", c.auc_step),
        DMC_FIELD(double, "gradcheck_step", c.gradcheck_step),
        DMC_FIELD(std::size_t, "gradcheck_coords", c.gradcheck_coords),
        DMC_FIELD(std::size_t, "gradcheck_batch", c.gradcheck_batch),
        DMC_FIELD(std::size_t, "gradcheck_attempts", c.gradcheck_attempts),
        DMC_FIELD(double, "gradcheck_tolerance", c.gradcheck_tolerance),
        DMC_FIELD(double, "gradcheck_kink_guard", c.gradcheck_kink_guard),
    };
    Field pairing;
    pairing.key = "pairing";
    pairing.set = [](RunConfig& c, const std::string& v) {
      if (v == "same_index") {
        c.train.loss.pairing = PairingRule::kSameIndex;
      } else if (v == "all_pairs") {
        c.train.loss.pairing = PairingRule::kAllPairs;
      } else {
        throw ConfigError("invalid value '" + v + "' for key 'pairing' (same_index|all_pairs)");
      }
    };
    pairing.get = [](const RunConfig& c) {
      return std::string(c.train.loss.pairing == PairingRule::kSameIndex ? "same_index"
                                                                          : "all_pairs");
    };
    t.push_back(std::move(pairing));
    return t;
  }();
  return table;
}

#undef DMC_FIELD

}  // namespace

RunConfig RunConfig::defaults() { return RunConfig{}; }

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key);
  return out;
}

void RunConfig::validate() const {
  generator.validate();
  model.validate();
  train.validate();
  if (model.visual_patch != generator.visual_patch || model.audio_patch != generator.audio_patch ||
      model.visual_channels != generator.visual_channels) {
    throw ConfigError("model patch layout does not match the generator");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  if (!(auc_step > 0.0 && auc_step <= 1.0)) throw ConfigError("auc_step must lie in (0, 1]");
  if (!(gradcheck_step > 0.0) || gradcheck_coords == 0 || gradcheck_batch == 0 ||
      gradcheck_attempts == 0 || !(gradcheck_tolerance > 0.0) || !(gradcheck_kink_guard >= 0.0)) {
    throw ConfigError("gradcheck settings must be positive");
  }
}

RunConfig parse_run_config(std::istream& is) {
  RunConfig config = RunConfig::defaults();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", lineno));
    }
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.train.seed = config.seed;
  // Patch layout is shared by the generator and the encoders.
  config.model.visual_patch = config.generator.visual_patch;
  config.model.audio_patch = config.generator.audio_patch;
  config.model.visual_channels = config.generator.visual_channels;
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path.string());
  return parse_run_config(is);
}

void write_run_config(std::ostream& os, const RunConfig& config) {
  for (const Field& f : fields()) fmt::print(os, "{} = {}\n", f.key, f.get(config));
}

}  // namespace dmc
