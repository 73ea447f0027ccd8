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


#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dmc/errors.hpp"
#include "dmc/eval.hpp"
#include "dmc/grad.hpp"
#include "dmc/io.hpp"
#include "dmc/random.hpp"
#include "dmc/run_config.hpp"
#include "dmc/synth.hpp"
#include "dmc/train.hpp"

namespace dmc::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::string out;
};

RunConfig resolve(const CommonFlags& flags) {
  RunConfig cfg = flags.config.empty() ? RunConfig::defaults() : load_run_config(flags.config);
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.train.seed = *flags.seed;
  }
  if (flags.threshold) cfg.threshold = *flags.threshold;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const std::string& dir) {
  const fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw IoError("cannot create output directory " + dir);
  return path;
}

std::ofstream open_text(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

int cmd_synth(const CommonFlags& flags, std::ostream& out) {
  RunConfig cfg = resolve(flags);
  const fs::path dir = prepare_out(flags.out);
  const auto scenes = synth::generate_dataset(cfg.scene_count, cfg.seed, cfg.generator);
  io::write_dataset(dir, scenes);
  fmt::print(out, "wrote {} scenes to {}\n", scenes.size(), dir.string());
  return kOk;
}

int cmd_train(const CommonFlags& flags, const std::string& dataset_dir, std::ostream& out) {
  RunConfig cfg = resolve(flags);
  const auto scenes = io::read_dataset(dataset_dir);
  if (scenes.size() < 2) throw ConfigError("training needs a dataset of at least 2 scenes");
  const fs::path dir = prepare_out(flags.out);

  const std::size_t report_every = std::max<std::size_t>(1, cfg.train.iterations / 10);
  auto progress = [&](const TrainLogEntry& e) {
    if ((e.iteration + 1) % report_every == 0) {
      fmt::print(out, "iter {:>6}  loss {:.6f}  pos {:.4f}  neg {:.4f}\n", e.iteration + 1, e.loss,
                 e.positive_score_mean, e.negative_score_mean);
    }
  };
  const TrainResult result =
      train::train(scenes, Model::init(cfg.model, cfg.seed), cfg.train, progress);

  io::save_model(dir / "model.bin", result.model);
  std::ofstream log = open_text(dir / "train_log.csv");
  train::write_log_csv(log, result.log);
  if (!log) throw IoError("failed writing train_log.csv");
  fmt::print(out, "model written to {}\n", (dir / "model.bin").string());
  return kOk;
}

int cmd_eval(const CommonFlags& flags, const std::string& model_path,
             const std::string& dataset_dir, bool oracle, std::ostream& out) {
  RunConfig cfg = resolve(flags);
  const Model model = io::load_model(model_path);
  const auto scenes = io::read_dataset(dataset_dir);
  const fs::path dir = prepare_out(flags.out);

  eval::EvalOptions options;
  options.threshold = cfg.threshold;
  options.auc_step = cfg.auc_step;
  options.seed = cfg.seed;
  options.oracle = oracle;
  const eval::EvalSummary summary = eval::evaluate(model, scenes, options);

  std::ofstream csv = open_text(dir / "metrics.csv");
  eval::write_metrics_csv(csv, summary);
  if (!csv) throw IoError("failed writing metrics.csv");
  fmt::print(out,
             "scenes {}  ciou@0.5 {:.4f}  ciou@0.7 {:.4f}  auc {:.4f}  match_accuracy {:.4f}  "
             "iou {:.4f}  unrelated_iou {:.4f}\n",
             summary.scenes.size(), summary.ciou_0_5, summary.ciou_0_7, summary.auc,
             summary.match_accuracy, summary.mean_iou, summary.mean_unrelated_iou);
  return kOk;
}

int cmd_localize(const CommonFlags& flags, const std::string& model_path,
                 const std::string& scene_path, std::ostream& out) {
  RunConfig cfg = resolve(flags);
  const Model model = io::load_model(model_path);
  const ScenePair scene = io::load_scene(scene_path);
  const fs::path dir = prepare_out(flags.out);

  const FeatureSet visual = encoder::encode(scene.visual, model.visual);
  const FeatureSet audio = encoder::encode(scene.audio, model.audio);
  LocalizationReport report =
      eval::localize(audio, visual, model.bank, model.config.cluster, cfg.threshold);

  std::vector<double> mask_values(report.mask.begin(), report.mask.end());
  io::save_pgm(dir / "heatmap.pgm", report.heatmap.grid, report.heatmap.values);
  io::save_pgm(dir / "mask.pgm", report.heatmap.grid, mask_values);

  const Mask truth = scene.sounding_visual_mask();
  if (std::any_of(truth.begin(), truth.end(), [](std::uint8_t v) { return v != 0; })) {
    eval::score_localization(report, truth, cfg.auc_step);
    fmt::print(out, "cluster {}  iou {:.4f}\n", report.chosen_cluster, report.iou);
  } else {
    fmt::print(out, "cluster {}  (scene has no sounding component)\n", report.chosen_cluster);
  }
  return kOk;
}

int cmd_gradcheck(const CommonFlags& flags, double corrupt, std::ostream& out,
                  std::ostream& err) {
  RunConfig cfg = resolve(flags);
  const std::uint64_t seed = cfg.seed;

  for (std::size_t attempt = 0; attempt < cfg.gradcheck_attempts; ++attempt) {
    const auto scenes = synth::generate_dataset(
        std::max<std::size_t>(cfg.gradcheck_batch + 1, 2), mix_seed(seed, 100 + attempt),
        cfg.generator);
    const Model model = Model::init(cfg.model, mix_seed(seed, 200 + attempt));
    std::vector<std::size_t> indices(cfg.gradcheck_batch);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    const MatchBatch batch = synth::make_batch(scenes, indices, mix_seed(seed, 300 + attempt));

    grad::GradCheckOptions options;
    options.step = cfg.gradcheck_step;
    options.coords_per_block = cfg.gradcheck_coords;
    options.seed = mix_seed(seed, 400 + attempt);
    options.kink_guard = cfg.gradcheck_kink_guard;
    options.corrupt_analytic = corrupt;
    try {
      const grad::GradCheckReport report = grad::grad_check(model, batch, cfg.train.loss, options);
      for (const grad::BlockError& b : report.blocks) {
        fmt::print(out, "{:<20} coords {:>4}  max rel error {:.3e}\n", b.name, b.coordinates,
                   b.rel_error);
      }
      const bool ok = report.max_rel_error < cfg.gradcheck_tolerance;
      fmt::print(out, "max rel error {:.3e} (h = {:g}, tolerance {:g}): {}\n",
                 report.max_rel_error, report.step, cfg.gradcheck_tolerance,
                 ok ? "PASS" : "FAIL");
      return ok ? kOk : kCheckFailed;
    } catch (const ResampleRequired& e) {
      fmt::print(err, "attempt {}: {}; resampling\n", attempt + 1, e.what());
    }
  }
  fmt::print(err, "gradcheck: no kink-free sample after {} attempts\n", cfg.gradcheck_attempts);
  return kRetryExhausted;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_out, bool with_threshold) {
  cmd->add_option("--config", flags.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "overrides the config seed");
  if (needs_out) cmd->add_option("--out", flags.out, "output directory")->required();
  if (with_threshold) {
    cmd->add_option("--threshold", flags.threshold, "heatmap binarization threshold");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep multimodal clustering toolkit", "dmc"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string dataset_dir, model_path, scene_path;
  bool oracle = false;
  double corrupt = 0.0;

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene dataset");
  add_common(synth_cmd, flags, true, false);

  auto* train_cmd = app.add_subcommand("train", "train a model on a dataset");
  add_common(train_cmd, flags, true, false);
  train_cmd->add_option("dataset", dataset_dir, "dataset directory")->required();

  auto* eval_cmd = app.add_subcommand("eval", "score a model on a dataset");
  add_common(eval_cmd, flags, true, true);
  eval_cmd->add_option("model", model_path, "model file")->required();
  eval_cmd->add_option("dataset", dataset_dir, "dataset directory")->required();
  eval_cmd->add_flag("--oracle", oracle, "use ground-truth masks as predictions");

  auto* loc_cmd = app.add_subcommand("localize", "write heatmap and mask PGMs for one scene");
  add_common(loc_cmd, flags, true, true);
  loc_cmd->add_option("model", model_path, "model file")->required();
  loc_cmd->add_option("scene", scene_path, "scene file")->required();

  auto* gc_cmd = app.add_subcommand("gradcheck", "compare analytic and numeric gradients");
  add_common(gc_cmd, flags, false, false);
  gc_cmd->add_option("--corrupt", corrupt, "")->group("");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*synth_cmd) return cmd_synth(flags, out);
    if (*train_cmd) return cmd_train(flags, dataset_dir, out);
    if (*eval_cmd) return cmd_eval(flags, model_path, dataset_dir, oracle, out);
    if (*loc_cmd) return cmd_localize(flags, model_path, scene_path, out);
    if (*gc_cmd) return cmd_gradcheck(flags, corrupt, out, err);
  } catch (const TrainingDiverged& e) {
    fmt::print(err, "error: training diverged at iteration {}: {}\n", e.iteration(), e.what());
    return kNumericalError;
  } catch (const DegenerateVectorError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kNumericalError;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace dmc::cli
