#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcraft/config.hpp"
#include "maskcraft/data/sample.hpp"
#include "maskcraft/eval/coco_eval.hpp"

namespace maskcraft::cli {

namespace fs = std::filesystem;

/// Hash of the annotations and quantized pixels of a dataset.
std::string dataset_digest(const data::Dataset& dataset);

/// Config file, or the desk-scale defaults when `path` is empty.
Config resolve_config(const std::optional<fs::path>& path);

struct SynthArgs {
  std::uint64_t seed = 0;
  int count = 100;
  int size = 64;
  int max_instances = 4;
  fs::path out;
  bool force = false;
  bool json = false;
};

/// Writes a synthetic dataset and prints its digest. Refuses a non-empty
/// `out` unless `force`.
std::string cmd_synth(const SynthArgs& args, std::ostream& out);

struct TrainArgs {
  std::optional<fs::path> config;
  fs::path dataset;
  fs::path out;
  std::int64_t steps = 1000;
  std::uint64_t seed = 0;
  bool force = false;
  bool resume = false;
  bool json = false;
  bool deterministic = false;
};

/// Trains and writes config.json, checkpoint.pt, metrics.ndjson and run.json
/// into `out`. Returns the run record.
nlohmann::json cmd_train(const TrainArgs& args, std::ostream& out);

struct EvalArgs {
  fs::path checkpoint;
  fs::path dataset;
  /// When given, the checkpoint must have been trained with this architecture.
  std::optional<fs::path> config;
  /// Writes predictions.json and report.json here.
  std::optional<fs::path> out;
  int limit = 0;  // evaluate only the first `limit` images when > 0
  bool json = false;
};

std::map<eval::Task, eval::APReport> cmd_eval(const EvalArgs& args, std::ostream& out);

/// One ablation variant: a name and key-path overrides of the base config.
struct Variant {
  std::string name;
  nlohmann::json overrides = nlohmann::json::object();
};

struct AblationSpec {
  fs::path base_config;  // empty: desk-scale defaults
  std::vector<Variant> variants;
  std::vector<std::uint64_t> seeds;
  fs::path output_dir;
  fs::path train_dataset;
  fs::path val_dataset;
  std::int64_t steps = 3000;
};

/// Reads a spec file. Relative paths are resolved against its directory.
/// Throws ArgumentError on duplicate variant names or an empty seed list.
AblationSpec load_ablation_spec(const fs::path& path);
AblationSpec parse_ablation_spec(const nlohmann::json& j, const fs::path& base_dir);

/// Base config with the variant's overrides applied.
Config variant_config(const AblationSpec& spec, const Variant& variant);

fs::path run_dir(const AblationSpec& spec, const std::string& variant, std::uint64_t seed);

struct AblateArgs {
  fs::path spec;
  bool resume = false;
  int jobs = 1;
  bool json = false;
  bool deterministic = false;
  /// Restricts the grid to one "variant/seed" pair; used by worker processes.
  std::optional<std::string> only;
  /// Executable used to launch worker processes when jobs > 1.
  fs::path self_exe;
};

/// Runs every (variant, seed), writes a RunRecord per run and prints the
/// summary table. Returns all records; throws TrainingError when every run
/// failed.
std::vector<nlohmann::json> cmd_ablate(const AblateArgs& args, std::ostream& out);

/// Mean [min,max] over seeds, one row per variant, segm and bbox blocks.
std::string format_ablation_table(const std::vector<std::string>& variant_order,
                                  const std::vector<nlohmann::json>& records);

struct RenderArgs {
  fs::path checkpoint;
  fs::path dataset;
  fs::path out;
  int limit = 8;
  bool force = false;
};

/// Writes one overlay image per dataset image, for the first `limit` images.
/// Returns the written paths.
std::vector<fs::path> cmd_render(const RenderArgs& args, std::ostream& out);

}  // namespace maskcraft::cli
