#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcraft/config.hpp"
#include "maskcraft/data/sample.hpp"
#include "maskcraft/detector.hpp"
#include "maskcraft/training/losses.hpp"

namespace maskcraft::training {

struct StepRecord {
  std::int64_t step = 0;  // 1-based count of completed steps
  LossBundle losses;
  double learning_rate = 0.0;
  double wall_time = 0.0;  // seconds since the run started
};

nlohmann::json to_json(const StepRecord& r);

struct TrainOptions {
  std::int64_t total_steps = 1000;
  std::uint64_t seed = 0;
  /// Receives checkpoint.pt, metrics.ndjson and periodic step checkpoints.
  /// Empty: nothing is written.
  std::filesystem::path out_dir;
  /// Single-threaded kernels and deterministic algorithm selection.
  bool deterministic = false;
  /// Continue from this checkpoint instead of a fresh initialization.
  std::optional<std::filesystem::path> resume_from;
  std::function<void(const StepRecord&)> on_step;
};

struct TrainResult {
  Detector model{nullptr};
  std::vector<StepRecord> trace;
  std::filesystem::path checkpoint;
  std::filesystem::path metrics_log;
};

/// True when MASKPLUS_DETERMINISTIC=1 is set.
bool deterministic_from_env();

/// Thread count and algorithm selection for reproducible runs.
void configure_determinism(bool deterministic);

/// Learning rate after step decay.
double learning_rate_at(const TrainConfig& train, std::int64_t step);

/// Index of the sample used at `step`: epochs walk a seeded permutation of
/// the dataset.
std::size_t sample_index(std::uint64_t seed, std::int64_t step, std::size_t dataset_size);

/// Generator owned by one step, so a resumed run draws the same numbers.
Rng step_rng(std::uint64_t seed, std::int64_t step);

/// Mask-loss weight at `step` (1 when biased training is off).
double alpha_at(const TrainConfig& train, std::int64_t step, std::int64_t total_steps);

/// SGD with momentum and weight decay, one image per forward pass. Throws
/// TrainingError on a non-finite loss; the last written checkpoint is kept.
TrainResult train(const Config& config, const data::Dataset& dataset, const TrainOptions& options);

}  // namespace maskcraft::training
