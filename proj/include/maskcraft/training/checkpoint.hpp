#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <torch/torch.h>

#include "maskcraft/config.hpp"
#include "maskcraft/detector.hpp"

namespace maskcraft::training {

/// Optimization progress recorded alongside the weights.
struct TrainState {
  std::int64_t step = 0;
  std::int64_t total_steps = 0;
  std::uint64_t seed = 0;
  BiasedTrainingConfig alpha;
};

/// Contents of a checkpoint archive.
struct Checkpoint {
  Config config;
  TrainState state;
  std::string model_hash;
  std::string head_hash;
  std::map<std::string, torch::Tensor> tensors;   // parameters and buffers by name
  std::map<std::string, torch::Tensor> momentum;  // SGD momentum buffers by parameter name
};

/// Writes parameters, buffers, optimizer momentum (if given) and a manifest
/// into one archive. The file is replaced atomically.
void save_checkpoint(const std::filesystem::path& path, const Config& config, const TrainState& state,
                     const torch::nn::Module& model, const torch::optim::SGD* optimizer = nullptr);

/// Reads an archive. Throws CheckpointError on a missing or malformed file or
/// when the stored hashes disagree with the stored configuration.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies the stored tensors into `model`. Every parameter and buffer must be
/// present with the same shape.
void restore_parameters(const Checkpoint& ckpt, torch::nn::Module& model);

/// Restores momentum buffers into an optimizer built over `model`.
void restore_optimizer(const Checkpoint& ckpt, const torch::nn::Module& model, torch::optim::SGD& optimizer);

/// Builds the detector described by the checkpoint and loads its weights.
/// When `expected` is given its architecture must match the manifest.
Detector load_model(const Checkpoint& ckpt, const ModelConfig* expected = nullptr);

}  // namespace maskcraft::training
