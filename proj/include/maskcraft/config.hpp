#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcraft/heads/head_config.hpp"

namespace maskcraft {

enum class ProposalMode { kGtBoxes, kLearned };
enum class Activation { kRelu, kIdentity };

struct BackboneConfig {
  int stem_channels = 16;
  std::vector<int> stage_channels{16, 32, 64, 128};
  int pyramid_channels = 64;

  friend bool operator==(const BackboneConfig&, const BackboneConfig&) = default;
};

struct ProposalConfig {
  ProposalMode mode = ProposalMode::kGtBoxes;
  /// Edge jitter in gt_boxes mode, as a fraction of the box side.
  double jitter = 0.0;
  int top_k = 100;
  int pre_nms_top_k = 1000;
  double nms_threshold = 0.7;
  /// Anchor side at level l is anchor_scale * stride(l).
  double anchor_scale = 4.0;
  int train_anchors = 128;

  friend bool operator==(const ProposalConfig&, const ProposalConfig&) = default;
};

struct RoiConfig {
  int det_size = 7;
  int mask_size = 14;
  int sampling_ratio = 2;
  bool aligned = true;
  double canonical_scale = 56.0;
  int canonical_level = 1;

  friend bool operator==(const RoiConfig&, const RoiConfig&) = default;
};

struct DetectionHeadConfig {
  int fc_dim = 256;

  friend bool operator==(const DetectionHeadConfig&, const DetectionHeadConfig&) = default;
};

struct MaskHeadConfig {
  int channels = 64;
  int num_convs = 4;
  Activation activation = Activation::kRelu;

  friend bool operator==(const MaskHeadConfig&, const MaskHeadConfig&) = default;
};

/// Everything that determines the parameter layout and forward function.
struct ModelConfig {
  int num_classes = 3;
  BackboneConfig backbone;
  ProposalConfig proposals;
  RoiConfig roi;
  DetectionHeadConfig det_head;
  MaskHeadConfig mask_head;
  heads::HeadConfig heads;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct BiasedTrainingConfig {
  bool enabled = false;
  double alpha_early = 1.5;
  double switch_fraction = 0.5;

  friend bool operator==(const BiasedTrainingConfig&, const BiasedTrainingConfig&) = default;
};

struct TrainConfig {
  double learning_rate = 0.02;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<int> lr_decay_steps;
  double lr_decay_gamma = 0.1;
  int rois_per_image = 512;
  double pos_fraction = 0.25;
  double fg_iou_threshold = 0.5;
  /// Random boxes appended to the proposals so the classifier sees background.
  int random_negatives = 16;
  int grad_accumulation = 1;
  double grad_clip_norm = 10.0;
  int checkpoint_every = 0;
  BiasedTrainingConfig biased_training;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EvalConfig {
  double score_threshold = 0.05;
  double nms_threshold = 0.5;
  int max_detections = 100;
  double mask_threshold = 0.5;
  /// Size-bucket boundaries (areas). 12^2 and 24^2 suit 64x64 synthetic data;
  /// COCO uses 32^2 and 96^2.
  double area_small = 144.0;
  double area_large = 576.0;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct Config {
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Desk-scale defaults (the default-constructed Config).
Config desk_scale_config();

/// Full-size settings: 256-wide pyramid and mask head, 1024-wide FC head,
/// fusion filters 512-256-256, COCO area buckets.
Config paper_scale_config();

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const EvalConfig& c);
nlohmann::json to_json(const Config& c);
nlohmann::json to_json(const heads::HeadConfig& c);

/// Strict parsing: unknown keys and wrong types raise ConfigError. Missing
/// keys keep their defaults.
ModelConfig model_config_from_json(const nlohmann::json& j);
heads::HeadConfig head_config_from_json(const nlohmann::json& j);
Config config_from_json(const nlohmann::json& j);

Config load_config(const std::filesystem::path& path);
void save_config(const Config& config, const std::filesystem::path& path);

/// Applies "a.b.c" -> value overrides on top of a config document.
nlohmann::json apply_overrides(nlohmann::json doc, const nlohmann::json& overrides);

/// Stable hex digest of a JSON document (FNV-1a 64 over the compact dump).
std::string json_digest(const nlohmann::json& j);

/// Digest of the architecture (model section only).
std::string model_hash(const ModelConfig& c);
std::string head_hash(const heads::HeadConfig& c);

}  // namespace maskcraft
