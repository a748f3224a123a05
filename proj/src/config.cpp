#include "maskcraft/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>

#include "maskcraft/errors.hpp"

namespace maskcraft {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown config key '" + (path.empty() ? key : path + "." + key) + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + path + "." + key + "' has the wrong type");
  }
}

std::string proposal_mode_name(ProposalMode m) { return m == ProposalMode::kGtBoxes ? "gt_boxes" : "learned"; }
std::string activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "identity"; }

}  // namespace

void ModelConfig::validate() const {
  if (num_classes < 1) throw ConfigError("model.num_classes must be >= 1");
  if (backbone.stage_channels.size() != 4) throw ConfigError("model.backbone.stage_channels must have 4 entries");
  if (backbone.pyramid_channels < 1 || backbone.stem_channels < 1) throw ConfigError("backbone widths must be positive");
  if (roi.det_size < 1 || roi.mask_size < 1 || roi.sampling_ratio < 1) throw ConfigError("model.roi sizes must be positive");
  if (roi.canonical_scale <= 0) throw ConfigError("model.roi.canonical_scale must be positive");
  if (mask_head.channels < 1 || mask_head.num_convs < 0) throw ConfigError("model.mask_head widths invalid");
  if (det_head.fc_dim < 1) throw ConfigError("model.det_head.fc_dim must be positive");
  if (proposals.jitter < 0 || proposals.jitter >= 0.5) throw ConfigError("model.proposals.jitter must be in [0, 0.5)");
  if (proposals.top_k < 1) throw ConfigError("model.proposals.top_k must be >= 1");
  heads.validate(backbone.pyramid_channels);
}

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw ConfigError("train.learning_rate must be positive");
  if (rois_per_image < 4) throw ConfigError("train.rois_per_image must be >= 4");
  if (pos_fraction <= 0 || pos_fraction > 1) throw ConfigError("train.pos_fraction must be in (0, 1]");
  if (grad_accumulation < 1) throw ConfigError("train.grad_accumulation must be >= 1");
  if (biased_training.alpha_early < 1) throw ConfigError("train.biased_training.alpha_early must be >= 1");
  if (biased_training.switch_fraction < 0 || biased_training.switch_fraction > 1) {
    throw ConfigError("train.biased_training.switch_fraction must be in [0, 1]");
  }
}

Config desk_scale_config() { return Config{}; }

Config paper_scale_config() {
  Config c;
  c.model.backbone.stem_channels = 64;
  c.model.backbone.stage_channels = {256, 512, 1024, 2048};
  c.model.backbone.pyramid_channels = 256;
  c.model.det_head.fc_dim = 1024;
  c.model.mask_head.channels = 256;
  c.model.heads.contextual_fusion.conv_filters = {512, 256, 256};
  c.model.heads.deconv_pyramid.channels = 256;
  c.model.roi.canonical_scale = 224.0;
  c.model.roi.canonical_level = 2;
  c.eval.area_small = 32.0 * 32.0;
  c.eval.area_large = 96.0 * 96.0;
  return c;
}

json to_json(const heads::HeadConfig& c) {
  return {
      {"contextual_fusion",
       {{"enabled", c.contextual_fusion.enabled},
        {"conv_filters", c.contextual_fusion.conv_filters},
        {"source", heads::to_string(c.contextual_fusion.source)}}},
      {"deconv_pyramid",
       {{"enabled", c.deconv_pyramid.enabled}, {"depth", c.deconv_pyramid.depth}, {"channels", c.deconv_pyramid.channels}}},
      {"boundary_refinement",
       {{"mode", heads::to_string(c.boundary_refinement.mode)},
        {"num_dense_modules", c.boundary_refinement.num_dense_modules},
        {"inner_filters", c.boundary_refinement.inner_filters},
        {"outer_filters", c.boundary_refinement.outer_filters}}},
      {"quasi_multitask",
       {{"scales", c.quasi_multitask.scales}, {"aux_loss_weight", c.quasi_multitask.aux_loss_weight}}},
  };
}

json to_json(const ModelConfig& c) {
  return {
      {"num_classes", c.num_classes},
      {"backbone",
       {{"stem_channels", c.backbone.stem_channels},
        {"stage_channels", c.backbone.stage_channels},
        {"pyramid_channels", c.backbone.pyramid_channels}}},
      {"proposals",
       {{"mode", proposal_mode_name(c.proposals.mode)},
        {"jitter", c.proposals.jitter},
        {"top_k", c.proposals.top_k},
        {"pre_nms_top_k", c.proposals.pre_nms_top_k},
        {"nms_threshold", c.proposals.nms_threshold},
        {"anchor_scale", c.proposals.anchor_scale},
        {"train_anchors", c.proposals.train_anchors}}},
      {"roi",
       {{"det_size", c.roi.det_size},
        {"mask_size", c.roi.mask_size},
        {"sampling_ratio", c.roi.sampling_ratio},
        {"aligned", c.roi.aligned},
        {"canonical_scale", c.roi.canonical_scale},
        {"canonical_level", c.roi.canonical_level}}},
      {"det_head", {{"fc_dim", c.det_head.fc_dim}}},
      {"mask_head",
       {{"channels", c.mask_head.channels},
        {"num_convs", c.mask_head.num_convs},
        {"activation", activation_name(c.mask_head.activation)}}},
      {"heads", to_json(c.heads)},
  };
}

json to_json(const TrainConfig& c) {
  return {
      {"learning_rate", c.learning_rate},
      {"momentum", c.momentum},
      {"weight_decay", c.weight_decay},
      {"lr_decay_steps", c.lr_decay_steps},
      {"lr_decay_gamma", c.lr_decay_gamma},
      {"rois_per_image", c.rois_per_image},
      {"pos_fraction", c.pos_fraction},
      {"fg_iou_threshold", c.fg_iou_threshold},
      {"random_negatives", c.random_negatives},
      {"grad_accumulation", c.grad_accumulation},
      {"grad_clip_norm", c.grad_clip_norm},
      {"checkpoint_every", c.checkpoint_every},
      {"biased_training",
       {{"enabled", c.biased_training.enabled},
        {"alpha_early", c.biased_training.alpha_early},
        {"switch_fraction", c.biased_training.switch_fraction}}},
  };
}

json to_json(const EvalConfig& c) {
  return {{"score_threshold", c.score_threshold}, {"nms_threshold", c.nms_threshold},
          {"max_detections", c.max_detections},   {"mask_threshold", c.mask_threshold},
          {"area_small", c.area_small},           {"area_large", c.area_large}};
}

json to_json(const Config& c) {
  return {{"model", to_json(c.model)}, {"train", to_json(c.train)}, {"eval", to_json(c.eval)}};
}

heads::HeadConfig head_config_from_json(const json& j) {
  heads::HeadConfig c;
  const std::string p = "model.heads";
  check_keys(j, {"contextual_fusion", "deconv_pyramid", "boundary_refinement", "quasi_multitask"}, p);
  if (j.contains("contextual_fusion")) {
    const auto& f = j.at("contextual_fusion");
    check_keys(f, {"enabled", "conv_filters", "source"}, p + ".contextual_fusion");
    read(f, "enabled", c.contextual_fusion.enabled, p + ".contextual_fusion");
    read(f, "conv_filters", c.contextual_fusion.conv_filters, p + ".contextual_fusion");
    std::string source = heads::to_string(c.contextual_fusion.source);
    read(f, "source", source, p + ".contextual_fusion");
    c.contextual_fusion.source = heads::fusion_source_from_string(source);
  }
  if (j.contains("deconv_pyramid")) {
    const auto& d = j.at("deconv_pyramid");
    check_keys(d, {"enabled", "depth", "channels"}, p + ".deconv_pyramid");
    read(d, "enabled", c.deconv_pyramid.enabled, p + ".deconv_pyramid");
    read(d, "depth", c.deconv_pyramid.depth, p + ".deconv_pyramid");
    read(d, "channels", c.deconv_pyramid.channels, p + ".deconv_pyramid");
  }
  if (j.contains("boundary_refinement")) {
    const auto& b = j.at("boundary_refinement");
    check_keys(b, {"mode", "num_dense_modules", "inner_filters", "outer_filters"}, p + ".boundary_refinement");
    std::string mode = heads::to_string(c.boundary_refinement.mode);
    read(b, "mode", mode, p + ".boundary_refinement");
    c.boundary_refinement.mode = heads::boundary_mode_from_string(mode);
    read(b, "num_dense_modules", c.boundary_refinement.num_dense_modules, p + ".boundary_refinement");
    read(b, "inner_filters", c.boundary_refinement.inner_filters, p + ".boundary_refinement");
    read(b, "outer_filters", c.boundary_refinement.outer_filters, p + ".boundary_refinement");
  }
  if (j.contains("quasi_multitask")) {
    const auto& q = j.at("quasi_multitask");
    check_keys(q, {"scales", "aux_loss_weight"}, p + ".quasi_multitask");
    read(q, "scales", c.quasi_multitask.scales, p + ".quasi_multitask");
    read(q, "aux_loss_weight", c.quasi_multitask.aux_loss_weight, p + ".quasi_multitask");
  }
  return c;
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  check_keys(j, {"num_classes", "backbone", "proposals", "roi", "det_head", "mask_head", "heads"}, "model");
  read(j, "num_classes", c.num_classes, "model");
  if (j.contains("backbone")) {
    const auto& b = j.at("backbone");
    check_keys(b, {"stem_channels", "stage_channels", "pyramid_channels"}, "model.backbone");
    read(b, "stem_channels", c.backbone.stem_channels, "model.backbone");
    read(b, "stage_channels", c.backbone.stage_channels, "model.backbone");
    read(b, "pyramid_channels", c.backbone.pyramid_channels, "model.backbone");
  }
  if (j.contains("proposals")) {
    const auto& p = j.at("proposals");
    check_keys(p, {"mode", "jitter", "top_k", "pre_nms_top_k", "nms_threshold", "anchor_scale", "train_anchors"},
               "model.proposals");
    std::string mode = proposal_mode_name(c.proposals.mode);
    read(p, "mode", mode, "model.proposals");
    if (mode == "gt_boxes") c.proposals.mode = ProposalMode::kGtBoxes;
    else if (mode == "learned") c.proposals.mode = ProposalMode::kLearned;
    else throw ConfigError("unknown model.proposals.mode '" + mode + "'");
    read(p, "jitter", c.proposals.jitter, "model.proposals");
    read(p, "top_k", c.proposals.top_k, "model.proposals");
    read(p, "pre_nms_top_k", c.proposals.pre_nms_top_k, "model.proposals");
    read(p, "nms_threshold", c.proposals.nms_threshold, "model.proposals");
    read(p, "anchor_scale", c.proposals.anchor_scale, "model.proposals");
    read(p, "train_anchors", c.proposals.train_anchors, "model.proposals");
  }
  if (j.contains("roi")) {
    const auto& r = j.at("roi");
    check_keys(r, {"det_size", "mask_size", "sampling_ratio", "aligned", "canonical_scale", "canonical_level"},
               "model.roi");
    read(r, "det_size", c.roi.det_size, "model.roi");
    read(r, "mask_size", c.roi.mask_size, "model.roi");
    read(r, "sampling_ratio", c.roi.sampling_ratio, "model.roi");
    read(r, "aligned", c.roi.aligned, "model.roi");
    read(r, "canonical_scale", c.roi.canonical_scale, "model.roi");
    read(r, "canonical_level", c.roi.canonical_level, "model.roi");
  }
  if (j.contains("det_head")) {
    check_keys(j.at("det_head"), {"fc_dim"}, "model.det_head");
    read(j.at("det_head"), "fc_dim", c.det_head.fc_dim, "model.det_head");
  }
  if (j.contains("mask_head")) {
    const auto& m = j.at("mask_head");
    check_keys(m, {"channels", "num_convs", "activation"}, "model.mask_head");
    read(m, "channels", c.mask_head.channels, "model.mask_head");
    read(m, "num_convs", c.mask_head.num_convs, "model.mask_head");
    std::string act = activation_name(c.mask_head.activation);
    read(m, "activation", act, "model.mask_head");
    if (act == "relu") c.mask_head.activation = Activation::kRelu;
    else if (act == "identity") c.mask_head.activation = Activation::kIdentity;
    else throw ConfigError("unknown model.mask_head.activation '" + act + "'");
  }
  if (j.contains("heads")) c.heads = head_config_from_json(j.at("heads"));
  return c;
}

Config config_from_json(const json& j) {
  Config c;
  check_keys(j, {"model", "train", "eval"}, "");
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
  if (j.contains("train")) {
    const auto& t = j.at("train");
    auto& o = c.train;
    check_keys(t,
               {"learning_rate", "momentum", "weight_decay", "lr_decay_steps", "lr_decay_gamma", "rois_per_image",
                "pos_fraction", "fg_iou_threshold", "random_negatives", "grad_accumulation", "grad_clip_norm",
                "checkpoint_every", "biased_training"},
               "train");
    read(t, "learning_rate", o.learning_rate, "train");
    read(t, "momentum", o.momentum, "train");
    read(t, "weight_decay", o.weight_decay, "train");
    read(t, "lr_decay_steps", o.lr_decay_steps, "train");
    read(t, "lr_decay_gamma", o.lr_decay_gamma, "train");
    read(t, "rois_per_image", o.rois_per_image, "train");
    read(t, "pos_fraction", o.pos_fraction, "train");
    read(t, "fg_iou_threshold", o.fg_iou_threshold, "train");
    read(t, "random_negatives", o.random_negatives, "train");
    read(t, "grad_accumulation", o.grad_accumulation, "train");
    read(t, "grad_clip_norm", o.grad_clip_norm, "train");
    read(t, "checkpoint_every", o.checkpoint_every, "train");
    if (t.contains("biased_training")) {
      const auto& b = t.at("biased_training");
      check_keys(b, {"enabled", "alpha_early", "switch_fraction"}, "train.biased_training");
      read(b, "enabled", o.biased_training.enabled, "train.biased_training");
      read(b, "alpha_early", o.biased_training.alpha_early, "train.biased_training");
      read(b, "switch_fraction", o.biased_training.switch_fraction, "train.biased_training");
    }
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    auto& o = c.eval;
    check_keys(e, {"score_threshold", "nms_threshold", "max_detections", "mask_threshold", "area_small", "area_large"},
               "eval");
    read(e, "score_threshold", o.score_threshold, "eval");
    read(e, "nms_threshold", o.nms_threshold, "eval");
    read(e, "max_detections", o.max_detections, "eval");
    read(e, "mask_threshold", o.mask_threshold, "eval");
    read(e, "area_small", o.area_small, "eval");
    read(e, "area_large", o.area_large, "eval");
  }
  c.model.validate();
  c.train.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const Config& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << to_json(config).dump(2) << "\n";
}

json apply_overrides(json doc, const json& overrides) {
  if (overrides.is_null()) return doc;
  if (!overrides.is_object()) throw ConfigError("overrides must be an object of key paths");
  for (const auto& [path, value] : overrides.items()) {
    std::string pointer = "/";
    for (char ch : path) pointer.push_back(ch == '.' ? '/' : ch);
    try {
      doc[json::json_pointer(pointer)] = value;
    } catch (const json::exception& e) {
      throw ConfigError("cannot apply override '" + path + "': " + e.what());
    }
  }
  return doc;
}

std::string json_digest(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string model_hash(const ModelConfig& c) { return json_digest(to_json(c)); }
std::string head_hash(const heads::HeadConfig& c) { return json_digest(to_json(c)); }

}  // namespace maskcraft
