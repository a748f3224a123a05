#pragma once

#include <string>
#include <vector>

namespace maskcraft::heads {

/// Which pyramid level feeds the contextual-fusion branch.
enum class FusionSource { kFinest, kCoarsest };

struct ContextualFusionConfig {
  bool enabled = false;
  /// 3x3 stride-1 conv widths; the last entry must equal the RoI feature width.
  std::vector<int> conv_filters{128, 64, 64};
  FusionSource source = FusionSource::kFinest;

  friend bool operator==(const ContextualFusionConfig&, const ContextualFusionConfig&) = default;
};

struct DeconvPyramidConfig {
  bool enabled = false;
  int depth = 2;
  int channels = 64;

  friend bool operator==(const DeconvPyramidConfig&, const DeconvPyramidConfig&) = default;
};

enum class BoundaryMode { kOff, kOriginal, kImproved };

struct BoundaryRefinementConfig {
  BoundaryMode mode = BoundaryMode::kOff;
  int num_dense_modules = 4;
  int inner_filters = 16;
  int outer_filters = 4;

  friend bool operator==(const BoundaryRefinementConfig&, const BoundaryRefinementConfig&) = default;
};

struct QuasiMultitaskConfig {
  /// Subset of {0.5, 2.0}; the full-resolution branch is always present.
  std::vector<double> scales;
  double aux_loss_weight = 1.0;

  friend bool operator==(const QuasiMultitaskConfig&, const QuasiMultitaskConfig&) = default;
};

struct HeadConfig {
  ContextualFusionConfig contextual_fusion;
  DeconvPyramidConfig deconv_pyramid;
  BoundaryRefinementConfig boundary_refinement;
  QuasiMultitaskConfig quasi_multitask;

  /// Throws ConfigError when the configuration cannot be built against RoI
  /// features of `roi_channels` channels.
  void validate(int roi_channels) const;

  friend bool operator==(const HeadConfig&, const HeadConfig&) = default;
};

std::string to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& s);
std::string to_string(FusionSource source);
FusionSource fusion_source_from_string(const std::string& s);

}  // namespace maskcraft::heads
