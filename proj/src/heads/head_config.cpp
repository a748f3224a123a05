#include "maskcraft/heads/head_config.hpp"

#include <algorithm>
#include <set>

#include "maskcraft/errors.hpp"

namespace maskcraft::heads {

void HeadConfig::validate(int roi_channels) const {
  if (contextual_fusion.enabled) {
    const auto& f = contextual_fusion.conv_filters;
    if (f.empty()) throw ConfigError("contextual_fusion.conv_filters must be nonempty when enabled");
    if (std::ranges::any_of(f, [](int n) { return n <= 0; })) {
      throw ConfigError("contextual_fusion.conv_filters entries must be positive");
    }
    if (f.back() != roi_channels) {
      throw ConfigError("contextual_fusion.conv_filters must end in the RoI feature width " +
                        std::to_string(roi_channels) + ", got " + std::to_string(f.back()));
    }
  }
  if (deconv_pyramid.enabled) {
    if (deconv_pyramid.depth < 1) throw ConfigError("deconv_pyramid.depth must be >= 1");
    if (deconv_pyramid.channels != roi_channels) {
      throw ConfigError("deconv_pyramid.channels must equal the RoI feature width " + std::to_string(roi_channels));
    }
  }
  if (boundary_refinement.mode == BoundaryMode::kImproved) {
    if (boundary_refinement.num_dense_modules < 1) throw ConfigError("boundary_refinement.num_dense_modules must be >= 1");
    if (boundary_refinement.inner_filters < 1 || boundary_refinement.outer_filters < 1) {
      throw ConfigError("boundary_refinement filter counts must be positive");
    }
  }
  std::set<double> seen;
  for (double s : quasi_multitask.scales) {
    if (s != 0.5 && s != 2.0) throw ConfigError("quasi_multitask.scales must be a subset of {0.5, 2.0}");
    if (!seen.insert(s).second) throw ConfigError("quasi_multitask.scales has duplicates");
  }
  if (quasi_multitask.aux_loss_weight < 0) throw ConfigError("quasi_multitask.aux_loss_weight must be >= 0");
}

std::string to_string(BoundaryMode mode) {
  switch (mode) {
    case BoundaryMode::kOff: return "off";
    case BoundaryMode::kOriginal: return "original";
    case BoundaryMode::kImproved: return "improved";
  }
  return "off";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "off") return BoundaryMode::kOff;
  if (s == "original") return BoundaryMode::kOriginal;
  if (s == "improved") return BoundaryMode::kImproved;
  throw ConfigError("unknown boundary_refinement.mode '" + s + "'");
}

std::string to_string(FusionSource source) { return source == FusionSource::kFinest ? "finest" : "coarsest"; }

FusionSource fusion_source_from_string(const std::string& s) {
  if (s == "finest") return FusionSource::kFinest;
  if (s == "coarsest") return FusionSource::kCoarsest;
  throw ConfigError("unknown contextual_fusion.source '" + s + "'");
}

}  // namespace maskcraft::heads
