#pragma once

// Evaluator versus brute-force oracle over random scenarios.

#include <algorithm>
#include <cmath>
#include <string>

#include "support/ap_oracle.hpp"
#include "support/scenarios.hpp"

namespace ap_agreement {

using maskcraft::eval::APReport;
using maskcraft::eval::EvalParams;
using maskcraft::eval::Task;

struct Outcome {
  double max_diff = 0.0;
  int cases = 0;
  int nonempty = 0;  // reports with at least one defined value
  std::string worst;
};

inline double report_diff(const APReport& a, const oracle::Report& b) {
  const double pairs[6][2] = {{a.ap, b.ap}, {a.ap50, b.ap50}, {a.ap75, b.ap75},
                              {a.ap_s, b.s},  {a.ap_m, b.m},   {a.ap_l, b.l}};
  double d = 0.0;
  for (const auto& p : pairs) d = std::max(d, std::abs(p[0] - p[1]));
  return d;
}

inline oracle::Params oracle_params(const EvalParams& p) {
  return {p.iou_thresholds, p.area_small, p.area_large, p.max_detections};
}

/// Runs `count` scenarios, each under segm and bbox. Every fourth scenario
/// uses a small detection cap so truncation is exercised.
inline Outcome run(int count, std::uint64_t first_seed = 1000) {
  Outcome o;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = first_seed + i;
    const auto s = scenarios::make(seed, 6, 8, 3);
    auto params = EvalParams::with_buckets(scenarios::kSmall, scenarios::kLarge);
    if (i % 4 == 3) params.max_detections = 2;
    for (Task task : {Task::kSegm, Task::kBbox}) {
      const auto mine = maskcraft::eval::compute_ap(s.predictions, s.gt, task, params);
      const auto ref = oracle::evaluate(s.predictions, s.gt, task, oracle_params(params));
      const double d = report_diff(mine, ref);
      ++o.cases;
      if (mine.ap >= 0) ++o.nonempty;
      if (d > o.max_diff || std::isnan(d)) {
        o.max_diff = std::isnan(d) ? INFINITY : d;
        o.worst = "seed " + std::to_string(seed) + " " + maskcraft::eval::to_string(task);
      }
    }
  }
  return o;
}

/// Every gt answered by one exact, score-1 prediction.
inline std::vector<maskcraft::eval::Prediction> perfect(const maskcraft::data::Dataset& ds) {
  std::vector<maskcraft::eval::Prediction> out;
  for (const auto& s : ds.samples) {
    for (const auto& a : s.annotations) {
      if (a.iscrowd) continue;
      out.push_back({s.image_id, a.category_id, 1.0f, a.bbox.to_corners(), a.mask});
    }
  }
  return out;
}

}  // namespace ap_agreement
