#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcraft/box.hpp"
#include "maskcraft/data/mask.hpp"
#include "maskcraft/data/sample.hpp"

namespace maskcraft::eval {

enum class Task { kSegm, kBbox };

std::string to_string(Task task);
Task task_from_string(const std::string& s);

struct Prediction {
  std::int64_t image_id = 0;
  int category_id = 0;
  float score = 0.0f;
  Box box;
  data::BinaryMask mask;  // image-sized; unused for bbox
};

/// Each value is in [0, 1], or -1 when no ground truth falls in its bucket.
struct APReport {
  Task task = Task::kSegm;
  double ap = -1.0;
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ap_s = -1.0;
  double ap_m = -1.0;
  double ap_l = -1.0;
};

struct EvalParams {
  std::vector<double> iou_thresholds;  // defaults to 0.50:0.05:0.95
  double area_small = 32.0 * 32.0;
  double area_large = 96.0 * 96.0;
  int max_detections = 100;

  static EvalParams coco();
  static EvalParams with_buckets(double area_small, double area_large);
};

/// |a & b| / |a | b|, 0 when both are empty. Throws GeometryError on a size
/// mismatch.
double mask_iou(const data::BinaryMask& a, const data::BinaryMask& b);

/// Overlap against a crowd region: |d & g| / |d|.
double mask_crowd_overlap(const data::BinaryMask& d, const data::BinaryMask& g);
double box_crowd_overlap(const Box& d, const Box& g);

/// One ground-truth instance as seen by the matcher.
struct MatchGt {
  bool ignore = false;  // crowd or outside the area bucket
  bool crowd = false;
};

struct MatchResult {
  std::vector<int> matched_gt;        // per prediction, -1 when unmatched
  std::vector<bool> ignored;          // per prediction
};

/// Greedy matching of score-sorted predictions against one (image, category)
/// group. `ious[d][g]` holds the overlap (crowd overlap for crowd gts).
/// Gts must be ordered with non-ignored entries first. A prediction takes the
/// highest-overlap gt at or above the threshold that is still free (crowd gts
/// never become busy) and prefers non-ignored gts; ties go to the later gt.
MatchResult match_predictions(const std::vector<std::vector<double>>& ious, const std::vector<MatchGt>& gts,
                              double iou_threshold);

/// 101-point interpolated AP from pooled, score-sorted TP/FP flags
/// (ignored predictions removed) and the number of non-ignored gts.
double interpolated_ap(const std::vector<bool>& is_tp, std::int64_t num_gt);

/// COCO-style AP over all categories of `gt`. Predictions must refer to
/// images of `gt`.
APReport compute_ap(const std::vector<Prediction>& predictions, const data::Dataset& gt, Task task,
                    const EvalParams& params);

nlohmann::json to_json(const APReport& r);
APReport report_from_json(const nlohmann::json& j);

/// Aligned text table, columns AP AP50 AP75 APS APM APL, values in points.
std::string format_table(const std::vector<std::pair<std::string, APReport>>& rows);

/// COCO results format: image_id, category_id, score, bbox (xywh) and an
/// uncompressed RLE segmentation.
nlohmann::json predictions_to_json(const std::vector<Prediction>& predictions);
std::vector<Prediction> predictions_from_json(const nlohmann::json& j);

}  // namespace maskcraft::eval
