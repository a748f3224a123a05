#include "maskcraft/eval/coco_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "maskcraft/data/coco_io.hpp"
#include "maskcraft/errors.hpp"

namespace maskcraft::eval {

using nlohmann::json;

std::string to_string(Task task) { return task == Task::kSegm ? "segm" : "bbox"; }

Task task_from_string(const std::string& s) {
  if (s == "segm") return Task::kSegm;
  if (s == "bbox") return Task::kBbox;
  throw ArgumentError("unknown task '" + s + "' (expected segm or bbox)");
}

EvalParams EvalParams::coco() {
  EvalParams p;
  for (int i = 0; i < 10; ++i) p.iou_thresholds.push_back(0.5 + 0.05 * i);
  return p;
}

EvalParams EvalParams::with_buckets(double area_small, double area_large) {
  auto p = coco();
  p.area_small = area_small;
  p.area_large = area_large;
  return p;
}

namespace {

void check_same_shape(const data::BinaryMask& a, const data::BinaryMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw GeometryError("mask size mismatch: " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                        " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

std::int64_t intersection(const data::BinaryMask& a, const data::BinaryMask& b) {
  const auto& pa = a.pixels();
  const auto& pb = b.pixels();
  std::int64_t n = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) n += pa[i] & pb[i];
  return n;
}

}  // namespace

double mask_iou(const data::BinaryMask& a, const data::BinaryMask& b) {
  check_same_shape(a, b);
  const auto inter = intersection(a, b);
  const auto uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mask_crowd_overlap(const data::BinaryMask& d, const data::BinaryMask& g) {
  check_same_shape(d, g);
  const auto area = d.area();
  return area == 0 ? 0.0 : static_cast<double>(intersection(d, g)) / static_cast<double>(area);
}

double box_crowd_overlap(const Box& d, const Box& g) {
  if (!d.valid() || !g.valid()) return 0.0;
  const double iw = std::min(d.x2, g.x2) - std::max(d.x1, g.x1);
  const double ih = std::min(d.y2, g.y2) - std::max(d.y1, g.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih / d.area();
}

MatchResult match_predictions(const std::vector<std::vector<double>>& ious, const std::vector<MatchGt>& gts,
                              double iou_threshold) {
  const std::size_t nd = ious.size();
  MatchResult r{std::vector<int>(nd, -1), std::vector<bool>(nd, false)};
  std::vector<bool> busy(gts.size(), false);
  for (std::size_t d = 0; d < nd; ++d) {
    double best = std::min(iou_threshold, 1.0 - 1e-10);
    int m = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (busy[g] && !gts[g].crowd) continue;
      if (m > -1 && !gts[m].ignore && gts[g].ignore) break;
      if (ious[d][g] < best) continue;
      best = ious[d][g];
      m = static_cast<int>(g);
    }
    if (m == -1) continue;
    r.matched_gt[d] = m;
    r.ignored[d] = gts[m].ignore;
    busy[m] = true;
  }
  return r;
}

double interpolated_ap(const std::vector<bool>& is_tp, std::int64_t num_gt) {
  const std::size_t n = is_tp.size();
  std::vector<double> recall(n), precision(n);
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    (is_tp[i] ? tp : fp) += 1;
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

namespace {

struct GtEntry {
  Box box;
  const data::BinaryMask* mask = nullptr;
  double area = 0.0;
  bool crowd = false;
};

struct DtEntry {
  const Prediction* pred = nullptr;
  double area = 0.0;
};

double gt_area(const data::InstanceAnnotation& a, Task task) {
  return task == Task::kSegm ? static_cast<double>(a.mask.area()) : a.bbox.w * a.bbox.h;
}

double dt_area(const Prediction& p, Task task) {
  return task == Task::kSegm ? static_cast<double>(p.mask.area()) : p.box.area();
}

}  // namespace

APReport compute_ap(const std::vector<Prediction>& predictions, const data::Dataset& gt, Task task,
                    const EvalParams& params_in) {
  const EvalParams params = params_in.iou_thresholds.empty()
                                ? EvalParams::with_buckets(params_in.area_small, params_in.area_large)
                                : params_in;
  std::unordered_map<std::int64_t, std::size_t> image_pos;
  for (std::size_t i = 0; i < gt.samples.size(); ++i) image_pos.emplace(gt.samples[i].image_id, i);
  std::vector<int> categories;
  for (const auto& c : gt.categories) categories.push_back(c.id);
  std::unordered_map<int, std::size_t> cat_pos;
  for (std::size_t i = 0; i < categories.size(); ++i) cat_pos.emplace(categories[i], i);

  const std::size_t ni = gt.samples.size(), nc = categories.size();
  std::vector<std::vector<GtEntry>> gts(ni * nc);
  std::vector<std::vector<DtEntry>> dts(ni * nc);
  for (std::size_t i = 0; i < ni; ++i) {
    for (const auto& a : gt.samples[i].annotations) {
      const auto c = cat_pos.find(a.category_id);
      if (c == cat_pos.end()) throw ArgumentError("annotation with unknown category " + std::to_string(a.category_id));
      gts[i * nc + c->second].push_back({a.bbox.to_corners(), &a.mask, gt_area(a, task), a.iscrowd});
    }
  }
  for (const auto& p : predictions) {
    const auto im = image_pos.find(p.image_id);
    if (im == image_pos.end()) throw ArgumentError("prediction for unknown image_id " + std::to_string(p.image_id));
    const auto c = cat_pos.find(p.category_id);
    if (c == cat_pos.end()) continue;
    dts[im->second * nc + c->second].push_back({&p, dt_area(p, task)});
  }
  for (auto& group : dts) {
    std::stable_sort(group.begin(), group.end(),
                     [](const DtEntry& a, const DtEntry& b) { return a.pred->score > b.pred->score; });
    if (static_cast<int>(group.size()) > params.max_detections) group.resize(params.max_detections);
  }

  // Overlaps per group, computed once.
  std::vector<std::vector<std::vector<double>>> overlaps(ni * nc);
  for (std::size_t k = 0; k < ni * nc; ++k) {
    auto& ov = overlaps[k];
    ov.assign(dts[k].size(), std::vector<double>(gts[k].size(), 0.0));
    for (std::size_t d = 0; d < dts[k].size(); ++d) {
      const auto& p = *dts[k][d].pred;
      for (std::size_t g = 0; g < gts[k].size(); ++g) {
        const auto& e = gts[k][g];
        if (task == Task::kSegm) {
          ov[d][g] = e.crowd ? mask_crowd_overlap(p.mask, *e.mask) : mask_iou(p.mask, *e.mask);
        } else {
          ov[d][g] = e.crowd ? box_crowd_overlap(p.box, e.box) : box_iou(p.box, e.box);
        }
      }
    }
  }

  struct Range {
    double lo, hi;
  };
  const std::vector<Range> ranges{{0.0, 1e10}, {0.0, params.area_small},
                                  {params.area_small, params.area_large}, {params.area_large, 1e10}};
  const std::size_t nt = params.iou_thresholds.size();
  // precision[range][threshold][category], -1 when the category has no gt in range.
  std::vector<std::vector<std::vector<double>>> precision(
      ranges.size(), std::vector<std::vector<double>>(nt, std::vector<double>(nc, -1.0)));

  // Score ties are pooled in image_id order, whatever the dataset order.
  std::vector<std::size_t> by_id(ni);
  std::iota(by_id.begin(), by_id.end(), std::size_t{0});
  std::ranges::stable_sort(by_id, {}, [&](std::size_t i) { return gt.samples[i].image_id; });

  for (std::size_t ri = 0; ri < ranges.size(); ++ri) {
    const auto [lo, hi] = ranges[ri];
    for (std::size_t c = 0; c < nc; ++c) {
      // Per image: gts reordered with non-ignored first.
      std::vector<std::vector<std::size_t>> order(ni);
      std::vector<std::vector<MatchGt>> flags(ni);
      std::int64_t num_gt = 0;
      for (std::size_t i = 0; i < ni; ++i) {
        const auto& g = gts[i * nc + c];
        std::vector<std::size_t> kept, ignored;
        for (std::size_t j = 0; j < g.size(); ++j) {
          const bool ig = g[j].crowd || g[j].area < lo || g[j].area > hi;
          (ig ? ignored : kept).push_back(j);
        }
        num_gt += static_cast<std::int64_t>(kept.size());
        order[i] = kept;
        order[i].insert(order[i].end(), ignored.begin(), ignored.end());
        for (std::size_t j : order[i]) {
          flags[i].push_back({g[j].crowd || g[j].area < lo || g[j].area > hi, g[j].crowd});
        }
      }
      if (num_gt == 0) continue;
      for (std::size_t t = 0; t < nt; ++t) {
        struct Pooled {
          float score;
          bool tp;
        };
        std::vector<Pooled> pooled;
        for (std::size_t i : by_id) {
          const std::size_t k = i * nc + c;
          std::vector<std::vector<double>> ious(dts[k].size());
          for (std::size_t d = 0; d < dts[k].size(); ++d) {
            for (std::size_t j : order[i]) ious[d].push_back(overlaps[k][d][j]);
          }
          const auto m = match_predictions(ious, flags[i], params.iou_thresholds[t]);
          for (std::size_t d = 0; d < dts[k].size(); ++d) {
            const bool matched = m.matched_gt[d] >= 0;
            const bool ignore = matched ? m.ignored[d] : (dts[k][d].area < lo || dts[k][d].area > hi);
            if (!ignore) pooled.push_back({dts[k][d].pred->score, matched});
          }
        }
        std::stable_sort(pooled.begin(), pooled.end(),
                         [](const Pooled& a, const Pooled& b) { return a.score > b.score; });
        std::vector<bool> tp;
        tp.reserve(pooled.size());
        for (const auto& p : pooled) tp.push_back(p.tp);
        precision[ri][t][c] = interpolated_ap(tp, num_gt);
      }
    }
  }

  auto mean_over = [&](std::size_t ri, const std::vector<std::size_t>& thresholds) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t t : thresholds) {
      for (std::size_t c = 0; c < nc; ++c) {
        const double v = precision[ri][t][c];
        if (v > -1.0) {
          sum += v;
          ++n;
        }
      }
    }
    return n == 0 ? -1.0 : sum / n;
  };
  auto threshold_index = [&](double v) -> std::vector<std::size_t> {
    for (std::size_t t = 0; t < nt; ++t) {
      if (std::abs(params.iou_thresholds[t] - v) < 1e-9) return {t};
    }
    return {};
  };
  std::vector<std::size_t> all(nt);
  std::iota(all.begin(), all.end(), 0);

  APReport r;
  r.task = task;
  r.ap = mean_over(0, all);
  r.ap50 = mean_over(0, threshold_index(0.5));
  r.ap75 = mean_over(0, threshold_index(0.75));
  r.ap_s = mean_over(1, all);
  r.ap_m = mean_over(2, all);
  r.ap_l = mean_over(3, all);
  return r;
}

json to_json(const APReport& r) {
  return {{"task", to_string(r.task)}, {"AP", r.ap},    {"AP50", r.ap50}, {"AP75", r.ap75},
          {"APS", r.ap_s},             {"APM", r.ap_m}, {"APL", r.ap_l}};
}

APReport report_from_json(const json& j) {
  try {
    return {task_from_string(j.at("task").get<std::string>()),
            j.at("AP").get<double>(),
            j.at("AP50").get<double>(),
            j.at("AP75").get<double>(),
            j.at("APS").get<double>(),
            j.at("APM").get<double>(),
            j.at("APL").get<double>()};
  } catch (const json::exception& e) {
    throw ParseError(std::string("AP report: ") + e.what());
  }
}

std::string format_table(const std::vector<std::pair<std::string, APReport>>& rows) {
  std::size_t name_width = 4;
  for (const auto& [name, r] : rows) name_width = std::max(name_width, name.size());
  auto cell = [](double v) {
    char buf[32];
    if (v < 0.0) {
      std::snprintf(buf, sizeof buf, "%7s", "-");
    } else {
      std::snprintf(buf, sizeof buf, "%7.1f", 100.0 * v);
    }
    return std::string(buf);
  };
  std::string out = std::string("name") + std::string(name_width - 4, ' ') + "  task";
  for (const char* h : {"AP", "AP50", "AP75", "APS", "APM", "APL"}) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%7s", h);
    out += buf;
  }
  out += '\n';
  for (const auto& [name, r] : rows) {
    out += name + std::string(name_width - name.size(), ' ') + "  " + to_string(r.task);
    for (double v : {r.ap, r.ap50, r.ap75, r.ap_s, r.ap_m, r.ap_l}) out += cell(v);
    out += '\n';
  }
  return out;
}

json predictions_to_json(const std::vector<Prediction>& predictions) {
  json out = json::array();
  for (const auto& p : predictions) {
    const auto xywh = XywhBox::from_corners(p.box);
    json rec{{"image_id", p.image_id},
             {"category_id", p.category_id},
             {"score", p.score},
             {"bbox", {xywh.x, xywh.y, xywh.w, xywh.h}}};
    if (!p.mask.empty_shape()) rec["segmentation"] = data::rle_to_json(data::rle_encode(p.mask));
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Prediction> predictions_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("predictions: expected a JSON array");
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& rec = j[i];
    try {
      Prediction p;
      p.image_id = rec.at("image_id").get<std::int64_t>();
      p.category_id = rec.at("category_id").get<int>();
      p.score = rec.at("score").get<float>();
      const auto& b = rec.at("bbox");
      if (!b.is_array() || b.size() != 4) throw ParseError("bbox must have 4 numbers");
      p.box = XywhBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()}.to_corners();
      if (rec.contains("segmentation")) p.mask = data::rle_decode(data::rle_from_json(rec["segmentation"]));
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw ParseError("predictions[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

}  // namespace maskcraft::eval
