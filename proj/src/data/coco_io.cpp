#include "maskcraft/data/coco_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "maskcraft/data/image_io.hpp"
#include "maskcraft/errors.hpp"

namespace maskcraft::data {

using nlohmann::json;

namespace {

bool inside_polygon(const Polygon& poly, double x, double y) {
  const std::size_t n = poly.size() / 2;
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = poly[2 * i], yi = poly[2 * i + 1];
    const double xj = poly[2 * j], yj = poly[2 * j + 1];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

const json& require_array(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key) || !doc.at(key).is_array()) {
    throw ParseError(std::string("document: missing array '") + key + "'");
  }
  return doc.at(key);
}

BinaryMask parse_segmentation(const json& seg, int height, int width, const std::string& where) {
  if (seg.is_array()) {
    std::vector<Polygon> polys;
    for (const auto& p : seg) {
      if (!p.is_array() || p.size() < 6 || p.size() % 2 != 0) {
        throw ParseError(where + ": polygon must hold an even number (>= 6) of coordinates");
      }
      try {
        polys.push_back(p.get<Polygon>());
      } catch (const json::exception&) {
        throw ParseError(where + ": polygon coordinates must be numbers");
      }
    }
    return rasterize_polygons(polys, height, width);
  }
  if (seg.is_object()) {
    if (seg.contains("counts") && seg.at("counts").is_string()) {
      throw ParseError(where + ": compressed RLE strings are not supported");
    }
    RleMask rle;
    try {
      rle = rle_from_json(seg);
    } catch (const json::exception& e) {
      throw ParseError(where + ": malformed RLE (" + e.what() + ")");
    }
    if (rle.height != height || rle.width != width) {
      throw ParseError(where + ": RLE size does not match its image");
    }
    try {
      return rle_decode(rle);
    } catch (const CodecError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  throw ParseError(where + ": segmentation must be a polygon list or an RLE object");
}

}  // namespace

BinaryMask rasterize_polygons(const std::vector<Polygon>& polygons, int height, int width) {
  BinaryMask mask(height, width);
  for (const auto& poly : polygons) {
    if (poly.size() < 6) continue;
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        if (inside_polygon(poly, c + 0.5, r + 0.5)) mask.set(r, c, true);
      }
    }
  }
  return mask;
}

json rle_to_json(const RleMask& rle) {
  return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

RleMask rle_from_json(const json& j) {
  RleMask rle;
  const auto size = j.at("size").get<std::vector<int>>();
  if (size.size() != 2) throw json::type_error::create(302, "size must hold [height, width]", &j);
  rle.height = size[0];
  rle.width = size[1];
  rle.counts = j.at("counts").get<std::vector<std::int64_t>>();
  return rle;
}

Dataset parse_coco(const json& doc, const std::filesystem::path& image_root, bool load_images,
                   const std::optional<std::vector<int>>& category_filter) {
  Dataset out;
  const auto& images = require_array(doc, "images");
  const auto& annotations = require_array(doc, "annotations");
  const auto& categories = require_array(doc, "categories");

  std::set<int> category_ids;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const std::string where = "categories[" + std::to_string(i) + "]";
    Category cat{require<int>(categories[i], "id", where), ""};
    if (categories[i].contains("name") && categories[i].at("name").is_string()) {
      cat.name = categories[i].at("name").get<std::string>();
    }
    if (!category_ids.insert(cat.id).second) throw ParseError(where + ": duplicate category id");
    if (!category_filter || std::ranges::count(*category_filter, cat.id)) out.categories.push_back(cat);
  }
  std::ranges::sort(out.categories, {}, &Category::id);

  std::map<std::int64_t, ImageSample> by_id;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = "images[" + std::to_string(i) + "]";
    ImageSample s;
    s.image_id = require<std::int64_t>(images[i], "id", where);
    s.file_name = require<std::string>(images[i], "file_name", where);
    const int h = require<int>(images[i], "height", where);
    const int w = require<int>(images[i], "width", where);
    if (h <= 0 || w <= 0) throw ParseError(where + ": non-positive image size");
    if (load_images) {
      s.image = read_ppm(image_root / s.file_name);
      if (s.image.height != h || s.image.width != w) {
        throw LoadError(where + ": image file " + s.file_name + " does not match declared size");
      }
    } else {
      s.image.height = h;
      s.image.width = w;
    }
    if (!by_id.emplace(s.image_id, std::move(s)).second) throw ParseError(where + ": duplicate image id");
  }

  std::set<std::int64_t> ann_ids;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const json& a = annotations[i];
    const std::string where = "annotations[" + std::to_string(i) + "]";
    InstanceAnnotation ann;
    ann.id = require<std::int64_t>(a, "id", where);
    if (!ann_ids.insert(ann.id).second) throw ParseError(where + ": duplicate annotation id");
    const auto image_id = require<std::int64_t>(a, "image_id", where);
    auto it = by_id.find(image_id);
    if (it == by_id.end()) throw ParseError(where + ": unknown image_id " + std::to_string(image_id));
    ann.category_id = require<int>(a, "category_id", where);
    if (!category_ids.count(ann.category_id)) {
      throw ParseError(where + ": unknown category_id " + std::to_string(ann.category_id));
    }
    if (a.contains("iscrowd")) {
      const auto& c = a.at("iscrowd");
      if (c.is_boolean()) ann.iscrowd = c.get<bool>();
      else if (c.is_number_integer()) ann.iscrowd = c.get<int>() != 0;
      else throw ParseError(where + ": iscrowd must be 0/1 or boolean");
    }
    if (!a.contains("segmentation")) throw ParseError(where + ": missing field 'segmentation'");
    const int h = it->second.image.height, w = it->second.image.width;
    ann.mask = parse_segmentation(a.at("segmentation"), h, w, where);
    if (a.contains("bbox")) {
      const auto b = require<std::vector<double>>(a, "bbox", where);
      if (b.size() != 4) throw ParseError(where + ": bbox must have 4 entries");
      ann.bbox = {b[0], b[1], b[2], b[3]};
    } else if (auto tight = ann.mask.tight_box()) {
      ann.bbox = XywhBox::from_corners(*tight);
    }
    // Clip to the image so the box invariant holds for sloppy exporters.
    ann.bbox = XywhBox::from_corners(clip_box(ann.bbox.to_corners(), w, h));
    if (ann.bbox.w <= 0 || ann.bbox.h <= 0) {
      auto tight = ann.mask.tight_box();
      if (!tight) throw ParseError(where + ": empty box and empty mask");
      ann.bbox = XywhBox::from_corners(*tight);
    }
    if (category_filter && !std::ranges::count(*category_filter, ann.category_id)) continue;
    it->second.annotations.push_back(std::move(ann));
  }

  for (auto& [id, sample] : by_id) {
    std::ranges::sort(sample.annotations, {}, &InstanceAnnotation::id);
    out.samples.push_back(std::move(sample));
  }
  return out;
}

Dataset load_coco_annotations(const std::filesystem::path& json_path, const std::filesystem::path& image_root,
                              const std::optional<std::vector<int>>& category_filter) {
  std::ifstream in(json_path);
  if (!in) throw LoadError("cannot open annotation file " + json_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(json_path.string() + ": " + e.what());
  }
  return parse_coco(doc, image_root, true, category_filter);
}

json to_coco_json(const Dataset& dataset) {
  json images = json::array(), annotations = json::array(), categories = json::array();
  for (const auto& c : dataset.categories) categories.push_back({{"id", c.id}, {"name", c.name}});
  for (const auto& s : dataset.samples) {
    images.push_back({{"id", s.image_id},
                      {"file_name", s.file_name},
                      {"height", s.image.height},
                      {"width", s.image.width}});
    for (const auto& a : s.annotations) {
      annotations.push_back({{"id", a.id},
                             {"image_id", s.image_id},
                             {"category_id", a.category_id},
                             {"bbox", {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h}},
                             {"area", a.mask.area()},
                             {"iscrowd", a.iscrowd ? 1 : 0},
                             {"segmentation", rle_to_json(rle_encode(a.mask))}});
    }
  }
  return {{"images", images}, {"annotations", annotations}, {"categories", categories}};
}

void write_coco_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(images_dir(dir));
  for (const auto& s : dataset.samples) write_ppm(images_dir(dir) / s.file_name, s.image);
  std::ofstream out(annotations_path(dir));
  if (!out) throw LoadError("cannot write " + annotations_path(dir).string());
  out << to_coco_json(dataset).dump() << "\n";
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw LoadError("dataset directory not found: " + dir.string());
  return load_coco_annotations(annotations_path(dir), images_dir(dir));
}

}  // namespace maskcraft::data
