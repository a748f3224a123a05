#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcraft/data/sample.hpp"

namespace maskcraft::data {

/// Polygon as a flat list x0, y0, x1, y1, ... in pixel coordinates.
using Polygon = std::vector<double>;

/// Rasterizes the union of polygons: a pixel is set when its center
/// (c + 0.5, r + 0.5) lies inside any polygon (even-odd rule).
BinaryMask rasterize_polygons(const std::vector<Polygon>& polygons, int height, int width);

/// Loads a COCO instance annotation file. Images are read from
/// `image_root / file_name`. Polygon and uncompressed-RLE segmentations are
/// accepted. Output is ordered by image id, annotations by annotation id.
/// Throws ParseError (message names the record) or LoadError.
Dataset load_coco_annotations(const std::filesystem::path& json_path, const std::filesystem::path& image_root,
                              const std::optional<std::vector<int>>& category_filter = std::nullopt);

/// Parses an in-memory COCO document; `load_images` false leaves images blank
/// (dimensions only), which is what evaluation needs for ground truth.
Dataset parse_coco(const nlohmann::json& doc, const std::filesystem::path& image_root, bool load_images,
                   const std::optional<std::vector<int>>& category_filter = std::nullopt);

/// COCO document with uncompressed-RLE segmentations.
nlohmann::json to_coco_json(const Dataset& dataset);

/// Writes `dir/images/<file_name>` for every sample plus `dir/annotations.json`.
void write_coco_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Standard on-disk layout used by the CLI.
inline std::filesystem::path annotations_path(const std::filesystem::path& dir) { return dir / "annotations.json"; }
inline std::filesystem::path images_dir(const std::filesystem::path& dir) { return dir / "images"; }

/// Loads a dataset directory written by write_coco_dataset.
Dataset load_dataset_dir(const std::filesystem::path& dir);

nlohmann::json rle_to_json(const RleMask& rle);
RleMask rle_from_json(const nlohmann::json& j);

}  // namespace maskcraft::data
