#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "maskcraft/data/coco_io.hpp"
#include "maskcraft/data/image_io.hpp"
#include "maskcraft/data/mask.hpp"
#include "maskcraft/data/mask_target.hpp"
#include "maskcraft/data/shapes_dataset.hpp"
#include "maskcraft/errors.hpp"
#include "maskcraft/rng.hpp"
#include "support/rle_check.hpp"

using namespace maskcraft;
using namespace maskcraft::data;
using rle_check::random_mask;
using rle_check::scan_counts;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("maskcraft_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}


// Bilinear resample of an integer-box crop at cell centers, edge replicated.
// Cells whose sample lies on the threshold come back as -1.
std::vector<float> resample_oracle(const BinaryMask& m, int x1, int y1, int x2, int y2, int side) {
  const int h = y2 - y1, w = x2 - x1;
  auto px = [&](int r, int c) {
    r = std::clamp(r, 0, h - 1);
    c = std::clamp(c, 0, w - 1);
    return double(m.at(y1 + r, x1 + c));
  };
  std::vector<float> out;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const double v = std::clamp((i + 0.5) * h / side - 0.5, 0.0, double(h - 1));
      const double u = std::clamp((j + 0.5) * w / side - 0.5, 0.0, double(w - 1));
      const int r0 = int(std::floor(v)), c0 = int(std::floor(u));
      const double fr = v - r0, fc = u - c0;
      const double s = (1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
                       fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
      // Samples within rounding of the threshold are reported as -1.
      out.push_back(std::abs(s - 0.5) < 1e-9 ? -1.0f : (s >= 0.5 ? 1.0f : 0.0f));
    }
  }
  return out;
}

InstanceAnnotation annotation_with(const BinaryMask& m) {
  InstanceAnnotation a;
  a.mask = m;
  const auto b = m.tight_box();
  if (b) a.bbox = XywhBox::from_corners(*b);
  return a;
}

}  // namespace

TEST(Rle, WorkedExamples) {
  EXPECT_EQ(rle_encode(BinaryMask(3, 3)).counts, (std::vector<std::int64_t>{9}));
  BinaryMask corner(3, 3);
  corner.set(0, 0, true);
  EXPECT_EQ(rle_encode(corner).counts, (std::vector<std::int64_t>{0, 1, 8}));
  EXPECT_EQ(rle_encode(BinaryMask(2, 2, {1, 1, 1, 1})).counts, (std::vector<std::int64_t>{0, 4}));
  EXPECT_EQ(rle_decode({3, 3, {9}}), BinaryMask(3, 3));
}

TEST(Rle, ColumnMajorOrder) {
  BinaryMask m(2, 3);
  m.set(1, 0, true);  // second pixel in column-major order
  EXPECT_EQ(rle_encode(m).counts, (std::vector<std::int64_t>{1, 1, 4}));
}

TEST(Rle, RoundTripRandomMasks) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const int h = int(rng.uniform_int(1, 17)), w = int(rng.uniform_int(1, 23));
    const auto m = random_mask(rng, h, w, rng.uniform());
    const auto rle = rle_encode(m);
    std::int64_t sum = 0;
    for (auto c : rle.counts) sum += c;
    ASSERT_EQ(sum, std::int64_t(h) * w);
    ASSERT_EQ(rle.counts, scan_counts(m));
    ASSERT_EQ(rle_decode(rle), m);
  }
}

TEST(Rle, DecodeRejectsBadCounts) {
  EXPECT_THROW(rle_decode({3, 3, {5}}), CodecError);
  EXPECT_THROW(rle_decode({3, 3, {10}}), CodecError);
  EXPECT_THROW(rle_decode({3, 3, {-1, 10}}), CodecError);
}

TEST(Rle, JsonRoundTrip) {
  Rng rng(2);
  const auto m = random_mask(rng, 5, 7, 0.4);
  EXPECT_EQ(rle_decode(rle_from_json(rle_to_json(rle_encode(m)))), m);
}

TEST(BinaryMaskTest, TightBox) {
  BinaryMask m(6, 8);
  EXPECT_FALSE(m.tight_box().has_value());
  m.set(1, 2, true);
  m.set(4, 5, true);
  EXPECT_EQ(*m.tight_box(), (Box{2, 1, 6, 5}));
  EXPECT_EQ(m.area(), 2);
}

TEST(ShapesDataset, DeterministicAndSeedSensitive) {
  const auto a = generate_shapes_dataset(7, 5, 64, 3);
  const auto b = generate_shapes_dataset(7, 5, 64, 3);
  const auto c = generate_shapes_dataset(8, 5, 64, 3);
  EXPECT_EQ(a, b);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) differ = differ || a[i].image.pixels != c[i].image.pixels;
  EXPECT_TRUE(differ);
}

TEST(ShapesDataset, AnnotationInvariants) {
  const auto samples = generate_shapes_dataset(3, 40, 64, 5);
  ASSERT_EQ(samples.size(), 40u);
  for (const auto& s : samples) {
    ASSERT_GE(s.annotations.size(), 1u);
    ASSERT_LE(s.annotations.size(), 5u);
    std::vector<int> owner(64 * 64, 0);
    for (const auto& a : s.annotations) {
      ASSERT_EQ(a.mask.height(), s.image.height);
      ASSERT_EQ(a.mask.width(), s.image.width);
      ASSERT_GE(a.category_id, 1);
      ASSERT_LE(a.category_id, 3);
      ASSERT_GE(a.mask.area(), kMinVisiblePixels);
      const auto tb = a.mask.tight_box();
      ASSERT_TRUE(tb.has_value());
      const auto b = a.bbox.to_corners();
      EXPECT_GT(a.bbox.w, 0);
      EXPECT_GT(a.bbox.h, 0);
      EXPECT_LE(std::abs(b.x1 - tb->x1), 1.0);
      EXPECT_LE(std::abs(b.y1 - tb->y1), 1.0);
      EXPECT_LE(std::abs(b.x2 - tb->x2), 1.0);
      EXPECT_LE(std::abs(b.y2 - tb->y2), 1.0);
      for (std::size_t i = 0; i < a.mask.pixels().size(); ++i) {
        if (a.mask.pixels()[i]) ++owner[i];
      }
    }
    for (int v : owner) ASSERT_LE(v, 1) << "masks overlap after occlusion";
    for (float v : s.image.pixels) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
}

TEST(ShapesDataset, RejectsInvalidArguments) {
  EXPECT_THROW(generate_shapes_dataset(1, 0, 64, 3), ArgumentError);
  EXPECT_THROW(generate_shapes_dataset(1, 5, 16, 3), ArgumentError);
  EXPECT_THROW(generate_shapes_dataset(1, 5, 64, 0), ArgumentError);
}

TEST(Rasterize, SquareCoversSixteenPixels) {
  const auto m = rasterize_polygons({{2, 2, 6, 2, 6, 6, 2, 6}}, 8, 8);
  EXPECT_EQ(m.area(), 16);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) EXPECT_EQ(m.at(r, c), (r >= 2 && r <= 5 && c >= 2 && c <= 5) ? 1 : 0);
  }
}

TEST(Rasterize, MatchesPointInPolygonOracle) {
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    Polygon poly;
    const int n = int(rng.uniform_int(3, 7));
    for (int i = 0; i < n; ++i) {
      poly.push_back(rng.uniform(0, 12));
      poly.push_back(rng.uniform(0, 10));
    }
    const auto m = rasterize_polygons({poly}, 10, 12);
    for (int r = 0; r < 10; ++r) {
      for (int c = 0; c < 12; ++c) {
        const double x = c + 0.5, y = r + 0.5;
        bool inside = false;
        for (int i = 0, j = n - 1; i < n; j = i++) {
          const double xi = poly[2 * i], yi = poly[2 * i + 1], xj = poly[2 * j], yj = poly[2 * j + 1];
          if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
        }
        ASSERT_EQ(m.at(r, c) != 0, inside) << "polygon " << k << " pixel " << r << "," << c;
      }
    }
  }
}

namespace {

nlohmann::json minimal_doc() {
  return nlohmann::json::parse(R"({
    "images": [{"id": 1, "file_name": "a.ppm", "height": 8, "width": 8}],
    "categories": [{"id": 1, "name": "thing"}],
    "annotations": [{"id": 5, "image_id": 1, "category_id": 1, "iscrowd": 0,
                     "bbox": [2, 2, 4, 4], "segmentation": [[2, 2, 6, 2, 6, 6, 2, 6]]}]
  })");
}

}  // namespace

TEST(CocoLoader, MinimalDocument) {
  const auto ds = parse_coco(minimal_doc(), ".", false);
  ASSERT_EQ(ds.samples.size(), 1u);
  ASSERT_EQ(ds.samples[0].annotations.size(), 1u);
  EXPECT_EQ(ds.samples[0].annotations[0].mask.area(), 16);
  EXPECT_FALSE(ds.samples[0].annotations[0].iscrowd);
}

TEST(CocoLoader, ErrorsNameTheRecord) {
  auto doc = minimal_doc();
  doc["annotations"][0]["image_id"] = 9;
  try {
    parse_coco(doc, ".", false);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("annotations[0]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("unknown image_id 9"), std::string::npos);
  }
  doc = minimal_doc();
  doc["annotations"][0]["category_id"] = 4;
  EXPECT_THROW(parse_coco(doc, ".", false), ParseError);
  doc = minimal_doc();
  doc["annotations"][0]["segmentation"] = {{"size", {8, 8}}, {"counts", "abc"}};
  EXPECT_THROW(parse_coco(doc, ".", false), ParseError);
  doc = minimal_doc();
  doc.erase("categories");
  EXPECT_THROW(parse_coco(doc, ".", false), ParseError);
}

TEST(CocoLoader, MissingImageFileIsLoadError) {
  const auto dir = scratch_dir("missing_image");
  {
    std::ofstream(dir / "ann.json") << minimal_doc().dump();
  }
  EXPECT_THROW(load_coco_annotations(dir / "ann.json", dir), LoadError);
}

TEST(CocoLoader, CrowdRleAndOrdering) {
  auto doc = minimal_doc();
  doc["images"].push_back({{"id", 0}, {"file_name", "b.ppm"}, {"height", 8}, {"width", 8}});
  BinaryMask m(8, 8);
  m.set(3, 3, true);
  doc["annotations"].push_back({{"id", 2},
                                {"image_id", 1},
                                {"category_id", 1},
                                {"iscrowd", true},
                                {"bbox", {3, 3, 1, 1}},
                                {"segmentation", rle_to_json(rle_encode(m))}});
  const auto ds = parse_coco(doc, ".", false);
  ASSERT_EQ(ds.samples.size(), 2u);
  EXPECT_EQ(ds.samples[0].image_id, 0);
  const auto& anns = ds.samples[1].annotations;
  ASSERT_EQ(anns.size(), 2u);
  EXPECT_EQ(anns[0].id, 2);
  EXPECT_TRUE(anns[0].iscrowd);
  EXPECT_EQ(anns[0].mask, m);
  EXPECT_EQ(anns[1].id, 5);
}

TEST(CocoLoader, WrittenDatasetReloads) {
  const auto dir = scratch_dir("roundtrip");
  const auto ds = make_shapes_dataset(4, 6, 48, 3);
  write_coco_dataset(ds, dir);
  const auto back = load_dataset_dir(dir);
  ASSERT_EQ(back.samples.size(), ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].annotations, ds.samples[i].annotations);
    ASSERT_EQ(back.samples[i].image.pixels.size(), ds.samples[i].image.pixels.size());
    for (std::size_t k = 0; k < ds.samples[i].image.pixels.size(); ++k) {
      ASSERT_NEAR(back.samples[i].image.pixels[k], ds.samples[i].image.pixels[k], 0.5 / 255 + 1e-6);
    }
  }
  EXPECT_EQ(to_coco_json(load_dataset_dir(dir)), to_coco_json(back));
}

TEST(ImageIo, PpmRoundTripIsExactAfterQuantization) {
  const auto dir = scratch_dir("ppm");
  Image img(5, 7);
  Rng rng(1);
  for (auto& v : img.pixels) v = float(rng.uniform_int(0, 255)) / 255.0f;
  write_ppm(dir / "x.ppm", img);
  EXPECT_EQ(read_ppm(dir / "x.ppm"), img);
  EXPECT_THROW(read_ppm(dir / "missing.ppm"), LoadError);
}

TEST(MaskTarget, ConstantMasksGiveConstantTargets) {
  BinaryMask full(32, 32);
  for (int r = 4; r < 20; ++r) {
    for (int c = 6; c < 26; ++c) full.set(r, c, true);
  }
  const auto a = annotation_with(full);
  for (int side : {14, 28, 56}) {
    const auto t = make_mask_target(a, {6, 4, 26, 20}, side);
    ASSERT_EQ(t.values.size(), std::size_t(side * side));
    for (float v : t.values) ASSERT_EQ(v, 1.0f);
    const auto t2 = make_mask_target(a, {6.3, 4.7, 25.2, 19.9}, side);
    for (float v : t2.values) ASSERT_EQ(v, 1.0f);
  }
  const auto empty = make_mask_target(a, {27, 21, 31, 31}, 28);
  for (float v : empty.values) ASSERT_EQ(v, 0.0f);
}

TEST(MaskTarget, HalfPlaneSetsLeftColumns) {
  BinaryMask m(40, 40);
  for (int r = 0; r < 40; ++r) {
    for (int c = 8; c < 16; ++c) m.set(r, c, true);
  }
  const auto a = annotation_with(m);
  const auto t = make_mask_target(a, {8, 10, 24, 26}, 28);
  EXPECT_EQ(t.values, resample_oracle(m, 8, 10, 24, 26, 28));
  for (int i = 0; i < 28; ++i) {
    for (int j = 0; j < 28; ++j) EXPECT_EQ(t.values[i * 28 + j], j <= 13 ? 1.0f : 0.0f);
  }
}

TEST(MaskTarget, MatchesResampleOracleOnIntegerBoxes) {
  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    const auto m = random_mask(rng, 24, 24, 0.5);
    const int x1 = int(rng.uniform_int(0, 20)), y1 = int(rng.uniform_int(0, 20));
    const int x2 = int(rng.uniform_int(x1 + 1, 24)), y2 = int(rng.uniform_int(y1 + 1, 24));
    const int side = std::array<int, 3>{14, 28, 56}[k % 3];
    const auto t = make_mask_target(annotation_with(m), {double(x1), double(y1), double(x2), double(y2)}, side);
    const auto expected = resample_oracle(m, x1, y1, x2, y2, side);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (expected[i] >= 0.0f) ASSERT_EQ(t.values[i], expected[i]) << "case " << k << " cell " << i;
    }
  }
}

TEST(MaskTarget, DegenerateBoxIsError) {
  BinaryMask m(8, 8);
  m.set(1, 1, true);
  EXPECT_THROW(make_mask_target(annotation_with(m), {3, 3, 3, 6}, 28), GeometryError);
}
