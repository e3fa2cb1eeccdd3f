#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "../oracles.hpp"
#include "hodet/data.hpp"
#include "hodet/errors.hpp"
#include "hodet/evaluation.hpp"

using namespace hodet;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string voc_object(const std::string& name, const std::string& xmin, const std::string& ymin, const std::string& xmax,
                       const std::string& ymax, int difficult = 0) {
  return "<object><name>" + name + "</name><difficult>" + std::to_string(difficult) + "</difficult><bndbox><xmin>" +
         xmin + "</xmin><ymin>" + ymin + "</ymin><xmax>" + xmax + "</xmax><ymax>" + ymax + "</ymax></bndbox></object>";
}

std::string voc_doc(int w, int h, const std::string& objects) {
  return "<annotation><filename>x.pgm</filename><size><width>" + std::to_string(w) + "</width><height>" +
         std::to_string(h) + "</height><depth>1</depth></size>" + objects + "</annotation>";
}

}  // namespace

TEST_CASE("aligned placement produces hierarchy nodes") {
  for (HierarchyScheme scheme : {HierarchyScheme::Overlapped, HierarchyScheme::NonOverlapped}) {
    SyntheticSpec spec;
    spec.num_scenes = 60;
    spec.scheme = scheme;
    spec.max_objects = 2;
    const auto scenes = generate(spec);
    const auto nodes = hierarchy_nodes(Box(0, 0, 64, 64), scheme, 3);
    for (const auto& s : scenes) {
      CHECK(s.objects.size() >= 1);
      CHECK(s.objects.size() <= 2);
      for (const auto& o : s.objects) {
        bool found = false;
        for (std::size_t i = 1; i < nodes.size(); ++i) found = found || nodes[i] == o.box;
        CHECK(found);
      }
    }
  }
}

TEST_CASE("rendered pixels follow the boxes") {
  SyntheticSpec spec;
  spec.num_scenes = 5;
  spec.noise = 0.1;
  spec.foreground = 0.9;
  for (const auto& s : generate(spec)) {
    const Box& b = s.objects.front().box;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const bool fg = x + 0.5 >= b.x0() && x + 0.5 < b.x1() && y + 0.5 >= b.y0() && y + 0.5 < b.y1();
        const float v = s.image.at(x, y, 0);
        if (fg) {
          CHECK(v == doctest::Approx(std::round(0.9 * 255) / 255.0));
        } else {
          CHECK(v <= 0.1f + 1e-6f);
        }
      }
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  SyntheticSpec spec;
  spec.num_scenes = 20;
  const auto a = generate(spec);
  const auto b = generate(spec);
  spec.seed = 2;
  const auto c = generate(spec);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].image == b[i].image);
    CHECK(a[i].objects.front().box == b[i].objects.front().box);
    differs = differs || !(a[i].image == c[i].image);
  }
  CHECK(differs);
}

TEST_CASE("uniform placement: box centres split evenly across the image halves") {
  SyntheticSpec spec;
  spec.num_scenes = 1000;
  spec.placement = Placement::Uniform;
  spec.min_size = 0.1;
  spec.max_size = 0.5;
  spec.noise = 0.0;
  int left = 0, off_centre = 0, top = 0, off_centre_y = 0;
  std::set<int> widths;
  for (const auto& s : generate(spec)) {
    const Box& b = s.objects.front().box;
    CHECK(b.x0() >= 0);
    CHECK(b.x1() <= 64);
    CHECK(b.width() >= 7);
    CHECK(b.width() <= 32);
    widths.insert(static_cast<int>(b.width()));
    const double cx = (b.x0() + b.x1()) / 2, cy = (b.y0() + b.y1()) / 2;
    if (cx != 32) {
      ++off_centre;
      left += cx < 32;
    }
    if (cy != 32) {
      ++off_centre_y;
      top += cy < 32;
    }
  }
  CHECK(oracle::within_3_sigma(left, off_centre, 0.5));
  CHECK(oracle::within_3_sigma(top, off_centre_y, 0.5));
  CHECK(widths.size() == 26);
}

TEST_CASE("infeasible placements are rejected") {
  SyntheticSpec spec;
  spec.min_size = 0.95;
  spec.max_size = 0.99;
  CHECK_THROWS_AS(generate(spec), InfeasiblePlacement);
  spec.placement = Placement::Uniform;
  spec.image_size = 16;
  spec.min_size = 0.96;
  spec.max_size = 0.99;
  CHECK_THROWS_AS(generate(spec), InfeasiblePlacement);
  spec.min_size = 0.5;
  spec.max_size = 0.2;
  CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("VOC coordinates convert from 1-based inclusive") {
  const fs::path dir = fresh_dir("hodet_voc_test");
  write_text(dir / "a.xml", voc_doc(40, 30, voc_object("cat", "1", "1", "40", "30") + voc_object("dog", "5", "5", "9", "9") +
                                                voc_object("cat", "3", "4", "10", "12", 1)));
  int w = 0, h = 0;
  const auto cats = parse_voc_annotation(dir / "a.xml", "cat", &w, &h);
  CHECK(w == 40);
  CHECK(h == 30);
  REQUIRE(cats.size() == 1);
  CHECK(cats[0].box == Box(0, 0, 40, 30));
  CHECK(cats[0].label == "cat");

  write_text(dir / "bad.xml", voc_doc(40, 30, voc_object("cat", "1", "abc", "40", "30")));
  try {
    parse_voc_annotation(dir / "bad.xml", "cat");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.xml") != std::string::npos);
  }
  write_text(dir / "broken.xml", "<annotation><object>");
  CHECK_THROWS_AS(parse_voc_annotation(dir / "broken.xml", "cat"), ParseError);
}

TEST_CASE("manifest loading filters classes and reports missing images") {
  const fs::path dir = fresh_dir("hodet_manifest_test");
  fs::create_directories(dir / "img");
  write_pnm(dir / "img" / "a.pgm", ImageRaster(32, 32, 1, 0.5f));
  write_pnm(dir / "img" / "b.pgm", ImageRaster(32, 32, 1, 0.5f));
  write_text(dir / "a.xml", voc_doc(32, 32, voc_object("cat", "2", "2", "20", "20")));
  write_text(dir / "b.xml", voc_doc(32, 32, voc_object("dog", "2", "2", "20", "20")));
  write_text(dir / "manifest.csv", "split,image,annotation\ntrain,img/a.pgm,a.xml\ntrain,img/b.pgm,b.xml\n");
  const auto scenes = load_voc_annotations(read_manifest(dir / "manifest.csv"), "cat");
  REQUIRE(scenes.size() == 1);
  CHECK(scenes[0].id == "a");
  CHECK(scenes[0].objects[0].box == Box(1, 1, 20, 20));

  write_text(dir / "c.xml", voc_doc(32, 32, voc_object("cat", "2", "2", "20", "20")));
  write_text(dir / "m2.csv", "split,image,annotation\ntrain,img/missing.pgm,c.xml\n");
  CHECK_THROWS_AS(load_voc_annotations(read_manifest(dir / "m2.csv"), "cat"), MissingImage);

  write_text(dir / "m3.csv", "split,image,annotation\ntrain,img/a.pgm,b.xml\nval,img/b.pgm,a.xml\n");
  CHECK_THROWS_AS(read_manifest(dir / "m3.csv"), ParseError);
  CHECK_THROWS_AS(read_manifest(dir / "nope.csv"), DataError);
}

TEST_CASE("written datasets reload unchanged") {
  const fs::path dir = fresh_dir("hodet_dataset_test");
  SyntheticSpec spec;
  spec.num_scenes = 8;
  spec.max_objects = 3;
  spec.placement = Placement::Uniform;
  const auto scenes = generate(spec);
  const auto manifest = read_manifest(write_dataset(scenes, dir, "val"));
  CHECK(manifest.split == "val");
  CHECK(manifest.entries.size() == 8);
  const auto back = load_voc_annotations(manifest, "object");
  REQUIRE(back.size() == scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    CHECK(back[i].id == scenes[i].id);
    CHECK(back[i].image == scenes[i].image);
    REQUIRE(back[i].objects.size() == scenes[i].objects.size());
    for (std::size_t k = 0; k < scenes[i].objects.size(); ++k) CHECK(back[i].objects[k].box == scenes[i].objects[k].box);
  }
}

TEST_CASE("PNM round trip") {
  std::vector<float> px;
  for (int i = 0; i < 20 * 17 * 3; ++i) px.push_back(static_cast<float>(i % 256) / 255.0f);
  const ImageRaster rgb(20, 17, 3, px);
  CHECK(decode_pnm(encode_pnm(rgb)) == rgb);
  const std::string truncated = "P5\n20 20\n255\nshort";
  const std::vector<std::uint8_t> bytes(truncated.begin(), truncated.end());
  CHECK_THROWS_AS(decode_pnm(bytes), FormatError);
}
