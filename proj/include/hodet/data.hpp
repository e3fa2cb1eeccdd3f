#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hodet/environment.hpp"
#include "hodet/geometry.hpp"

namespace hodet {

enum class Placement { Uniform, HierarchyAligned };

std::string_view to_string(Placement p);
Placement parse_placement(std::string_view name);

struct SyntheticSpec {
  int image_size = 64;
  int num_scenes = 100;
  int min_objects = 1;
  int max_objects = 1;
  // Object side as a fraction of the image side.
  double min_size = 0.1;
  double max_size = 0.9;
  Placement placement = Placement::HierarchyAligned;
  HierarchyScheme scheme = HierarchyScheme::Overlapped;
  int min_depth = 1;
  int max_depth = 3;
  double noise = 0.2;
  double foreground = 0.8;
  std::string label = "object";
  std::uint64_t seed = 1;

  // Throws ConfigError.
  void validate() const;
};

// Filled rectangles of foreground intensity over uniform background noise,
// quantised to 8 bits. A pixel is foreground when its centre lies in a box.
// Uniform mode draws integer widths/heights from the size range and a
// uniform position. Aligned mode draws a depth uniformly from
// [min_depth, max_depth] and then a node of that depth whose side fraction lies
// in the size range. Throws InfeasiblePlacement when nothing fits.
std::vector<Scene> generate(const SyntheticSpec& spec);

struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path annotation;
};

struct DatasetManifest {
  std::string split = "train";
  std::vector<ManifestEntry> entries;
};

// CSV with header "split,image,annotation"; relative paths resolve against
// the manifest's directory.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// VOC-layout annotation. Box corners are written 1-based inclusive:
// xmin = x0 + 1, xmax = x1.
std::string voc_annotation_xml(const std::string& filename, int width, int height, int depth,
                               const std::vector<GroundTruth>& objects);

// Objects of class `class_name` from one VOC annotation, converted to
// (xmin - 1, ymin - 1, xmax, ymax). Difficult objects are skipped.
// Throws ParseError naming the file.
std::vector<GroundTruth> parse_voc_annotation(const std::filesystem::path& path, const std::string& class_name,
                                              int* width = nullptr, int* height = nullptr);

// Scenes with at least one object of `class_name`; the others are dropped.
// Throws MissingImage / ParseError.
std::vector<Scene> load_voc_annotations(const DatasetManifest& manifest, const std::string& class_name);

// Writes images/<id>.pgm|ppm, annotations/<id>.xml and manifest.csv under
// `dir`; returns the manifest path.
std::filesystem::path write_dataset(const std::vector<Scene>& scenes, const std::filesystem::path& dir,
                                    const std::string& split = "train");

}  // namespace hodet
