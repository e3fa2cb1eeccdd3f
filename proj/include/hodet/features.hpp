#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hodet/geometry.hpp"
#include "hodet/image.hpp"

namespace hodet {

// G x G x C region descriptor. Flattened row-major over the grid with the
// channel innermost: index = (row * G + col) * C + channel.
struct Descriptor {
  int grid = 0;
  int channels = 0;
  std::vector<float> values;

  float at(int row, int col, int c = 0) const {
    return values[(static_cast<std::size_t>(row) * grid + col) * channels + c];
  }
  friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

// Average-pooled raster: each cell is the mean of the image pixels in its
// stride x stride block (partial blocks at the right/bottom edge average the
// pixels that exist).
struct FeatureMap {
  int stride = 0;
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> values;

  float at(int x, int y, int c = 0) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// Two-level pyramid computed once per image. `shallow` plays the role of the
// finer map, `deep` the coarser one.
struct FeatureMapSet {
  FeatureMap shallow;
  FeatureMap deep;
  int image_width = 0;
  int image_height = 0;
};

struct FeatureParams {
  int grid = 7;
  int shallow_stride = 8;
  int deep_stride = 16;
};

enum class ExtractorKind { Zoom, Crop };

std::string_view to_string(ExtractorKind kind);
ExtractorKind parse_extractor(std::string_view name);

// Clips `region` to the image bounds; throws DegenerateRegion when nothing is left.
Box clip_to_image(const Box& region, int width, int height);

// Re-pools the region from full-resolution pixels. A pixel belongs to a cell
// when its centre lies in the cell (half-open on the right/bottom). A cell
// that contains no pixel centre takes the pixel under the cell centre.
Descriptor extract_zoom(const ImageRaster& image, const Box& region, int grid);

FeatureMapSet precompute_maps(const ImageRaster& image, int shallow_stride, int deep_stride);

// Crops the map cells overlapped by the region and resamples them to
// grid x grid with corner-aligned bilinear interpolation. The deep map is used
// when the region's shorter side is at least grid * deep_stride.
Descriptor extract_crop(const FeatureMapSet& maps, const Box& region, int grid);

// Number of map cells the crop extractor draws from for this region.
int effective_source_cells(const FeatureMapSet& maps, const Box& region, int grid);

// Binds an extractor choice to one image. For the crop extractor the pyramid
// is computed on construction.
class RegionDescriber {
 public:
  RegionDescriber(const ImageRaster& image, ExtractorKind kind, FeatureParams params);

  Descriptor describe(const Box& region) const;
  std::size_t descriptor_size() const;
  ExtractorKind kind() const { return kind_; }

 private:
  const ImageRaster* image_;
  ExtractorKind kind_;
  FeatureParams params_;
  std::optional<FeatureMapSet> maps_;
};

}  // namespace hodet
