#include "hodet/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hodet/errors.hpp"

namespace hodet {

namespace {

FeatureMap pool_map(const ImageRaster& image, int stride) {
  FeatureMap map;
  map.stride = stride;
  map.channels = image.channels();
  map.width = (image.width() + stride - 1) / stride;
  map.height = (image.height() + stride - 1) / stride;
  map.values.assign(static_cast<std::size_t>(map.width) * map.height * map.channels, 0.0f);

  for (int my = 0; my < map.height; ++my) {
    for (int mx = 0; mx < map.width; ++mx) {
      const int px0 = mx * stride, py0 = my * stride;
      const int px1 = std::min(px0 + stride, image.width());
      const int py1 = std::min(py0 + stride, image.height());
      const double count = static_cast<double>(px1 - px0) * (py1 - py0);
      for (int c = 0; c < map.channels; ++c) {
        double sum = 0.0;
        for (int y = py0; y < py1; ++y) {
          for (int x = px0; x < px1; ++x) sum += image.at(x, y, c);
        }
        map.values[(static_cast<std::size_t>(my) * map.width + mx) * map.channels + c] =
            static_cast<float>(sum / count);
      }
    }
  }
  return map;
}

struct CellRange {
  int first;
  int count;
};

// Map cells [first, first + count) overlapping [lo, hi) with positive length.
CellRange overlapped_cells(double lo, double hi, int stride, int limit) {
  int first = static_cast<int>(std::floor(lo / stride));
  int last = static_cast<int>(std::ceil(hi / stride)) - 1;
  first = std::clamp(first, 0, limit - 1);
  last = std::clamp(last, first, limit - 1);
  return {first, last - first + 1};
}

const FeatureMap& select_map(const FeatureMapSet& maps, const Box& clipped, int grid) {
  return clipped.shorter_side() >= static_cast<double>(grid) * maps.deep.stride ? maps.deep : maps.shallow;
}

// Cell index of a pixel centre along one axis, or -1 when outside [lo, hi).
int cell_of(double centre, double lo, double hi, int grid) {
  if (centre < lo || centre >= hi) return -1;
  const int idx = static_cast<int>(std::floor((centre - lo) * grid / (hi - lo)));
  return std::min(idx, grid - 1);
}

}  // namespace

std::string_view to_string(ExtractorKind kind) { return kind == ExtractorKind::Zoom ? "zoom" : "crop"; }

ExtractorKind parse_extractor(std::string_view name) {
  if (name == "zoom") return ExtractorKind::Zoom;
  if (name == "crop") return ExtractorKind::Crop;
  throw ConfigError("unknown extractor '" + std::string(name) + "'");
}

Box clip_to_image(const Box& region, int width, int height) {
  const double x0 = std::max(region.x0(), 0.0), y0 = std::max(region.y0(), 0.0);
  const double x1 = std::min(region.x1(), static_cast<double>(width));
  const double y1 = std::min(region.y1(), static_cast<double>(height));
  if (!(x0 < x1) || !(y0 < y1)) throw DegenerateRegion("region does not overlap the image");
  return Box(x0, y0, x1, y1);
}

Descriptor extract_zoom(const ImageRaster& image, const Box& region, int grid) {
  const Box r = clip_to_image(region, image.width(), image.height());
  const int channels = image.channels();
  const std::size_t cells = static_cast<std::size_t>(grid) * grid;
  std::vector<double> sums(cells * channels, 0.0);
  std::vector<int> counts(cells, 0);

  const int px_lo = std::max(0, static_cast<int>(std::floor(r.x0() - 0.5)));
  const int px_hi = std::min(image.width() - 1, static_cast<int>(std::ceil(r.x1())));
  const int py_lo = std::max(0, static_cast<int>(std::floor(r.y0() - 0.5)));
  const int py_hi = std::min(image.height() - 1, static_cast<int>(std::ceil(r.y1())));

  std::vector<int> col_cell(static_cast<std::size_t>(px_hi - px_lo + 1));
  for (int x = px_lo; x <= px_hi; ++x) col_cell[x - px_lo] = cell_of(x + 0.5, r.x0(), r.x1(), grid);

  for (int y = py_lo; y <= py_hi; ++y) {
    const int row = cell_of(y + 0.5, r.y0(), r.y1(), grid);
    if (row < 0) continue;
    for (int x = px_lo; x <= px_hi; ++x) {
      const int col = col_cell[x - px_lo];
      if (col < 0) continue;
      const std::size_t cell = static_cast<std::size_t>(row) * grid + col;
      ++counts[cell];
      for (int c = 0; c < channels; ++c) sums[cell * channels + c] += image.at(x, y, c);
    }
  }

  Descriptor d{grid, channels, std::vector<float>(cells * channels)};
  const double cw = r.width() / grid, ch = r.height() / grid;
  for (int row = 0; row < grid; ++row) {
    for (int col = 0; col < grid; ++col) {
      const std::size_t cell = static_cast<std::size_t>(row) * grid + col;
      if (counts[cell] > 0) {
        for (int c = 0; c < channels; ++c) {
          d.values[cell * channels + c] = static_cast<float>(sums[cell * channels + c] / counts[cell]);
        }
      } else {
        const int x = std::clamp(static_cast<int>(std::floor(r.x0() + (col + 0.5) * cw)), 0, image.width() - 1);
        const int y = std::clamp(static_cast<int>(std::floor(r.y0() + (row + 0.5) * ch)), 0, image.height() - 1);
        for (int c = 0; c < channels; ++c) d.values[cell * channels + c] = image.at(x, y, c);
      }
    }
  }
  return d;
}

FeatureMapSet precompute_maps(const ImageRaster& image, int shallow_stride, int deep_stride) {
  if (shallow_stride < 1 || deep_stride <= shallow_stride) {
    throw ConfigError("strides must satisfy 1 <= shallow < deep");
  }
  return {pool_map(image, shallow_stride), pool_map(image, deep_stride), image.width(), image.height()};
}

Descriptor extract_crop(const FeatureMapSet& maps, const Box& region, int grid) {
  const Box r = clip_to_image(region, maps.image_width, maps.image_height);
  const FeatureMap& map = select_map(maps, r, grid);
  const CellRange cols = overlapped_cells(r.x0(), r.x1(), map.stride, map.width);
  const CellRange rows = overlapped_cells(r.y0(), r.y1(), map.stride, map.height);
  const int channels = map.channels;

  Descriptor d{grid, channels, std::vector<float>(static_cast<std::size_t>(grid) * grid * channels)};
  auto source_coord = [grid](int i, int n) {
    return (n == 1 || grid == 1) ? 0.0 : static_cast<double>(i) * (n - 1) / (grid - 1);
  };
  for (int row = 0; row < grid; ++row) {
    const double sy = source_coord(row, rows.count);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, rows.count - 1);
    const double fy = sy - y0;
    for (int col = 0; col < grid; ++col) {
      const double sx = source_coord(col, cols.count);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, cols.count - 1);
      const double fx = sx - x0;
      for (int c = 0; c < channels; ++c) {
        auto v = [&](int x, int y) { return static_cast<double>(map.at(cols.first + x, rows.first + y, c)); };
        double value;
        if (fx == 0.0 && fy == 0.0) {
          value = v(x0, y0);
        } else {
          value = (1 - fy) * ((1 - fx) * v(x0, y0) + fx * v(x1, y0)) + fy * ((1 - fx) * v(x0, y1) + fx * v(x1, y1));
        }
        d.values[(static_cast<std::size_t>(row) * grid + col) * channels + c] = static_cast<float>(value);
      }
    }
  }
  return d;
}

int effective_source_cells(const FeatureMapSet& maps, const Box& region, int grid) {
  const Box r = clip_to_image(region, maps.image_width, maps.image_height);
  const FeatureMap& map = select_map(maps, r, grid);
  return overlapped_cells(r.x0(), r.x1(), map.stride, map.width).count *
         overlapped_cells(r.y0(), r.y1(), map.stride, map.height).count;
}

RegionDescriber::RegionDescriber(const ImageRaster& image, ExtractorKind kind, FeatureParams params)
    : image_(&image), kind_(kind), params_(params) {
  if (params_.grid < 1) throw ConfigError("grid size must be positive");
  if (kind_ == ExtractorKind::Crop) maps_ = precompute_maps(image, params_.shallow_stride, params_.deep_stride);
}

Descriptor RegionDescriber::describe(const Box& region) const {
  if (kind_ == ExtractorKind::Crop) return extract_crop(*maps_, region, params_.grid);
  return extract_zoom(*image_, region, params_.grid);
}

std::size_t RegionDescriber::descriptor_size() const {
  return static_cast<std::size_t>(params_.grid) * params_.grid * image_->channels();
}

}  // namespace hodet
