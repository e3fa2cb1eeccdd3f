#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hodet/geometry.hpp"

namespace hodet {

// Row-major, channel-interleaved intensities in [0,1].
class ImageRaster {
 public:
  static constexpr int kMinSide = 16;

  ImageRaster(int width, int height, int channels, std::vector<float> data);
  // Constant image.
  ImageRaster(int width, int height, int channels, float value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::span<const float> data() const { return data_; }

  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  Box bounds() const { return Box(0.0, 0.0, width_, height_); }

  friend bool operator==(const ImageRaster&, const ImageRaster&) = default;

 private:
  int width_;
  int height_;
  int channels_;
  std::vector<float> data_;
};

// Builds a raster from 8-bit samples, normalising by maxval.
ImageRaster raster_from_bytes(int width, int height, int channels, std::span<const std::uint8_t> bytes,
                              int maxval = 255);

// Portable graymap/pixmap (binary P5 / P6, maxval <= 255).
ImageRaster read_pnm(const std::filesystem::path& path);
ImageRaster decode_pnm(std::span<const std::uint8_t> bytes);

// Writes P5 for one channel and P6 for three. Values are quantised to
// round(v * 255); rasters whose samples are multiples of 1/255 round-trip exactly.
void write_pnm(const std::filesystem::path& path, const ImageRaster& image);
std::vector<std::uint8_t> encode_pnm(const ImageRaster& image);

}  // namespace hodet
