#include "hodet/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "hodet/errors.hpp"

namespace hodet {

namespace {

void validate_dims(int width, int height, int channels) {
  if (width < ImageRaster::kMinSide || height < ImageRaster::kMinSide) {
    throw InvalidImage("image must be at least 16x16, got " + std::to_string(width) + "x" +
                       std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw InvalidImage("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw FormatError("malformed PNM header");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1'000'000) throw FormatError("PNM header value out of range");
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw FormatError("malformed PNM header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

ImageRaster::ImageRaster(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  validate_dims(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw InvalidImage("image data length does not match dimensions");
  }
  for (float v : data_) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) throw InvalidImage("image values must lie in [0,1]");
  }
}

ImageRaster::ImageRaster(int width, int height, int channels, float value)
    : ImageRaster(width, height, channels,
                  std::vector<float>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) *
                                         std::max(channels, 0),
                                     value)) {}

ImageRaster raster_from_bytes(int width, int height, int channels, std::span<const std::uint8_t> bytes,
                              int maxval) {
  std::vector<float> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] > maxval) throw FormatError("sample exceeds maxval");
    data[i] = static_cast<float>(bytes[i]) / static_cast<float>(maxval);
  }
  return ImageRaster(width, height, channels, std::move(data));
}

ImageRaster decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("not a binary PNM (P5/P6) image");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  PnmHeaderReader header(bytes);
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (maxval < 1 || maxval > 255) throw FormatError("only 8-bit PNM images are supported");
  const std::size_t offset = header.raster_offset();
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - offset < expected) throw FormatError("truncated PNM raster");
  return raster_from_bytes(width, height, channels, bytes.subspan(offset, expected), maxval);
}

ImageRaster read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingImage("cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_pnm(bytes);
  } catch (const DataError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_pnm(const ImageRaster& image) {
  const std::string header = std::string(image.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.data().size());
  for (float v : image.data()) out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
  return out;
}

void write_pnm(const std::filesystem::path& path, const ImageRaster& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image " + path.string());
  const auto bytes = encode_pnm(image);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing image " + path.string());
}

}  // namespace hodet
