#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kerbside {

// Row-major, interleaved 8-bit samples; channels is 1 (gray) or 3 (RGB).
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, std::uint8_t fill = 0);
  Image(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

enum class ImageFormat { Pgm, Png };

// Detects the format from the file's magic bytes: binary PGM (P5), PPM (P6) or PNG.
Image load_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);

// PGM for gray, PPM for RGB.
std::vector<std::uint8_t> encode_pnm(const Image& img);
std::vector<std::uint8_t> encode_png(const Image& img);
void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format);

// Content-type for the encoded bytes ("image/png", "image/x-portable-graymap", ...).
std::string sniff_content_type(std::span<const std::uint8_t> bytes);

// Rec. 601 luma: round(0.299 R + 0.587 G + 0.114 B). Gray input is returned as-is.
Image to_gray(const Image& img);

// Keeps the top `width` rows of a portrait image. Throws NotPortrait.
Image crop_to_square(const Image& img);

// Square -> target x target, bilinear with half-pixel centres:
// src = (dst + 0.5) * (in / out) - 0.5, clamped to the border, rounded half up.
// Throws InvalidTarget for target < 1.
Image resize_bilinear(const Image& img, int target);

inline constexpr int kModelInputSize = 224;

// crop_to_square -> resize_bilinear(224) -> to_gray.
Image preprocess(const Image& img, int target = kModelInputSize);

}  // namespace kerbside
