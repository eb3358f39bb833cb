#include "kerbside/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"

namespace kerbside {

Image::Image(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw Error(ErrorCode::InvalidArgument, "invalid image geometry");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw Error(ErrorCode::InvalidArgument, "invalid image geometry");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorCode::InvalidArgument, "pixel buffer does not match width*height*channels");
  }
}

namespace {

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

Image decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  const int channels = bytes[1] == '5' ? 1 : 3;
  auto next_int = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
      if (v > (1L << 24)) throw Error(ErrorCode::Parse, "PNM header value too large");
    }
    if (!any) throw Error(ErrorCode::Parse, "malformed PNM header");
    return v;
  };
  const long width = next_int();
  const long height = next_int();
  const long maxval = next_int();
  if (maxval != 255) throw Error(ErrorCode::Parse, "only 8-bit PNM (maxval 255) is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::Parse, "malformed PNM header");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - pos < n) throw Error(ErrorCode::Parse, "truncated PNM data");
  std::vector<std::uint8_t> px(bytes.begin() + pos, bytes.begin() + pos + n);
  return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(px));
}

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_span(png_structp png, png_bytep out, png_size_t length) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->bytes.size() - st->pos < length) png_error(png, "truncated PNG");
  std::memcpy(out, st->bytes.data() + st->pos, length);
  st->pos += length;
}

void png_write_vec(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::Internal, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  PngReadState state{bytes, 0};
  // Locals touched after setjmp must not live in registers.
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  volatile int width = 0, height = 0, channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Parse, "invalid PNG data");
  }
  png_set_read_fn(png, &state, png_read_span);
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  pixels.resize(static_cast<std::size_t>(width) * height * channels);
  rows.resize(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (channels != 1 && channels != 3) throw Error(ErrorCode::Parse, "unsupported PNG layout");
  return Image(width, height, channels, std::move(pixels));
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes);
  }
  throw Error(ErrorCode::Parse, "unsupported image format (expected PNG, P5 or P6)");
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open image '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_pnm(const Image& img) {
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::Internal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Internal, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_write_vec, png_flush_noop);
  png_set_IHDR(png, info, img.width(), img.height(), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
  for (int y = 0; y < img.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(img.pixels().data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format) {
  const auto bytes = format == ImageFormat::Png ? encode_png(img) : encode_pnm(img);
  csv::write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string sniff_content_type(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return "image/png";
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return "image/x-portable-graymap";
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return "image/x-portable-pixmap";
  return "application/octet-stream";
}

Image to_gray(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double luma = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                          0.114 * img.at(x, y, 2);
      out.at(x, y) = static_cast<std::uint8_t>(std::min(255.0, std::floor(luma + 0.5)));
    }
  }
  return out;
}

Image crop_to_square(const Image& img) {
  if (img.height() < img.width()) {
    throw Error(ErrorCode::NotPortrait, "crop_to_square needs height >= width, got " +
                                            std::to_string(img.width()) + "x" +
                                            std::to_string(img.height()));
  }
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.width() * img.channels();
  std::vector<std::uint8_t> px(img.pixels().begin(), img.pixels().begin() + n);
  return Image(img.width(), img.width(), img.channels(), std::move(px));
}

Image resize_bilinear(const Image& img, int target) {
  if (target < 1) {
    throw Error(ErrorCode::InvalidTarget, "resize target must be >= 1, got " + std::to_string(target));
  }
  if (img.width() != img.height() || img.width() < 1) {
    throw Error(ErrorCode::InvalidArgument, "resize_bilinear expects a non-empty square image");
  }
  const int n = img.width();
  const int ch = img.channels();
  const double scale = static_cast<double>(n) / target;

  struct Tap {
    int lo, hi;
    double frac;
  };
  std::vector<Tap> taps(target);
  for (int d = 0; d < target; ++d) {
    const double src = std::clamp((d + 0.5) * scale - 0.5, 0.0, static_cast<double>(n - 1));
    const int lo = static_cast<int>(std::floor(src));
    taps[d] = {lo, std::min(lo + 1, n - 1), src - lo};
  }

  Image out(target, target, ch);
  for (int y = 0; y < target; ++y) {
    const Tap& ty = taps[y];
    for (int x = 0; x < target; ++x) {
      const Tap& tx = taps[x];
      for (int c = 0; c < ch; ++c) {
        const double top = img.at(tx.lo, ty.lo, c) * (1.0 - tx.frac) + img.at(tx.hi, ty.lo, c) * tx.frac;
        const double bottom =
            img.at(tx.lo, ty.hi, c) * (1.0 - tx.frac) + img.at(tx.hi, ty.hi, c) * tx.frac;
        const double v = top * (1.0 - ty.frac) + bottom * ty.frac;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

Image preprocess(const Image& img, int target) {
  return to_gray(resize_bilinear(crop_to_square(img), target));
}

}  // namespace kerbside
