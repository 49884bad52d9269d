#include "cardnet/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "cardnet/error.hpp"

namespace cardnet {
namespace {

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Corrupt-data warnings (level -1) abort the decode; trace messages are dropped.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);
}

// Only trivially destructible locals live across setjmp here.
bool decode_jpeg_raw(const std::uint8_t* data, std::size_t size, Image& out, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  err.pub.emit_message = jpeg_emit_message;
  err.message[0] = '\0';
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const int w = static_cast<int>(cinfo.output_width), h = static_cast<int>(cinfo.output_height);
  out.height = h;
  out.width = w;
  out.pixels.assign(std::size_t(3) * h * w, 0);
  unsigned char row[3 * 65536];
  if (w > 65536) {
    std::strncpy(message, "image too wide", JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  const std::size_t plane = std::size_t(h) * w;
  while (cinfo.output_scanline < cinfo.output_height) {
    const int y = static_cast<int>(cinfo.output_scanline);
    JSAMPROW rows[1] = {row};
    jpeg_read_scanlines(&cinfo, rows, 1);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.pixels[c * plane + std::size_t(y) * w + x] = row[3 * x + c];
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw DecodeError(std::string("png: ") + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> interleaved(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, interleaved.data(), 0, nullptr)) {
    png_image_free(&img);
    throw DecodeError(std::string("png: ") + img.message);
  }
  Image out(static_cast<int>(img.height), static_cast<int>(img.width));
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = interleaved[(std::size_t(y) * out.width + x) * 3 + c];
  return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
      if (v > 1'000'000) throw DecodeError("ppm: header value too large");
    }
    if (!any) throw DecodeError("ppm: malformed header");
    return v;
  };
  long w = next_int(), h = next_int(), maxval = next_int();
  if (maxval != 255) throw DecodeError("ppm: only 8-bit images are supported");
  ++pos;  // single whitespace before raster
  if (w <= 0 || h <= 0 || bytes.size() < pos + std::size_t(3 * w * h)) throw DecodeError("ppm: truncated raster");
  Image out(static_cast<int>(h), static_cast<int>(w));
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = bytes[pos + (std::size_t(y) * w + x) * 3 + c];
  return out;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Overlap weights of each source index with each destination cell.
struct AreaTap {
  int first = 0;
  std::vector<double> weights;
};

std::vector<AreaTap> area_taps(int src, int dst) {
  const double scale = double(src) / dst;
  std::vector<AreaTap> taps(dst);
  for (int d = 0; d < dst; ++d) {
    const double lo = d * scale, hi = (d + 1) * scale;
    int first = static_cast<int>(std::floor(lo));
    int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
    taps[d].first = first;
    for (int s = first; s <= last; ++s) {
      double overlap = std::min(hi, double(s + 1)) - std::max(lo, double(s));
      taps[d].weights.push_back(std::max(0.0, overlap) / scale);
    }
  }
  return taps;
}

Image resize_area(const Image& src, Dims target) {
  auto ty = area_taps(src.height, target.height);
  auto tx = area_taps(src.width, target.width);
  Image out(target.height, target.width);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < target.height; ++y)
      for (int x = 0; x < target.width; ++x) {
        double acc = 0;
        for (std::size_t i = 0; i < ty[y].weights.size(); ++i)
          for (std::size_t j = 0; j < tx[x].weights.size(); ++j)
            acc += ty[y].weights[i] * tx[x].weights[j] * src.at(c, ty[y].first + int(i), tx[x].first + int(j));
        out.at(c, y, x) = to_byte(acc);
      }
  return out;
}

Image resize_bilinear(const Image& src, Dims target) {
  Image out(target.height, target.width);
  const double sy = double(src.height) / target.height, sx = double(src.width) / target.width;
  for (int y = 0; y < target.height; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(src.height - 1));
    int y0 = static_cast<int>(fy), y1 = std::min(y0 + 1, src.height - 1);
    double wy = fy - y0;
    for (int x = 0; x < target.width; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(src.width - 1));
      int x0 = static_cast<int>(fx), x1 = std::min(x0 + 1, src.width - 1);
      double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        double top = src.at(c, y0, x0) * (1 - wx) + src.at(c, y0, x1) * wx;
        double bot = src.at(c, y1, x0) * (1 - wx) + src.at(c, y1, x1) * wx;
        out.at(c, y, x) = to_byte(top * (1 - wy) + bot * wy);
      }
    }
  }
  return out;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    Image out;
    char message[JMSG_LENGTH_MAX] = {};
    if (!decode_jpeg_raw(bytes.data(), bytes.size(), out, message))
      throw DecodeError(std::string("jpeg: ") + message);
    return out;
  }
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  throw DecodeError("unrecognized image format");
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

Image crop(const Image& src, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || height <= 0 || width <= 0 || top + height > src.height || left + width > src.width)
    throw InputError("crop window outside image");
  Image out(height, width);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < height; ++y)
      std::copy_n(&src.pixels[c * src.plane() + std::size_t(top + y) * src.width + left], width,
                  &out.pixels[c * out.plane() + std::size_t(y) * width]);
  return out;
}

Image resize(const Image& src, Dims target) {
  if (target.height <= 0 || target.width <= 0) throw ConfigError("target dimensions must be positive");
  if (src.dims() == target) return src;
  if (src.height >= target.height && src.width >= target.width) return resize_area(src, target);
  return resize_bilinear(src, target);
}

Image fit_to(const Image& src, Dims target) {
  // Largest window with the target aspect ratio, centered.
  int ch = src.height, cw = src.width;
  if (std::int64_t(src.width) * target.height > std::int64_t(src.height) * target.width)
    cw = static_cast<int>(std::lround(double(src.height) * target.width / target.height));
  else
    ch = static_cast<int>(std::lround(double(src.width) * target.height / target.width));
  cw = std::clamp(cw, 1, src.width);
  ch = std::clamp(ch, 1, src.height);
  Image window = (ch == src.height && cw == src.width) ? src
                                                       : crop(src, (src.height - ch) / 2, (src.width - cw) / 2, ch, cw);
  return resize(window, target);
}

Image decode_and_resize(std::span<const std::uint8_t> bytes, Dims target) {
  return fit_to(decode_image(bytes), target);
}

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality) {
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<unsigned char> row(std::size_t(3) * img.width);
  while (cinfo.next_scanline < cinfo.image_height) {
    const int y = static_cast<int>(cinfo.next_scanline);
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) row[3 * x + c] = img.at(c, y, x);
    JSAMPROW rows[1] = {row.data()};
    jpeg_write_scanlines(&cinfo, rows, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
  std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.pixels.size());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.push_back(img.at(c, y, x));
  return out;
}

void AugmentConfig::validate(Dims dims) const {
  if (crop_margin < 0 || max_displacement < 0) throw ConfigError("augmentation values must be non-negative");
  if (2 * crop_margin >= std::min(dims.height, dims.width))
    throw ConfigError("crop margin " + std::to_string(crop_margin) + " too large for " +
                      std::to_string(dims.height) + "x" + std::to_string(dims.width) + " images");
}

Image augment(const Image& src, std::uint64_t seed, const AugmentConfig& config) {
  config.validate(src.dims());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> offset(0, config.crop_margin);
  std::uniform_int_distribution<int> shift(-config.max_displacement, config.max_displacement);
  const int top = offset(rng), left = offset(rng);
  const int dy = shift(rng), dx = shift(rng);

  Image scaled = config.crop_margin == 0
                     ? src
                     : resize(crop(src, top, left, src.height - config.crop_margin, src.width - config.crop_margin),
                              src.dims());
  if (dx == 0 && dy == 0) return scaled;
  Image out(src.height, src.width);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x)
        out.at(c, y, x) = scaled.at(c, std::clamp(y - dy, 0, src.height - 1), std::clamp(x - dx, 0, src.width - 1));
  return out;
}

}  // namespace cardnet
