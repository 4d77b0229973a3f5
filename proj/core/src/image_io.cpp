#include "sebcomm/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace sebcomm {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

Image load_png(const std::string& path, FILE* fp, const LoadOptions& opts) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IngestError("libpng init failed for " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IngestError("libpng info init failed for " + path);
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IngestError("corrupt PNG: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  if (opts.non_rgb == NonRgbPolicy::kReject && color_type != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IngestError("non-RGB PNG rejected by policy: " + path);
  }

  // normalize everything to 8-bit RGB
  png_set_strip_16(png);
  png_set_packing(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * static_cast<size_t>(h));
  row_ptrs.resize(static_cast<size_t>(h));
  for (int y = 0; y < h; ++y) row_ptrs[y] = buffer.data() + stride * static_cast<size_t>(y);
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(h, w);
  for (int y = 0; y < h; ++y) {
    const unsigned char* row = buffer.data() + stride * static_cast<size_t>(y);
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c)
        img.pixels.at(c, y, x) = static_cast<float>(row[3 * x + c]) / 255.0f;
    }
  }
  return img;
}

Image load_pnm(const std::string& path, FILE* fp, const LoadOptions& opts) {
  auto next_token = [&]() -> long {
    int c;
    // skip whitespace and comments
    for (;;) {
      c = std::fgetc(fp);
      if (c == '#') {
        while (c != '\n' && c != EOF) c = std::fgetc(fp);
      } else if (!std::isspace(c)) {
        break;
      }
    }
    long v = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
      v = v * 10 + (c - '0');
      any = true;
      c = std::fgetc(fp);
    }
    if (!any) throw IngestError("malformed PNM header: " + path);
    return v;
  };

  char m0 = static_cast<char>(std::fgetc(fp));
  char m1 = static_cast<char>(std::fgetc(fp));
  if (m0 != 'P' || (m1 != '5' && m1 != '6'))
    throw IngestError("unsupported PNM magic in " + path);
  const bool gray = (m1 == '5');
  if (gray && opts.non_rgb == NonRgbPolicy::kReject)
    throw IngestError("non-RGB PGM rejected by policy: " + path);

  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw IngestError("unsupported PNM geometry in " + path);

  const size_t samples = static_cast<size_t>(w) * static_cast<size_t>(h) * (gray ? 1 : 3);
  std::vector<unsigned char> buf(samples);
  if (std::fread(buf.data(), 1, samples, fp) != samples)
    throw IngestError("truncated PNM payload: " + path);

  Image img(static_cast<int>(h), static_cast<int>(w));
  const float scale = 1.0f / static_cast<float>(maxval);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (gray) {
        float v = buf[static_cast<size_t>(y) * w + x] * scale;
        for (int c = 0; c < 3; ++c) img.pixels.at(c, y, x) = v;
      } else {
        for (int c = 0; c < 3; ++c)
          img.pixels.at(c, y, x) = buf[(static_cast<size_t>(y) * w + x) * 3 + c] * scale;
      }
    }
  }
  return img;
}

}  // namespace

Image load_image(const std::string& path, const LoadOptions& opts) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IngestError("cannot open image file: " + path);

  unsigned char sig[8] = {0};
  size_t got = std::fread(sig, 1, sizeof(sig), fp.get());
  std::rewind(fp.get());
  if (got >= 8 && !png_sig_cmp(sig, 0, 8)) return load_png(path, fp.get(), opts);
  if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6'))
    return load_pnm(path, fp.get(), opts);
  throw IngestError("unrecognized image format: " + path);
}

ImageSet load_images(const std::vector<std::string>& paths, const LoadOptions& opts) {
  ImageSet set;
  set.images.reserve(paths.size());
  for (const std::string& p : paths) set.images.push_back(load_image(p, opts));
  return set;
}

void save_png_rgb8(const std::string& path, const std::vector<unsigned char>& rgb, int h, int w) {
  if (static_cast<size_t>(h) * w * 3 != rgb.size())
    throw ShapeError("save_png_rgb8: buffer size does not match dimensions");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IngestError("cannot open output file: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IngestError("libpng write init failed for " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IngestError("libpng write info init failed for " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IngestError("PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(rgb.data() + static_cast<size_t>(y) * w * 3);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_png(const std::string& path, const Image& image) {
  const int h = image.height();
  const int w = image.width();
  std::vector<unsigned char> rgb(static_cast<size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        float v = image.pixels.at(c, y, x);
        v = std::fmin(1.0f, std::fmax(0.0f, v));
        rgb[(static_cast<size_t>(y) * w + x) * 3 + c] =
            static_cast<unsigned char>(std::lround(v * 255.0f));
      }
    }
  }
  save_png_rgb8(path, rgb, h, w);
}

}  // namespace sebcomm
