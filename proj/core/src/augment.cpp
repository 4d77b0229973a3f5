#include "sebcomm/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sebcomm/rng.hpp"

namespace sebcomm {

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  const int C = src.channels();
  const int H = src.height();
  const int W = src.width();
  if (out_h <= 0 || out_w <= 0) throw ParameterError("resize_bilinear: non-positive output size");
  if (out_h == H && out_w == W) return src;  // bit-exact identity

  Image dst(out_h, out_w);
  const double sy_scale = static_cast<double>(H) / out_h;
  const double sx_scale = static_cast<double>(W) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double sy = (y + 0.5) * sy_scale - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(H - 1));
    int y0 = static_cast<int>(std::floor(sy));
    int y1 = std::min(y0 + 1, H - 1);
    double fy = sy - y0;
    for (int x = 0; x < out_w; ++x) {
      double sx = (x + 0.5) * sx_scale - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(W - 1));
      int x0 = static_cast<int>(std::floor(sx));
      int x1 = std::min(x0 + 1, W - 1);
      double fx = sx - x0;
      for (int c = 0; c < C; ++c) {
        double v00 = src.pixels.at(c, y0, x0);
        double v01 = src.pixels.at(c, y0, x1);
        double v10 = src.pixels.at(c, y1, x0);
        double v11 = src.pixels.at(c, y1, x1);
        double top = v00 + fx * (v01 - v00);
        double bot = v10 + fx * (v11 - v10);
        dst.pixels.at(c, y, x) = static_cast<float>(top + fy * (bot - top));
      }
    }
  }
  return dst;
}

std::vector<Image> augment(const Image& image, int count, int out_h, int out_w, uint64_t seed,
                           const AugmentOptions& opts) {
  if (count <= 0) throw ParameterError("augment: count must be positive");
  if (out_h <= 0 || out_w <= 0) throw ParameterError("augment: non-positive output size");
  const int H = image.height();
  const int W = image.width();
  const int short_side = std::min(H, W);
  if (short_side <= 0) throw ShapeError("augment: empty image");
  if (out_h > short_side * opts.max_upscale || out_w > short_side * opts.max_upscale)
    throw ParameterError("augment: requested size " + std::to_string(out_h) + "x" +
                         std::to_string(out_w) + " exceeds the resize ceiling for a " +
                         std::to_string(H) + "x" + std::to_string(W) + " source");
  if (opts.scale_min <= 0.0 || opts.scale_max < opts.scale_min)
    throw ParameterError("augment: invalid scale range");

  Rng rng(seed);
  std::vector<Image> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    double s = opts.scale_min == opts.scale_max ? opts.scale_min
                                                : rng.uniform(opts.scale_min, opts.scale_max);
    int side = std::clamp(static_cast<int>(std::lround(s * short_side)), 1, short_side);
    int top = side < H ? static_cast<int>(rng.uniform_int(H - side + 1)) : 0;
    int left = side < W ? static_cast<int>(rng.uniform_int(W - side + 1)) : 0;

    if (side == H && side == W && out_h == H && out_w == W) {
      out.push_back(image);  // identity crop
      continue;
    }
    Image crop(side, side);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
          crop.pixels.at(c, y, x) = image.pixels.at(c, top + y, left + x);
    out.push_back(resize_bilinear(crop, out_h, out_w));
  }
  return out;
}

}  // namespace sebcomm
