#include "sebcomm/image.hpp"

#include <string>

namespace sebcomm {

int reflect_index(int i, int n) {
  if (n <= 0) throw ParameterError("reflect_index: empty extent");
  if (n == 1) return 0;
  int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

PatchGrid patchify(const Image& image, int h, int w) {
  if (h <= 0 || w <= 0)
    throw ParameterError("patchify: patch size must be positive, got " + std::to_string(h) +
                         "x" + std::to_string(w));
  const int C = image.channels();
  const int H = image.height();
  const int W = image.width();
  if (C <= 0 || H <= 0 || W <= 0) throw ShapeError("patchify: empty image");

  PatchGrid grid;
  grid.rows = (H + h - 1) / h;
  grid.cols = (W + w - 1) / w;
  grid.patch_h = h;
  grid.patch_w = w;
  grid.channels = C;
  grid.pad.bottom = grid.rows * h - H;
  grid.pad.right = grid.cols * w - W;

  grid.patches.reserve(static_cast<size_t>(grid.rows) * grid.cols);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      Tensor patch({C, h, w});
      for (int ch = 0; ch < C; ++ch) {
        for (int y = 0; y < h; ++y) {
          int sy = reflect_index(r * h + y, H);
          for (int x = 0; x < w; ++x) {
            int sx = reflect_index(c * w + x, W);
            patch.at(ch, y, x) = image.pixels.at(ch, sy, sx);
          }
        }
      }
      grid.patches.push_back(std::move(patch));
    }
  }
  return grid;
}

Image depatchify(const PatchGrid& grid) {
  if (grid.rows <= 0 || grid.cols <= 0)
    throw StructuralError("depatchify: non-positive grid dimensions");
  if (static_cast<int>(grid.patches.size()) != grid.rows * grid.cols)
    throw StructuralError("depatchify: patch count " + std::to_string(grid.patches.size()) +
                          " does not match grid " + std::to_string(grid.rows) + "x" +
                          std::to_string(grid.cols));
  if (grid.patch_h <= 0 || grid.patch_w <= 0)
    throw StructuralError("depatchify: non-positive patch size");
  if (grid.pad.top < 0 || grid.pad.left < 0 || grid.pad.bottom < 0 || grid.pad.right < 0)
    throw StructuralError("depatchify: negative padding");

  const int C = grid.channels;
  for (const Tensor& p : grid.patches) {
    if (p.ndim() != 3 || p.dim(0) != C || p.dim(1) != grid.patch_h || p.dim(2) != grid.patch_w)
      throw StructuralError("depatchify: inconsistent patch shape " + p.shape_str());
  }

  const int padded_h = grid.rows * grid.patch_h;
  const int padded_w = grid.cols * grid.patch_w;
  const int H = padded_h - grid.pad.top - grid.pad.bottom;
  const int W = padded_w - grid.pad.left - grid.pad.right;
  if (H <= 0 || W <= 0) throw StructuralError("depatchify: padding exceeds image size");

  Image out;
  out.pixels = Tensor({C, H, W});
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Tensor& patch = grid.patches[static_cast<size_t>(r) * grid.cols + c];
      for (int ch = 0; ch < C; ++ch) {
        for (int y = 0; y < grid.patch_h; ++y) {
          int dy = r * grid.patch_h + y - grid.pad.top;
          if (dy < 0 || dy >= H) continue;
          for (int x = 0; x < grid.patch_w; ++x) {
            int dx = c * grid.patch_w + x - grid.pad.left;
            if (dx < 0 || dx >= W) continue;
            out.pixels.at(ch, dy, dx) = patch.at(ch, y, x);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace sebcomm
