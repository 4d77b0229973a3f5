#ifndef SEBCOMM_IMAGE_HPP_
#define SEBCOMM_IMAGE_HPP_

#include <vector>

#include "sebcomm/tensor.hpp"

namespace sebcomm {

// RGB image, pixels [3,H,W] as float in [0,1].
struct Image {
  Tensor pixels;

  Image() = default;
  explicit Image(int h, int w) : pixels({3, h, w}) {}

  int channels() const { return pixels.ndim() == 3 ? pixels.dim(0) : 0; }
  int height() const { return pixels.ndim() == 3 ? pixels.dim(1) : 0; }
  int width() const { return pixels.ndim() == 3 ? pixels.dim(2) : 0; }
};

// Ordered image collection. subset_labels, when non-empty, holds a 0-based
// subset index per image covering {0..subset_count-1}.
struct ImageSet {
  std::vector<Image> images;
  std::vector<int> subset_labels;
  int subset_count = 0;

  size_t size() const { return images.size(); }
  bool has_labels() const { return !subset_labels.empty(); }
};

struct PadInfo {
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;
};

// Row-major grid of patches cut from one image. Patch ordering is stable
// across the whole pipeline; usage maps index into this order.
struct PatchGrid {
  std::vector<Tensor> patches;  // each [C, patch_h, patch_w]
  int rows = 0;
  int cols = 0;
  int patch_h = 0;
  int patch_w = 0;
  int channels = 0;
  PadInfo pad;

  int patch_count() const { return rows * cols; }
};

// Reflected (mirror-about-edge, no repeat) index fold; n==1 degenerates to
// replication. Supports arbitrary padding widths.
int reflect_index(int i, int n);

// Split an image into ceil(H/h) x ceil(W/w) patches, reflect-padding the
// bottom/right edges to multiples of the patch size.
PatchGrid patchify(const Image& image, int h, int w);

// Exact inverse of patchify including pad removal.
Image depatchify(const PatchGrid& grid);

}  // namespace sebcomm

#endif  // SEBCOMM_IMAGE_HPP_
