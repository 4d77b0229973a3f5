#ifndef SEBCOMM_AUGMENT_HPP_
#define SEBCOMM_AUGMENT_HPP_

#include <cstdint>
#include <vector>

#include "sebcomm/image.hpp"

namespace sebcomm {

struct AugmentOptions {
  // crop side as a fraction of the source's short side
  double scale_min = 0.5;
  double scale_max = 1.0;
  // requested output may exceed the source short side by at most this factor
  double max_upscale = 8.0;
};

// Bilinear resize with pixel-center mapping; equal sizes copy exactly.
Image resize_bilinear(const Image& src, int out_h, int out_w);

// Random resized square crops: sample a scale, crop, resize to (out_h,out_w).
// Deterministic given the seed.
std::vector<Image> augment(const Image& image, int count, int out_h, int out_w, uint64_t seed,
                           const AugmentOptions& opts = {});

}  // namespace sebcomm

#endif  // SEBCOMM_AUGMENT_HPP_
