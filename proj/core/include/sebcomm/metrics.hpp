#ifndef SEBCOMM_METRICS_HPP_
#define SEBCOMM_METRICS_HPP_

#include "sebcomm/image.hpp"

namespace sebcomm {

double mse(const Image& a, const Image& b);

// 10 log10(1/MSE) against peak 1.0; identical images report +inf
double psnr(const Image& a, const Image& b);

struct MsSsimResult {
  double score = 0.0;
  int scales_used = 0;
  bool reduced = false;  // true when the image could not support 5 scales
};

// Multi-scale structural similarity, 5 dyadic scales with the standard
// weights, 11x11 Gaussian window (sigma 1.5), valid windows only, scores
// averaged over channels. Images too small for 5 scales fall back to the
// feasible prefix with renormalized weights and a warning on stderr.
MsSsimResult ms_ssim_detail(const Image& a, const Image& b);
double ms_ssim(const Image& a, const Image& b);

}  // namespace sebcomm

#endif  // SEBCOMM_METRICS_HPP_
