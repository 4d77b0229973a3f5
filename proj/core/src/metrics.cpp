#include "sebcomm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <vector>

#include "sebcomm/errors.hpp"

namespace sebcomm {

double mse(const Image& a, const Image& b) {
  check_same_shape(a.pixels, b.pixels, "mse");
  if (a.pixels.empty()) throw ParameterError("mse: empty image");
  double s = 0.0;
  for (size_t i = 0; i < a.pixels.data.size(); ++i) {
    const double d = static_cast<double>(a.pixels.data[i]) - b.pixels.data[i];
    s += d * d;
  }
  return s / static_cast<double>(a.pixels.data.size());
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_kernel() {
  std::vector<double> k(kWindow);
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - (kWindow - 1) / 2.0;
    k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[static_cast<size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// one channel as a row-major double plane
struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

Plane channel_plane(const Image& img, int c) {
  Plane p;
  p.h = img.height();
  p.w = img.width();
  p.v.resize(static_cast<size_t>(p.h) * p.w);
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x) p.at(y, x) = img.pixels.at(c, y, x);
  return p;
}

// separable valid-window Gaussian filter; output shrinks by kWindow-1
Plane filter_valid(const Plane& in, const std::vector<double>& k) {
  Plane mid;  // horizontal pass
  mid.h = in.h;
  mid.w = in.w - kWindow + 1;
  mid.v.resize(static_cast<size_t>(mid.h) * mid.w);
  for (int y = 0; y < mid.h; ++y)
    for (int x = 0; x < mid.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += k[static_cast<size_t>(i)] * in.at(y, x + i);
      mid.at(y, x) = s;
    }
  Plane out;
  out.h = in.h - kWindow + 1;
  out.w = mid.w;
  out.v.resize(static_cast<size_t>(out.h) * out.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += k[static_cast<size_t>(i)] * mid.at(y + i, x);
      out.at(y, x) = s;
    }
  return out;
}

Plane multiply(const Plane& a, const Plane& b) {
  Plane out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
  return out;
}

Plane downsample2(const Plane& in) {
  Plane out;
  out.h = in.h / 2;
  out.w = in.w / 2;
  out.v.resize(static_cast<size_t>(out.h) * out.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.at(y, x) = 0.25 * (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) +
                             in.at(2 * y + 1, 2 * x) + in.at(2 * y + 1, 2 * x + 1));
  return out;
}

// mean luminance and contrast-structure terms of one scale
void scale_terms(const Plane& a, const Plane& b, const std::vector<double>& k, double& l_out,
                 double& cs_out) {
  Plane mu_a = filter_valid(a, k), mu_b = filter_valid(b, k);
  Plane saa = filter_valid(multiply(a, a), k);
  Plane sbb = filter_valid(multiply(b, b), k);
  Plane sab = filter_valid(multiply(a, b), k);
  double l_sum = 0.0, cs_sum = 0.0;
  for (size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = saa.v[i] - ma * ma;
    const double vb = sbb.v[i] - mb * mb;
    const double vab = sab.v[i] - ma * mb;
    l_sum += (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
    cs_sum += (2.0 * vab + kC2) / (va + vb + kC2);
  }
  l_out = l_sum / static_cast<double>(mu_a.v.size());
  cs_out = cs_sum / static_cast<double>(mu_a.v.size());
}

}  // namespace

MsSsimResult ms_ssim_detail(const Image& a, const Image& b) {
  check_same_shape(a.pixels, b.pixels, "ms_ssim");
  static const double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

  // feasible scale count: every scale needs at least one 11x11 window
  int feasible = 0;
  for (int h = std::min(a.height(), a.width()); h >= kWindow && feasible < 5; h /= 2) ++feasible;
  if (feasible == 0)
    throw ParameterError("ms_ssim: image smaller than the 11x11 analysis window");
  MsSsimResult result;
  result.scales_used = feasible;
  result.reduced = feasible < 5;
  if (result.reduced)
    std::cerr << "warning: ms_ssim: " << a.width() << "x" << a.height() << " image supports only "
              << feasible << " of 5 scales; weights renormalized\n";

  double wsum = 0.0;
  for (int m = 0; m < feasible; ++m) wsum += kWeights[m];

  const std::vector<double> kernel = gaussian_kernel();
  double score_sum = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    Plane pa = channel_plane(a, c), pb = channel_plane(b, c);
    double score = 1.0;
    for (int m = 0; m < feasible; ++m) {
      double l = 0.0, cs = 0.0;
      scale_terms(pa, pb, kernel, l, cs);
      const double w = kWeights[m] / wsum;
      score *= std::pow(std::max(cs, 0.0), w);
      if (m == feasible - 1) score *= std::pow(std::max(l, 0.0), w);
      if (m + 1 < feasible) {
        pa = downsample2(pa);
        pb = downsample2(pb);
      }
    }
    score_sum += score;
  }
  result.score = score_sum / a.channels();
  return result;
}

double ms_ssim(const Image& a, const Image& b) { return ms_ssim_detail(a, b).score; }

}  // namespace sebcomm
