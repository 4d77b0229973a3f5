#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "sebcomm/image.hpp"
#include "sebcomm/rng.hpp"
#include "sebcomm/tensor.hpp"

namespace testutil {

inline sebcomm::Image make_image(int h, int w, uint64_t seed) {
  sebcomm::Rng rng(seed);
  sebcomm::Image img(h, w);
  for (auto& v : img.pixels.data) v = static_cast<float>(rng.uniform());
  return img;
}

// Band-limited content: a few random sinusoids mapped into [0, 1]. Smooth
// enough for warping and training tests to behave.
inline sebcomm::Image make_smooth_image(int h, int w, uint64_t seed) {
  sebcomm::Rng rng(seed);
  struct Wave {
    double fy, fx, phase, amp;
  };
  std::vector<Wave> waves(4);
  for (auto& wv : waves) {
    wv.fy = rng.uniform() * 4.0;
    wv.fx = rng.uniform() * 4.0;
    wv.phase = rng.uniform() * 6.283185307179586;
    wv.amp = 0.5 + rng.uniform();
  }
  sebcomm::Image img(h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (size_t k = 0; k < waves.size(); ++k) {
          const Wave& wv = waves[k];
          s += wv.amp * std::sin(6.283185307179586 *
                                     (wv.fy * y / h + wv.fx * x / w) +
                                 wv.phase + c + static_cast<double>(k));
        }
        img.pixels.at(c, y, x) = static_cast<float>(0.5 + 0.12 * s);
      }
  for (auto& v : img.pixels.data) v = std::min(1.0f, std::max(0.0f, v));
  return img;
}

inline sebcomm::Image constant_image(int h, int w, float r, float g, float b) {
  sebcomm::Image img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.pixels.at(0, y, x) = r;
      img.pixels.at(1, y, x) = g;
      img.pixels.at(2, y, x) = b;
    }
  return img;
}

template <typename S>
sebcomm::TensorT<S> rand_tensor(const std::vector<int>& shape, uint64_t seed,
                                double lo = -1.0, double hi = 1.0) {
  sebcomm::Rng rng(seed);
  sebcomm::TensorT<S> t(shape);
  for (auto& v : t.data)
    v = static_cast<S>(lo + (hi - lo) * rng.uniform());
  return t;
}

inline bool approx_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Central-difference check of an analytic gradient. `loss` re-runs the
// forward pass against the current contents of `vals`. Checks every
// `stride`-th element to keep big tensors affordable.
template <typename LossFn>
void check_fd(LossFn&& loss, double* vals, const double* grad, int64_t count,
              double h, double tol, int64_t stride, int* failures) {
  for (int64_t i = 0; i < count; i += stride) {
    const double keep = vals[i];
    vals[i] = keep + h;
    const double up = loss();
    vals[i] = keep - h;
    const double dn = loss();
    vals[i] = keep;
    const double fd = (up - dn) / (2.0 * h);
    if (!approx_rel(fd, grad[i], tol)) ++(*failures);
  }
}

// Exact k-means oracle: enumerate every assignment of m points to K
// clusters, score each by centroid inertia, return the minimum. Only
// feasible for tiny instances.
inline double brute_force_inertia(const Eigen::MatrixXd& pts, int K) {
  const int m = static_cast<int>(pts.rows());
  const int d = static_cast<int>(pts.cols());
  std::vector<int> assign(static_cast<size_t>(m), 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(K, d);
    std::vector<int> cnt(static_cast<size_t>(K), 0);
    for (int i = 0; i < m; ++i) {
      sum.row(assign[static_cast<size_t>(i)]) += pts.row(i);
      ++cnt[static_cast<size_t>(assign[static_cast<size_t>(i)])];
    }
    double inertia = 0.0;
    for (int i = 0; i < m; ++i) {
      const int k = assign[static_cast<size_t>(i)];
      Eigen::RowVectorXd c = sum.row(k) / cnt[static_cast<size_t>(k)];
      inertia += (pts.row(i) - c).squaredNorm();
    }
    best = std::min(best, inertia);
    int pos = m - 1;
    while (pos >= 0 && assign[static_cast<size_t>(pos)] == K - 1) {
      assign[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++assign[static_cast<size_t>(pos)];
  }
  return best;
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "sebcomm-test-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testutil
