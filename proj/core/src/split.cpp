#include "sebcomm/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "sebcomm/augment.hpp"
#include "sebcomm/errors.hpp"
#include "sebcomm/kmeans.hpp"
#include "sebcomm/rng.hpp"

namespace sebcomm {

Eigen::MatrixXd Projector::embed_set(const ImageSet& set) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(set.size()), dim());
  for (size_t i = 0; i < set.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = embed(set.images[i]);
  return out;
}

Eigen::VectorXd MeanPoolProjector::embed(const Image& image) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
  const int h = image.height(), w = image.width();
  if (h <= 0 || w <= 0) throw ParameterError("mean pool projector: empty image");
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) s += image.pixels.at(c, y, x);
    v[c] = s / (static_cast<double>(h) * w);
  }
  return v;
}

ConvFeatureProjector::ConvFeatureProjector(uint64_t seed) {
  Rng rng(seed);
  weights_.resize(16 * 3 * 3 * 3);
  bias_.resize(16);
  const double stddev = std::sqrt(2.0 / (3 * 3 * 3));
  for (float& w : weights_) w = static_cast<float>(stddev * rng.normal());
  for (float& b : bias_) b = 0.0f;
}

Eigen::VectorXd ConvFeatureProjector::embed(const Image& image) const {
  Image r = resize_bilinear(image, 32, 32);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(16);
  for (int oc = 0; oc < 16; ++oc) {
    double pooled = 0.0;
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        double acc = bias_[oc];
        for (int ic = 0; ic < 3; ++ic) {
          for (int ky = -1; ky <= 1; ++ky) {
            for (int kx = -1; kx <= 1; ++kx) {
              int sy = std::clamp(y + ky, 0, 31);
              int sx = std::clamp(x + kx, 0, 31);
              acc += static_cast<double>(
                         weights_[((oc * 3 + ic) * 3 + (ky + 1)) * 3 + (kx + 1)]) *
                     r.pixels.at(ic, sy, sx);
            }
          }
        }
        pooled += std::max(acc, 0.0);
      }
    }
    v[oc] = pooled / (32.0 * 32.0);
  }
  return v;
}

void FileEmbeddingProjector::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("embedding file: cannot open " + path);
  long long n = -1, d = -1;
  if (!(in >> n >> d) || n < 0 || d <= 0)
    throw IngestError("embedding file: bad header in " + path);
  Eigen::MatrixXd rows(n, d);
  for (long long i = 0; i < n; ++i) {
    for (long long j = 0; j < d; ++j) {
      double v;
      if (!(in >> v))
        throw IngestError("embedding file: truncated at row " + std::to_string(i) + " in " +
                          path);
      rows(i, j) = v;
    }
  }
  rows_ = std::move(rows);
  loaded_ = true;
}

int FileEmbeddingProjector::dim() const {
  if (!loaded_) throw StateError("embedding projector: no file loaded");
  return static_cast<int>(rows_.cols());
}

Eigen::VectorXd FileEmbeddingProjector::embed(const Image&) const {
  throw StateError("embedding projector: rows map to images by position, per-image embed unavailable");
}

Eigen::MatrixXd FileEmbeddingProjector::embed_set(const ImageSet& set) const {
  if (!loaded_) throw StateError("embedding projector: no file loaded");
  if (static_cast<Eigen::Index>(set.size()) != rows_.rows())
    throw IncompatError("embedding projector: file has " + std::to_string(rows_.rows()) +
                        " rows for " + std::to_string(set.size()) + " images");
  return rows_;
}

Eigen::MatrixXd embed_set(const Projector& projector, const ImageSet& set) {
  if (set.size() == 0) return Eigen::MatrixXd(0, projector.dim());
  return projector.embed_set(set);
}

namespace {

// Previous solution's centers plus the farthest point: Lloyd from there can
// only improve on inertia(J-1), which keeps the curve non-increasing.
Eigen::MatrixXd grow_centers(const Eigen::MatrixXd& points, const KMeansResult& prev) {
  const Eigen::Index J = prev.centers.rows();
  Eigen::MatrixXd grown(J + 1, prev.centers.cols());
  grown.topRows(J) = prev.centers;
  Eigen::Index far = 0;
  double far_d = -1.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double d = (points.row(i) - prev.centers.row(prev.labels[static_cast<size_t>(i)]))
                   .squaredNorm();
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  grown.row(J) = points.row(far);
  return grown;
}

}  // namespace

SplitResult split(ImageSet& set, const Projector& projector, int J_max, uint64_t seed) {
  if (J_max < 1) throw ParameterError("split: J_max must be at least 1");
  const int n = static_cast<int>(set.size());
  if (n == 0) throw ParameterError("split: empty image set");
  if (J_max > n) {
    std::cerr << "warning: split: J_max " << J_max << " clamped to image count " << n << "\n";
    J_max = n;
  }

  Eigen::MatrixXd points = embed_set(projector, set);

  SplitResult result;
  std::vector<KMeansResult> runs;
  runs.reserve(static_cast<size_t>(J_max));
  for (int J = 1; J <= J_max; ++J) {
    KMeansOptions opts;
    KMeansResult run = kmeans(points, J, derive_seed(seed, static_cast<uint64_t>(J)), opts);
    if (J >= 2) {
      Eigen::MatrixXd grown = grow_centers(points, runs.back());
      KMeansOptions warm;
      warm.warm_start = &grown;
      KMeansResult alt = kmeans(points, J, derive_seed(seed, static_cast<uint64_t>(J)), warm);
      if (alt.inertia < run.inertia) run = std::move(alt);
    }
    result.inertia_curve.emplace_back(J, run.inertia);
    runs.push_back(std::move(run));
  }

  int best_J = 1;
  if (J_max >= 2) {
    auto inertia = [&](int J) {
      return result.inertia_curve[static_cast<size_t>(std::min(J, J_max) - 1)].second;
    };
    double best_dd = 0.0;
    for (int J = 2; J <= J_max; ++J) {
      double dd = inertia(J - 1) - 2.0 * inertia(J) + inertia(J + 1);
      if (dd > best_dd + 1e-12) {
        best_dd = dd;
        best_J = J;
      }
    }
    if (best_dd <= 1e-12) best_J = 1;  // flat curve, no elbow
  }

  result.J = best_J;
  result.labels = runs[static_cast<size_t>(best_J - 1)].labels;
  set.subset_labels = result.labels;
  set.subset_count = result.J;
  return result;
}

}  // namespace sebcomm
