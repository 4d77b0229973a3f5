#include "sebcomm/kmeans.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sebcomm/errors.hpp"
#include "sebcomm/rng.hpp"

namespace sebcomm {

namespace {

// squared distance row-to-row
double sqdist(const Eigen::MatrixXd& a, int i, const Eigen::MatrixXd& b, int j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& points, int K, Rng& rng) {
  const int m = static_cast<int>(points.rows());
  Eigen::MatrixXd centers(K, points.cols());
  centers.row(0) = points.row(rng.uniform_int(m));
  Eigen::VectorXd d2(m);
  for (int i = 0; i < m; ++i) d2[i] = sqdist(points, i, centers, 0);
  for (int k = 1; k < K; ++k) {
    double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      double acc = 0.0;
      pick = m - 1;
      for (int i = 0; i < m; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.uniform_int(m));  // all points coincide
    }
    centers.row(k) = points.row(pick);
    for (int i = 0; i < m; ++i) d2[i] = std::min(d2[i], sqdist(points, i, centers, k));
  }
  return centers;
}

struct RunResult {
  Eigen::MatrixXd centers;
  std::vector<int> labels;
  double inertia;
};

void assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
            std::vector<int>& labels) {
  const int m = static_cast<int>(points.rows());
  const int K = static_cast<int>(centers.rows());
  for (int i = 0; i < m; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 0; k < K; ++k) {
      double d = sqdist(points, i, centers, k);
      if (d < best) {  // strict: ties keep the lowest index
        best = d;
        arg = k;
      }
    }
    labels[i] = arg;
  }
}

double compute_inertia(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                       const std::vector<int>& labels) {
  double s = 0.0;
  for (int i = 0; i < points.rows(); ++i) s += sqdist(points, i, centers, labels[i]);
  return s;
}

RunResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers,
                const KMeansOptions& opts) {
  const int m = static_cast<int>(points.rows());
  const int K = static_cast<int>(centers.rows());
  std::vector<int> labels(m, -1), prev(m, -2);
  std::vector<int> counts(K);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    assign(points, centers, labels);
    if (labels == prev) break;  // fixed point: centers already match the means
    prev = labels;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, points.cols());
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < m; ++i) {
      sums.row(labels[i]) += points.row(i);
      ++counts[labels[i]];
    }
    double movement = 0.0;
    for (int k = 0; k < K; ++k) {
      if (counts[k] == 0) continue;
      Eigen::RowVectorXd mean = sums.row(k) / counts[k];
      movement = std::max(movement, (mean - centers.row(k)).squaredNorm());
      centers.row(k) = mean;
    }
    // reseed empty clusters on the point farthest from its assigned center
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0) continue;
      int far = 0;
      double far_d = -1.0;
      for (int i = 0; i < m; ++i) {
        double d = sqdist(points, i, centers, labels[i]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers.row(k) = points.row(far);
      movement = std::numeric_limits<double>::infinity();
    }
    if (movement < opts.tol * opts.tol) {
      assign(points, centers, labels);
      break;
    }
  }
  // tighten so the centroid property holds exactly for the final labels
  assign(points, centers, labels);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, points.cols());
  std::fill(counts.begin(), counts.end(), 0);
  for (int i = 0; i < m; ++i) {
    sums.row(labels[i]) += points.row(i);
    ++counts[labels[i]];
  }
  for (int k = 0; k < K; ++k)
    if (counts[k] > 0) centers.row(k) = sums.row(k) / counts[k];
  assign(points, centers, labels);

  RunResult r;
  r.inertia = compute_inertia(points, centers, labels);
  r.centers = std::move(centers);
  r.labels = std::move(labels);
  return r;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int K, uint64_t seed,
                    const KMeansOptions& opts) {
  const int m = static_cast<int>(points.rows());
  if (K <= 0) throw ParameterError("kmeans: K must be positive");
  if (m < K)
    throw ParameterError("kmeans: " + std::to_string(m) + " points cannot form " +
                         std::to_string(K) + " clusters");
  if (!points.allFinite()) throw NumericError("kmeans: non-finite input");

  RunResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  if (opts.warm_start != nullptr) {
    if (opts.warm_start->rows() != K || opts.warm_start->cols() != points.cols())
      throw ParameterError("kmeans: warm start shape mismatch");
    best = lloyd(points, *opts.warm_start, opts);
  } else {
    const int restarts = std::max(1, opts.restarts);
    for (int r = 0; r < restarts; ++r) {
      Rng rng(derive_seed(seed, static_cast<uint64_t>(r)));
      RunResult run = lloyd(points, kmeanspp_init(points, K, rng), opts);
      if (run.inertia < best.inertia) best = std::move(run);
    }
  }

  KMeansResult out;
  out.centers = std::move(best.centers);
  out.labels = std::move(best.labels);
  out.inertia = best.inertia;
  return out;
}

}  // namespace sebcomm
