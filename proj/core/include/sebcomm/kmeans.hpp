#ifndef SEBCOMM_KMEANS_HPP_
#define SEBCOMM_KMEANS_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace sebcomm {

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-6;       // convergence tolerance on center movement
  int restarts = 8;        // independent k-means++ starts, best inertia wins
  // Optional warm start (K x d). When set, the first run starts from these
  // centers and restarts are skipped.
  const Eigen::MatrixXd* warm_start = nullptr;
};

struct KMeansResult {
  Eigen::MatrixXd centers;  // K x d
  std::vector<int> labels;  // size m, values in [0,K)
  double inertia = 0.0;     // sum of squared distances to assigned centers
};

// Lloyd's algorithm with k-means++ initialization. Ties in the assignment
// break toward the lowest center index; empty clusters are reseeded on the
// point farthest from its assigned center. Deterministic given the seed.
KMeansResult kmeans(const Eigen::MatrixXd& points, int K, uint64_t seed,
                    const KMeansOptions& opts = {});

}  // namespace sebcomm

#endif  // SEBCOMM_KMEANS_HPP_
