#ifndef SEBCOMM_SPLIT_HPP_
#define SEBCOMM_SPLIT_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sebcomm/image.hpp"

namespace sebcomm {

// Frozen image-to-vector embedding. Implementations must be deterministic;
// nothing in the pipeline ever updates a projector.
class Projector {
 public:
  virtual ~Projector() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd embed(const Image& image) const = 0;
  // Row i embeds image i. The default loops embed(); file-backed projectors
  // override it to hand out precomputed rows.
  virtual Eigen::MatrixXd embed_set(const ImageSet& set) const;
  bool frozen() const { return true; }
};

// d=3: per-channel pixel means.
class MeanPoolProjector : public Projector {
 public:
  int dim() const override { return 3; }
  Eigen::VectorXd embed(const Image& image) const override;
};

// Small untrained convolutional feature extractor for smoke tests: one
// seeded random 3x3 conv (3->16) on a bilinear 32x32 resize, ReLU, global
// average pool. d=16.
class ConvFeatureProjector : public Projector {
 public:
  explicit ConvFeatureProjector(uint64_t seed);
  int dim() const override { return 16; }
  Eigen::VectorXd embed(const Image& image) const override;

 private:
  std::vector<float> weights_;  // [16,3,3,3]
  std::vector<float> bias_;     // [16]
};

// Externally produced embeddings, loaded from a text file with one header
// line "n d" followed by n rows of d decimal floats. Rows map to images by
// position, so per-image embed() is unavailable.
class FileEmbeddingProjector : public Projector {
 public:
  FileEmbeddingProjector() = default;
  explicit FileEmbeddingProjector(const std::string& path) { load(path); }
  void load(const std::string& path);
  bool loaded() const { return loaded_; }

  int dim() const override;
  Eigen::VectorXd embed(const Image& image) const override;  // state error
  Eigen::MatrixXd embed_set(const ImageSet& set) const override;

 private:
  Eigen::MatrixXd rows_;
  bool loaded_ = false;
};

// n x d matrix, row i = embedding of image i. Empty set gives a 0 x d matrix.
Eigen::MatrixXd embed_set(const Projector& projector, const ImageSet& set);

struct SplitResult {
  std::vector<int> labels;  // 0-based subset index per image
  int J = 1;
  std::vector<std::pair<int, double>> inertia_curve;  // (J_candidate, inertia)
};

// Partition the set into J subsets of correlated images. Runs k-means for
// J_candidate = 1..J_max on the embeddings and picks J at the elbow: the
// argmax over J of the discrete second difference
//   inertia(J-1) - 2 inertia(J) + inertia(J+1)
// with the curve extended flat past J_max. Ties break toward smaller J; a
// flat curve (and J_max = 1) gives J = 1. Labels and J are attached to the
// set. J_max > n is clamped to n with a warning on stderr. Deterministic
// given the seed.
SplitResult split(ImageSet& set, const Projector& projector, int J_max, uint64_t seed);

}  // namespace sebcomm

#endif  // SEBCOMM_SPLIT_HPP_
