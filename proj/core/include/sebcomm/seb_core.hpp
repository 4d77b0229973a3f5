#ifndef SEBCOMM_SEB_CORE_HPP_
#define SEBCOMM_SEB_CORE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "sebcomm/image.hpp"
#include "sebcomm/kmeans.hpp"
#include "sebcomm/transforms.hpp"

namespace sebcomm {

// Shared semantic codebook: K cluster centers over patch latents, known to
// both ends of the link. ref_patches mirrors sebs after decoding.
struct SebCodebook {
  std::vector<Tensor> sebs;         // K x [c',h',w']
  std::vector<Tensor> ref_patches;  // K x [3,h,w], filled by decode_codebook
  int K = 0;
};

// Per-image, per-patch codebook index in row-major patch order. Indices are
// 0-based in memory and on the wire; reports speak of codewords 1..K.
struct UsageMap {
  std::vector<std::vector<int>> indices;
  int K = 0;

  int n_images() const { return static_cast<int>(indices.size()); }
  int n_p() const { return indices.empty() ? 0 : static_cast<int>(indices[0].size()); }
};

// codebook size rule: one Seb per `divisor` patches, at least one
int seb_count_rule(int n_images, int n_p, int divisor = 25);

// patches of all grids stacked into one [N,C,h,w] encoder batch, order
// preserved (grid by grid, row-major within each)
Tensor stack_patches(const std::vector<PatchGrid>& grids);

// one latent [c',h',w'] per patch; patch sides must be divisible by 16,
// checked before any compute
std::vector<Tensor> encode_patches(AnalysisTransform& encoder,
                                   const std::vector<PatchGrid>& grids);

struct CodebookOptions {
  int divisor = 25;
  int kmeans_max_iter = 100;
  int kmeans_restarts = 8;
  const Eigen::MatrixXd* warm_start = nullptr;  // K x (c'*h'*w') centers
};

// k-means over flattened latents; K from seb_count_rule. The returned
// codebook carries sebs only (run decode_codebook for reference patches).
std::pair<SebCodebook, UsageMap> build_codebook(const std::vector<Tensor>& latents,
                                                int n_images, int n_p, uint64_t seed,
                                                const CodebookOptions& opts = {});

// decode every Seb into its reference patch, clamped to [0,1]
void decode_codebook(SynthesisTransform& decoder, SebCodebook& codebook);

// per-image patch-grid geometry needed to reassemble from a usage map
struct GridGeometry {
  int rows = 0;
  int cols = 0;
  PadInfo pad;
};

GridGeometry geometry_of(const PatchGrid& grid);

// reference image i = row-major tiling of ref_patches[usage[i][p]], padding
// removed. Out-of-range usage indices raise a structural error.
std::vector<Image> assemble_reference(const SebCodebook& codebook, const UsageMap& usage,
                                      const std::vector<GridGeometry>& geometry);

}  // namespace sebcomm

#endif  // SEBCOMM_SEB_CORE_HPP_
