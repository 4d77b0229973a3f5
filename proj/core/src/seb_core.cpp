#include "sebcomm/seb_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sebcomm/errors.hpp"

namespace sebcomm {

int seb_count_rule(int n_images, int n_p, int divisor) {
  if (n_images <= 0 || n_p <= 0 || divisor <= 0)
    throw ParameterError("seb count rule: all arguments must be positive");
  const int64_t k = static_cast<int64_t>(n_images) * n_p / divisor;
  return static_cast<int>(std::max<int64_t>(1, k));
}

Tensor stack_patches(const std::vector<PatchGrid>& grids) {
  if (grids.empty()) throw ParameterError("stack patches: no grids");
  const int C = grids[0].channels, h = grids[0].patch_h, w = grids[0].patch_w;
  int total = 0;
  for (const auto& g : grids) {
    if (g.channels != C || g.patch_h != h || g.patch_w != w)
      throw ShapeError("stack patches: mixed patch shapes");
    total += g.patch_count();
  }
  Tensor out({total, C, h, w});
  int n = 0;
  for (const auto& g : grids)
    for (const auto& p : g.patches) {
      std::copy(p.data.begin(), p.data.end(),
                out.data.begin() + static_cast<size_t>(n) * C * h * w);
      ++n;
    }
  return out;
}

std::vector<Tensor> encode_patches(AnalysisTransform& encoder,
                                   const std::vector<PatchGrid>& grids) {
  if (grids.empty()) throw ParameterError("encode patches: no grids");
  const int h = grids[0].patch_h, w = grids[0].patch_w;
  if (h % 16 != 0 || w % 16 != 0)
    throw ShapeError("encode patches: patch size " + std::to_string(h) + "x" +
                     std::to_string(w) + " not divisible by 16");
  Tensor batch = stack_patches(grids);
  Tensor latents = encoder.forward(batch);
  const int N = latents.dim(0), c = latents.dim(1), hh = latents.dim(2), ww = latents.dim(3);
  std::vector<Tensor> out;
  out.reserve(static_cast<size_t>(N));
  for (int n = 0; n < N; ++n) {
    Tensor t({c, hh, ww});
    std::copy(latents.data.begin() + static_cast<size_t>(n) * c * hh * ww,
              latents.data.begin() + static_cast<size_t>(n + 1) * c * hh * ww, t.data.begin());
    out.push_back(std::move(t));
  }
  return out;
}

std::pair<SebCodebook, UsageMap> build_codebook(const std::vector<Tensor>& latents,
                                                int n_images, int n_p, uint64_t seed,
                                                const CodebookOptions& opts) {
  if (latents.empty()) throw ParameterError("build codebook: empty latent set");
  if (static_cast<int64_t>(latents.size()) != static_cast<int64_t>(n_images) * n_p)
    throw ParameterError("build codebook: " + std::to_string(latents.size()) +
                         " latents for n_images*n_p = " +
                         std::to_string(static_cast<int64_t>(n_images) * n_p));
  const int K = seb_count_rule(n_images, n_p, opts.divisor);
  const auto& shape = latents[0].shape;
  const Eigen::Index d = static_cast<Eigen::Index>(latents[0].size());

  Eigen::MatrixXd points(latents.size(), d);
  for (size_t i = 0; i < latents.size(); ++i) {
    if (latents[i].shape != shape) throw ShapeError("build codebook: mixed latent shapes");
    for (Eigen::Index j = 0; j < d; ++j)
      points(static_cast<Eigen::Index>(i), j) = latents[i].data[static_cast<size_t>(j)];
  }

  KMeansOptions kopts;
  kopts.max_iter = opts.kmeans_max_iter;
  kopts.restarts = opts.kmeans_restarts;
  kopts.warm_start = opts.warm_start;
  KMeansResult res = kmeans(points, K, seed, kopts);

  SebCodebook book;
  book.K = K;
  book.sebs.reserve(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    Tensor s(shape);
    for (Eigen::Index j = 0; j < d; ++j)
      s.data[static_cast<size_t>(j)] = static_cast<float>(res.centers(k, j));
    book.sebs.push_back(std::move(s));
  }

  UsageMap usage;
  usage.K = K;
  usage.indices.assign(static_cast<size_t>(n_images), std::vector<int>(static_cast<size_t>(n_p)));
  for (int i = 0; i < n_images; ++i)
    for (int p = 0; p < n_p; ++p)
      usage.indices[static_cast<size_t>(i)][static_cast<size_t>(p)] =
          res.labels[static_cast<size_t>(i) * n_p + p];
  return {std::move(book), std::move(usage)};
}

void decode_codebook(SynthesisTransform& decoder, SebCodebook& codebook) {
  if (codebook.sebs.empty()) throw ParameterError("decode codebook: no sebs");
  const auto& s = codebook.sebs[0].shape;
  if (s.size() != 3) throw ShapeError("decode codebook: sebs must be [c',h',w']");
  Tensor batch({codebook.K, s[0], s[1], s[2]});
  const size_t per = codebook.sebs[0].data.size();
  for (int k = 0; k < codebook.K; ++k) {
    if (codebook.sebs[static_cast<size_t>(k)].shape != s)
      throw ShapeError("decode codebook: mixed seb shapes");
    std::copy(codebook.sebs[static_cast<size_t>(k)].data.begin(),
              codebook.sebs[static_cast<size_t>(k)].data.end(),
              batch.data.begin() + static_cast<size_t>(k) * per);
  }
  Tensor out = decoder.forward(batch);
  codebook.ref_patches.clear();
  codebook.ref_patches.reserve(static_cast<size_t>(codebook.K));
  const size_t per_out = out.data.size() / static_cast<size_t>(codebook.K);
  for (int k = 0; k < codebook.K; ++k) {
    Tensor p({out.dim(1), out.dim(2), out.dim(3)});
    for (size_t j = 0; j < per_out; ++j)
      p.data[j] = std::clamp(out.data[static_cast<size_t>(k) * per_out + j], 0.0f, 1.0f);
    codebook.ref_patches.push_back(std::move(p));
  }
}

GridGeometry geometry_of(const PatchGrid& grid) {
  return GridGeometry{grid.rows, grid.cols, grid.pad};
}

std::vector<Image> assemble_reference(const SebCodebook& codebook, const UsageMap& usage,
                                      const std::vector<GridGeometry>& geometry) {
  if (codebook.ref_patches.empty())
    throw StateError("assemble reference: codebook has no decoded patches");
  if (geometry.size() != usage.indices.size())
    throw StructuralError("assemble reference: geometry count mismatch");
  std::vector<Image> out;
  out.reserve(usage.indices.size());
  for (size_t i = 0; i < usage.indices.size(); ++i) {
    const auto& geo = geometry[i];
    if (static_cast<int>(usage.indices[i].size()) != geo.rows * geo.cols)
      throw StructuralError("assemble reference: usage row " + std::to_string(i) +
                            " does not match its grid");
    PatchGrid grid;
    grid.rows = geo.rows;
    grid.cols = geo.cols;
    grid.pad = geo.pad;
    grid.channels = codebook.ref_patches[0].dim(0);
    grid.patch_h = codebook.ref_patches[0].dim(1);
    grid.patch_w = codebook.ref_patches[0].dim(2);
    grid.patches.reserve(usage.indices[i].size());
    for (int idx : usage.indices[i]) {
      if (idx < 0 || idx >= codebook.K)
        throw StructuralError("assemble reference: usage index " + std::to_string(idx) +
                              " outside codebook of " + std::to_string(codebook.K));
      grid.patches.push_back(codebook.ref_patches[static_cast<size_t>(idx)]);
    }
    out.push_back(depatchify(grid));
  }
  return out;
}

}  // namespace sebcomm
