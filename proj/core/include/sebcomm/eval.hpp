#ifndef SEBCOMM_EVAL_HPP_
#define SEBCOMM_EVAL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sebcomm/metrics.hpp"
#include "sebcomm/model.hpp"

namespace sebcomm {

struct ImageEval {
  double psnr = 0.0;
  double ms_ssim = 0.0;
};

// Deterministic transmission of one subset: shared codebook and usage map,
// then per-image flow compensation and residual coding with rounded
// latents. Reconstructions use transmitted (rounded) values end to end, so
// the receiver-side decode is bit-identical by construction.
struct SubsetEval {
  RateBreakdown rates;                 // subset totals, n_images filled in
  std::vector<ImageEval> metrics;      // vs the original images
  std::vector<Image> reconstructions;  // cropped to the original size
  std::vector<Image> references;       // assembled reference images, cropped
  SebCodebook codebook;                // rounded Sebs with decoded patches
  UsageMap usage;
  std::vector<Tensor> zm, zr;          // rounded latents, one per image
  int height = 0, width = 0;
};

// Receiver-side reconstruction: prediction plus decoded residual, clamped
// to the displayable range [0, 1]. Shapes must match.
Tensor reconstruct(const Tensor& prediction, const Tensor& residual);

// Images of one subset must share one size (the wire format packs one
// patch-count header per subset).
SubsetEval evaluate_subset(SebModel& model, const std::vector<Image>& images, uint64_t seed);

// One operating point of the sweep: a trained model evaluated at a channel
// quality. `lambda` is the reporting key of the checkpoint.
struct SweepPoint {
  double snr_db = 10.0;
  double lambda = 0.0;
  std::string checkpoint;
};

struct SweepRow {
  double snr_db = 0.0;
  double lambda = 0.0;
  double psnr_mean = 0.0;
  double msssim_mean = 0.0;
  CbrBreakdown cbr;
  double bpp = 0.0;
};

// Evaluates every point against the whole set (grouped by subset labels).
// Points whose checkpoint cannot be read are skipped with a warning.
std::vector<SweepRow> sweep(const std::vector<SweepPoint>& points, const ImageSet& data,
                            uint64_t seed);

// columns: snr_db, lambda, psnr_mean, msssim_mean, cbr_total, cbr_S, cbr_A,
// cbr_Zm, cbr_Zr, bpp
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// quality-vs-SNR line charts (one series per lambda) and the per-point
// stacked CBR composition
void render_sweep_plots(const std::string& dir, const std::vector<SweepRow>& rows);

// Extension hook for plugging reference systems into the same sweep
// reports. No implementations are bundled.
class BaselineAdapter {
 public:
  virtual ~BaselineAdapter() = default;
  virtual std::string name() const = 0;
  virtual SweepRow evaluate(const ImageSet& data, double snr_db) = 0;
};

}  // namespace sebcomm

#endif  // SEBCOMM_EVAL_HPP_
