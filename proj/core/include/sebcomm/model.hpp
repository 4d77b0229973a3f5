#ifndef SEBCOMM_MODEL_HPP_
#define SEBCOMM_MODEL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sebcomm/entropy.hpp"
#include "sebcomm/flow.hpp"
#include "sebcomm/rates.hpp"
#include "sebcomm/seb_core.hpp"
#include "sebcomm/serialize.hpp"
#include "sebcomm/transforms.hpp"

namespace sebcomm {

// Channel widths and geometry of the full pipeline. Defaults follow the
// 192-wide/32-patch production configuration; smoke tests shrink them.
struct ModelHyper {
  int patch = 32;
  int c_seb = 192;      // Seb latent channels
  int hidden_seb = 192;
  int c_comp = 128;     // compensation latent channels
  int hidden_comp = 128;
  int c_res = 192;      // residual latent channels
  int hidden_res = 192;
  int flow_hidden = 32;
  int ctx_hidden = 64;  // conditional entropy context net width
  int seb_divisor = 25; // patches per Seb

  std::string to_json() const;
  static ModelHyper from_json(const std::string& json);
  bool operator==(const ModelHyper&) const = default;
};

// The trainable pipeline: patch encoder/decoder around the clustered
// codebook, flow estimator with compensation codec, residual codec, and the
// three entropy models. Parameter layout is stable and named, so
// checkpoints are exchangeable between runs.
class SebModel {
 public:
  SebModel(const ModelHyper& hyper, uint64_t seed);

  std::vector<ParamTensor*> params();
  Checkpoint to_checkpoint() const;
  static SebModel from_checkpoint(const Checkpoint& ckpt);

  ModelHyper hyper;
  AnalysisTransform seb_enc;
  SynthesisTransform ref_dec;
  FlowEstimator flow_est;
  AnalysisTransform comp_enc;
  SynthesisTransform comp_dec;
  AnalysisTransform res_enc;
  SynthesisTransform res_dec;
  FactorizedEntropyModel em_seb;
  FactorizedEntropyModel em_res;
  ConditionalGaussianModel em_comp;
};

// Loss components of one training step, in both the optimized composition
// and the raw rate-distortion bookkeeping.
struct StepStats {
  double loss = 0.0;      // lambda*MSE + bits/pixel + beta*mean regularizer
  double loss_rd = 0.0;   // lambda*MSE + raw total bits
  double loss_reg = 0.0;  // raw sum of squared latent-to-Seb distances
  double mse = 0.0;
  double bits_S = 0.0, bits_A = 0.0, bits_Zm = 0.0, bits_Zr = 0.0;
  int K = 0;
  bool underflow = false;

  double total_bits() const { return bits_S + bits_A + bits_Zm + bits_Zr; }
};

// One joint forward+backward pass over a same-size batch [n,3,H,W] with
// H,W multiples of the patch size. Accumulates parameter gradients (zero
// them first), refreshes *warm_centers with this step's codebook, and uses
// additive-noise quantization seeded by `seed`. Distortion feeds the loss
// unclamped; clamping is an evaluation-side operation.
StepStats train_step_graph(SebModel& model, const Tensor& images, double lambda, double beta,
                           uint64_t seed, Eigen::MatrixXd* warm_centers);

// batch plumbing shared by training and evaluation
Tensor images_to_batch(const std::vector<Image>& images);
std::vector<Image> batch_to_images(const Tensor& batch);
Tensor split_into_patches(const Tensor& images, int patch);
Tensor merge_from_patches(const Tensor& patches, int n, int height, int width);

}  // namespace sebcomm

#endif  // SEBCOMM_MODEL_HPP_
