#pragma once

#include "sebcomm/model.hpp"
#include "sebcomm/rates.hpp"
#include "sebcomm/trainer.hpp"

namespace testutil {

// The training graph with the clustering step removed: latents feed the
// reference decoder directly. Valid on a single patch-sized image, where
// clustering is the identity (K = N = 1) and the two graphs must agree.
// Mirrors the training step's seed derivations so the quantization noise
// streams line up.
inline sebcomm::StepStats manual_identity_step(sebcomm::SebModel& model,
                                               const sebcomm::Tensor& images, double lambda,
                                               uint64_t seed) {
  using namespace sebcomm;
  const int n = images.dim(0), H = images.dim(2), W = images.dim(3);
  const int p = model.hyper.patch;

  Tensor patches = split_into_patches(images, p);
  Tensor F = model.seb_enc.forward(patches);

  Rng noise(derive_seed(seed, 1));
  Tensor Fq = quantize(F, QuantizeMode::kTrain, &noise);

  StepStats stats;
  stats.K = 1;
  stats.bits_S = static_cast<double>(model.em_seb.bits(Fq));
  stats.bits_A = 0.0;

  Tensor decoded = model.ref_dec.forward(Fq);
  Tensor reference = merge_from_patches(decoded, n, H, W);

  Tensor flow = model.flow_est.forward(images, reference);
  Tensor zm = model.comp_enc.forward(flow);
  Tensor zm_q = quantize(zm, QuantizeMode::kTrain, &noise);
  model.em_comp.condition(reference);
  stats.bits_Zm = static_cast<double>(model.em_comp.bits(zm_q));
  Tensor flow_hat = model.comp_dec.forward(zm_q);
  WarpOpT<float> warp_op;
  Tensor prediction = warp_op.forward(reference, flow_hat);

  Tensor residual = zeros_like(prediction);
  for (int64_t e = 0; e < residual.size(); ++e)
    residual.ptr()[e] = images.ptr()[e] - prediction.ptr()[e];
  Tensor zr = model.res_enc.forward(residual);
  Tensor zr_q = quantize(zr, QuantizeMode::kTrain, &noise);
  stats.bits_Zr = static_cast<double>(model.em_res.bits(zr_q));
  Tensor residual_hat = model.res_dec.forward(zr_q);

  double se = 0.0;
  Tensor grecon({n, 3, H, W});
  const double gmse = 2.0 / static_cast<double>(images.size());
  for (int64_t e = 0; e < images.size(); ++e) {
    const double r = static_cast<double>(prediction.ptr()[e]) +
                     static_cast<double>(residual_hat.ptr()[e]) -
                     static_cast<double>(images.ptr()[e]);
    se += r * r;
    grecon.ptr()[e] = static_cast<float>(lambda * gmse * r);
  }
  stats.mse = se / static_cast<double>(images.size());
  stats.loss_reg = 0.0;
  stats.loss_rd = lambda * stats.mse + stats.total_bits();
  const double pixels = static_cast<double>(n) * H * W;
  stats.loss = lambda * stats.mse + stats.total_bits() / pixels;

  const float gbits = static_cast<float>(1.0 / pixels);
  Tensor gzr = model.res_dec.backward(grecon);
  {
    Tensor gzr_rate = model.em_res.backward(gbits);
    for (int64_t e = 0; e < gzr.size(); ++e) gzr.ptr()[e] += gzr_rate.ptr()[e];
  }
  Tensor gresidual = model.res_enc.backward(gzr);

  Tensor gprediction = grecon;
  for (int64_t e = 0; e < gprediction.size(); ++e)
    gprediction.ptr()[e] -= gresidual.ptr()[e];

  Tensor greference({n, 3, H, W});
  Tensor gflow_hat({n, 2, H, W});
  warp_op.backward(gprediction, greference, gflow_hat);

  Tensor gzm = model.comp_dec.backward(gflow_hat);
  {
    Tensor gzm_rate = model.em_comp.backward(gbits, &greference);
    for (int64_t e = 0; e < gzm.size(); ++e) gzm.ptr()[e] += gzm_rate.ptr()[e];
  }
  Tensor gflow = model.comp_enc.backward(gzm);
  model.flow_est.backward(gflow, nullptr, &greference);

  Tensor gF = model.ref_dec.backward(split_into_patches(greference, p));
  {
    Tensor gF_rate = model.em_seb.backward(gbits);
    for (int64_t e = 0; e < gF.size(); ++e) gF.ptr()[e] += gF_rate.ptr()[e];
  }
  model.seb_enc.backward(gF);
  return stats;
}

}  // namespace testutil
