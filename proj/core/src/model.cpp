#include "sebcomm/model.hpp"

#include <json.hpp>
#include <map>
#include <utility>

#include "sebcomm/rng.hpp"

namespace sebcomm {

namespace {

// patch index within an image is row-major over the patch grid, matching
// the patchify order so usage maps line up across the pipeline
Tensor tile_by_usage(const Tensor& decoded, const std::vector<int>& labels) {
  const int K = decoded.dim(0);
  Tensor out({static_cast<int>(labels.size()), decoded.dim(1), decoded.dim(2), decoded.dim(3)});
  const int64_t plane = decoded.size() / K;
  for (size_t i = 0; i < labels.size(); ++i) {
    const int k = labels[i];
    if (k < 0 || k >= K) throw StructuralError("tile_by_usage: label out of range");
    std::copy_n(decoded.ptr() + k * plane, plane, out.ptr() + static_cast<int64_t>(i) * plane);
  }
  return out;
}

Tensor sum_by_label(const Tensor& gtiled, const std::vector<int>& labels, int K) {
  Tensor out({K, gtiled.dim(1), gtiled.dim(2), gtiled.dim(3)});
  const int64_t plane = out.size() / K;
  for (size_t i = 0; i < labels.size(); ++i) {
    const float* src = gtiled.ptr() + static_cast<int64_t>(i) * plane;
    float* dst = out.ptr() + labels[i] * plane;
    for (int64_t e = 0; e < plane; ++e) dst[e] += src[e];
  }
  return out;
}

Tensor gather_by_label(const Tensor& gcenters, const std::vector<int>& labels) {
  return tile_by_usage(gcenters, labels);
}

}  // namespace

std::string ModelHyper::to_json() const {
  nlohmann::json j;
  j["patch"] = patch;
  j["c_seb"] = c_seb;
  j["hidden_seb"] = hidden_seb;
  j["c_comp"] = c_comp;
  j["hidden_comp"] = hidden_comp;
  j["c_res"] = c_res;
  j["hidden_res"] = hidden_res;
  j["flow_hidden"] = flow_hidden;
  j["ctx_hidden"] = ctx_hidden;
  j["seb_divisor"] = seb_divisor;
  return j.dump();
}

ModelHyper ModelHyper::from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(std::string("bad hyperparameter JSON: ") + e.what());
  }
  ModelHyper h;
  auto get = [&](const char* key, int fallback) { return j.value(key, fallback); };
  h.patch = get("patch", h.patch);
  h.c_seb = get("c_seb", h.c_seb);
  h.hidden_seb = get("hidden_seb", h.hidden_seb);
  h.c_comp = get("c_comp", h.c_comp);
  h.hidden_comp = get("hidden_comp", h.hidden_comp);
  h.c_res = get("c_res", h.c_res);
  h.hidden_res = get("hidden_res", h.hidden_res);
  h.flow_hidden = get("flow_hidden", h.flow_hidden);
  h.ctx_hidden = get("ctx_hidden", h.ctx_hidden);
  h.seb_divisor = get("seb_divisor", h.seb_divisor);
  if (h.patch < 16 || h.patch % 16 != 0)
    throw ParameterError("patch side must be a positive multiple of 16");
  return h;
}

SebModel::SebModel(const ModelHyper& h, uint64_t seed)
    : hyper(h),
      seb_enc("seb_enc", 3, h.hidden_seb, h.c_seb, derive_seed(seed, 1)),
      ref_dec("ref_dec", h.c_seb, h.hidden_seb, 3, derive_seed(seed, 2)),
      flow_est("flow_est", h.flow_hidden, derive_seed(seed, 3)),
      comp_enc("comp_enc", 2, h.hidden_comp, h.c_comp, derive_seed(seed, 4)),
      comp_dec("comp_dec", h.c_comp, h.hidden_comp, 2, derive_seed(seed, 5)),
      res_enc("res_enc", 3, h.hidden_res, h.c_res, derive_seed(seed, 6)),
      res_dec("res_dec", h.c_res, h.hidden_res, 3, derive_seed(seed, 7)),
      em_seb("em_seb", h.c_seb, derive_seed(seed, 8)),
      em_res("em_res", h.c_res, derive_seed(seed, 9)),
      em_comp("em_comp", h.c_comp, h.ctx_hidden, derive_seed(seed, 10)) {}

std::vector<ParamTensor*> SebModel::params() {
  std::vector<ParamTensor*> out;
  seb_enc.collect_params(out);
  ref_dec.collect_params(out);
  flow_est.collect_params(out);
  comp_enc.collect_params(out);
  comp_dec.collect_params(out);
  res_enc.collect_params(out);
  res_dec.collect_params(out);
  em_seb.collect_params(out);
  em_res.collect_params(out);
  em_comp.collect_params(out);
  return out;
}

Checkpoint SebModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.hyper_json = hyper.to_json();
  auto params = const_cast<SebModel*>(this)->params();
  ckpt.tensors.reserve(params.size());
  for (const ParamTensor* p : params) ckpt.tensors.emplace_back(p->name, p->value);
  return ckpt;
}

SebModel SebModel::from_checkpoint(const Checkpoint& ckpt) {
  SebModel model(ModelHyper::from_json(ckpt.hyper_json), 0);
  std::map<std::string, const Tensor*> stored;
  for (const auto& [name, value] : ckpt.tensors) stored[name] = &value;
  size_t used = 0;
  for (ParamTensor* p : model.params()) {
    auto it = stored.find(p->name);
    if (it == stored.end()) throw IncompatError("checkpoint is missing tensor " + p->name);
    if (it->second->shape != p->value.shape)
      throw IncompatError("checkpoint tensor " + p->name + " has shape " +
                          it->second->shape_str() + ", expected " + p->value.shape_str());
    p->value = *it->second;
    ++used;
  }
  if (used != stored.size())
    throw IncompatError("checkpoint holds tensors unknown to this model");
  return model;
}

Tensor images_to_batch(const std::vector<Image>& images) {
  if (images.empty()) throw ParameterError("images_to_batch: empty set");
  const auto& s0 = images[0].pixels.shape;
  Tensor out({static_cast<int>(images.size()), s0[0], s0[1], s0[2]});
  const int64_t plane = images[0].pixels.size();
  for (size_t i = 0; i < images.size(); ++i) {
    if (images[i].pixels.shape != s0)
      throw ShapeError("images_to_batch: mixed image shapes");
    std::copy_n(images[i].pixels.ptr(), plane, out.ptr() + static_cast<int64_t>(i) * plane);
  }
  return out;
}

std::vector<Image> batch_to_images(const Tensor& batch) {
  if (batch.ndim() != 4) throw ShapeError("batch_to_images: want [N,C,H,W]");
  std::vector<Image> out(static_cast<size_t>(batch.dim(0)));
  const int64_t plane = batch.size() / batch.dim(0);
  for (int i = 0; i < batch.dim(0); ++i) {
    out[i].pixels = Tensor({batch.dim(1), batch.dim(2), batch.dim(3)});
    std::copy_n(batch.ptr() + i * plane, plane, out[i].pixels.ptr());
  }
  return out;
}

Tensor split_into_patches(const Tensor& images, int patch) {
  if (images.ndim() != 4) throw ShapeError("split_into_patches: want [N,C,H,W]");
  const int n = images.dim(0), C = images.dim(1), H = images.dim(2), W = images.dim(3);
  if (patch <= 0 || H % patch != 0 || W % patch != 0)
    throw ShapeError("split_into_patches: sides must be multiples of the patch size");
  const int rows = H / patch, cols = W / patch;
  Tensor out({n * rows * cols, C, patch, patch});
  for (int i = 0; i < n; ++i)
    for (int gy = 0; gy < rows; ++gy)
      for (int gx = 0; gx < cols; ++gx) {
        const int pi = (i * rows + gy) * cols + gx;
        for (int c = 0; c < C; ++c)
          for (int y = 0; y < patch; ++y)
            for (int x = 0; x < patch; ++x)
              out.at(pi, c, y, x) = images.at(i, c, gy * patch + y, gx * patch + x);
      }
  return out;
}

Tensor merge_from_patches(const Tensor& patches, int n, int height, int width) {
  if (patches.ndim() != 4) throw ShapeError("merge_from_patches: want [N,C,p,p]");
  const int C = patches.dim(1), ph = patches.dim(2), pw = patches.dim(3);
  if (ph <= 0 || height % ph != 0 || width % pw != 0)
    throw ShapeError("merge_from_patches: canvas not a multiple of the patch size");
  const int rows = height / ph, cols = width / pw;
  if (patches.dim(0) != n * rows * cols)
    throw ShapeError("merge_from_patches: patch count does not cover the canvas");
  Tensor out({n, C, height, width});
  for (int i = 0; i < n; ++i)
    for (int gy = 0; gy < rows; ++gy)
      for (int gx = 0; gx < cols; ++gx) {
        const int pi = (i * rows + gy) * cols + gx;
        for (int c = 0; c < C; ++c)
          for (int y = 0; y < ph; ++y)
            for (int x = 0; x < pw; ++x)
              out.at(i, c, gy * ph + y, gx * pw + x) = patches.at(pi, c, y, x);
      }
  return out;
}

StepStats train_step_graph(SebModel& model, const Tensor& images, double lambda, double beta,
                           uint64_t seed, Eigen::MatrixXd* warm_centers) {
  if (images.ndim() != 4 || images.dim(1) != 3)
    throw ShapeError("train_step_graph: want [N,3,H,W], got " + images.shape_str());
  const int n = images.dim(0), H = images.dim(2), W = images.dim(3);
  const int p = model.hyper.patch;
  if (H % p != 0 || W % p != 0)
    throw ShapeError("train_step_graph: image sides must be multiples of the patch size");
  const int n_p = (H / p) * (W / p);
  const int N = n * n_p;

  // patch latents and this step's codebook
  Tensor patches = split_into_patches(images, p);
  Tensor F = model.seb_enc.forward(patches);
  const int cs = F.dim(1), lh = F.dim(2), lw = F.dim(3);
  const int D = cs * lh * lw;
  Eigen::MatrixXd pts(N, D);
  for (int i = 0; i < N; ++i)
    for (int d = 0; d < D; ++d)
      pts(i, d) = static_cast<double>(F.ptr()[static_cast<int64_t>(i) * D + d]);

  const int K = seb_count_rule(n, n_p, model.hyper.seb_divisor);
  KMeansOptions kopts;
  if (warm_centers && warm_centers->rows() == K && warm_centers->cols() == D) {
    kopts.warm_start = warm_centers;
    kopts.max_iter = 10;
  }
  KMeansResult km = kmeans(pts, K, derive_seed(seed, 0), kopts);
  if (warm_centers) *warm_centers = km.centers;

  Tensor centers({K, cs, lh, lw});
  for (int k = 0; k < K; ++k)
    for (int d = 0; d < D; ++d)
      centers.ptr()[static_cast<int64_t>(k) * D + d] = static_cast<float>(km.centers(k, d));

  Rng noise(derive_seed(seed, 1));
  Tensor sebs_q = quantize(centers, QuantizeMode::kTrain, &noise);

  StepStats stats;
  stats.K = K;
  stats.bits_S = static_cast<double>(model.em_seb.bits(sebs_q));
  stats.bits_A = rate_A(n, n_p, K);

  // reference images from the decoded codebook, tiled by usage
  Tensor decoded = model.ref_dec.forward(sebs_q);
  Tensor tiled = tile_by_usage(decoded, km.labels);
  Tensor reference = merge_from_patches(tiled, n, H, W);

  // flow-compensated prediction
  Tensor flow = model.flow_est.forward(images, reference);
  Tensor zm = model.comp_enc.forward(flow);
  Tensor zm_q = quantize(zm, QuantizeMode::kTrain, &noise);
  model.em_comp.condition(reference);
  stats.bits_Zm = static_cast<double>(model.em_comp.bits(zm_q));
  Tensor flow_hat = model.comp_dec.forward(zm_q);
  WarpOpT<float> warp_op;
  Tensor prediction = warp_op.forward(reference, flow_hat);

  // residual codec; the training distortion stays unclamped
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
  stats.loss_reg = km.inertia;
  stats.loss_rd = lambda * stats.mse + stats.total_bits();
  const double pixels = static_cast<double>(n) * H * W;
  const double reg_norm = static_cast<double>(N) * D;
  stats.loss = lambda * stats.mse + stats.total_bits() / pixels + beta * km.inertia / reg_norm;
  stats.underflow = model.em_seb.underflow_flagged() || model.em_comp.underflow_flagged() ||
                    model.em_res.underflow_flagged();
  model.em_seb.clear_underflow_flag();
  model.em_comp.clear_underflow_flag();
  model.em_res.clear_underflow_flag();

  // backward; every bit term carries weight 1/pixels in the loss
  const float gbits = static_cast<float>(1.0 / pixels);
  Tensor gzr = model.res_dec.backward(grecon);
  {
    Tensor gzr_rate = model.em_res.backward(gbits);
    for (int64_t e = 0; e < gzr.size(); ++e) gzr.ptr()[e] += gzr_rate.ptr()[e];
  }
  Tensor gresidual = model.res_enc.backward(gzr);

  Tensor gprediction = grecon;  // through recon = prediction + residual_hat
  for (int64_t e = 0; e < gprediction.size(); ++e)
    gprediction.ptr()[e] -= gresidual.ptr()[e];  // residual = target - prediction

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

  Tensor gtiled = split_into_patches(greference, p);
  Tensor gdecoded = sum_by_label(gtiled, km.labels, K);
  Tensor gsebs = model.ref_dec.backward(gdecoded);
  {
    Tensor gsebs_rate = model.em_seb.backward(gbits);
    for (int64_t e = 0; e < gsebs.size(); ++e) gsebs.ptr()[e] += gsebs_rate.ptr()[e];
  }

  // straight-through: each member latent takes its Seb's whole gradient,
  // plus the pull of the regularizer toward the (stop-gradient) center
  Tensor gF = gather_by_label(gsebs, km.labels);
  const float greg = static_cast<float>(2.0 * beta / reg_norm);
  for (int i = 0; i < N; ++i) {
    const int k = km.labels[i];
    for (int d = 0; d < D; ++d) {
      const int64_t e = static_cast<int64_t>(i) * D + d;
      gF.ptr()[e] += greg * (F.ptr()[e] - centers.ptr()[static_cast<int64_t>(k) * D + d]);
    }
  }
  model.seb_enc.backward(gF);
  return stats;
}

}  // namespace sebcomm
