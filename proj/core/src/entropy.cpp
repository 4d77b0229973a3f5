#include "sebcomm/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "sebcomm/errors.hpp"

namespace sebcomm {

double price_bits(double mass, bool* underflow) {
  if (mass < kProbabilityFloor) {
    mass = kProbabilityFloor;
    if (underflow) *underflow = true;
  }
  return -std::log2(mass);
}

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kInvSqrt2 = 0.7071067811865476;

double stable_sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// sigmoid'(x) = sigmoid(x) * sigmoid(-x)
double sigmoid_grad(double x) { return stable_sigmoid(x) * stable_sigmoid(-x); }

// difference of sigmoids evaluated on the unsaturated side
double sigmoid_mass(double lo_logit, double hi_logit) {
  const double sign = (lo_logit + hi_logit <= 0.0) ? 1.0 : -1.0;
  return std::abs(stable_sigmoid(sign * hi_logit) - stable_sigmoid(sign * lo_logit));
}

double std_normal_cdf(double t) { return 0.5 * std::erfc(-t * kInvSqrt2); }
double std_normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

}  // namespace

// ------------------------------------------------- FactorizedEntropyModel

template <typename S>
struct FactorizedEntropyModelT<S>::Chain {
  S t;
  S v1[3], w1[3], v2[3], w2[3], v3[3], w3[3];
};

template <typename S>
FactorizedEntropyModelT<S>::FactorizedEntropyModelT(std::string name, int channels,
                                                    uint64_t seed)
    : h1(name + ".h1", {channels, 3}),
      b1(name + ".b1", {channels, 3}),
      a1(name + ".a1", {channels, 3}),
      h2(name + ".h2", {channels, 3, 3}),
      b2(name + ".b2", {channels, 3}),
      a2(name + ".a2", {channels, 3}),
      h3(name + ".h3", {channels, 3, 3}),
      b3(name + ".b3", {channels, 3}),
      a3(name + ".a3", {channels, 3}),
      h4(name + ".h4", {channels, 3}),
      b4(name + ".b4", {channels}),
      C_(channels) {
  if (channels <= 0) throw ParameterError(name + ": channels must be positive");
  // spread the initial CDF over roughly [-5, 5]: each layer contributes a
  // slope of 1/scale split across its fan-out
  const double scale = std::pow(10.0, 0.25);
  const double inner = std::log(std::expm1(1.0 / (scale * 3.0)));
  const double last = std::log(std::expm1(1.0 / scale));
  h1.value.fill(static_cast<S>(inner));
  h2.value.fill(static_cast<S>(inner));
  h3.value.fill(static_cast<S>(inner));
  h4.value.fill(static_cast<S>(last));
  Rng rng(seed);
  for (auto* b : {&b1, &b2, &b3, &b4})
    for (auto& v : b->value.data) v = static_cast<S>(rng.uniform(-0.5, 0.5));
  a1.value.fill(S(0));
  a2.value.fill(S(0));
  a3.value.fill(S(0));
}

template <typename S>
S FactorizedEntropyModelT<S>::logits_cached(int c, S t, Chain& k) const {
  const size_t cc = static_cast<size_t>(c);
  k.t = t;
  for (int i = 0; i < 3; ++i) {
    k.v1[i] = softplus(h1.value.data[cc * 3 + i]) * t + b1.value.data[cc * 3 + i];
    k.w1[i] = k.v1[i] + std::tanh(a1.value.data[cc * 3 + i]) * std::tanh(k.v1[i]);
  }
  for (int i = 0; i < 3; ++i) {
    S acc = b2.value.data[cc * 3 + i];
    for (int j = 0; j < 3; ++j) acc += softplus(h2.value.data[(cc * 3 + i) * 3 + j]) * k.w1[j];
    k.v2[i] = acc;
    k.w2[i] = acc + std::tanh(a2.value.data[cc * 3 + i]) * std::tanh(acc);
  }
  for (int i = 0; i < 3; ++i) {
    S acc = b3.value.data[cc * 3 + i];
    for (int j = 0; j < 3; ++j) acc += softplus(h3.value.data[(cc * 3 + i) * 3 + j]) * k.w2[j];
    k.v3[i] = acc;
    k.w3[i] = acc + std::tanh(a3.value.data[cc * 3 + i]) * std::tanh(acc);
  }
  S logit = b4.value.data[cc];
  for (int j = 0; j < 3; ++j) logit += softplus(h4.value.data[cc * 3 + j]) * k.w3[j];
  return logit;
}

template <typename S>
S FactorizedEntropyModelT<S>::logits(int c, S t) const {
  Chain k;
  return logits_cached(c, t, k);
}

template <typename S>
void FactorizedEntropyModelT<S>::backprop_chain(int c, S t, S glogit, S* gt) {
  Chain k;
  logits_cached(c, t, k);
  const size_t cc = static_cast<size_t>(c);

  S gw3[3], gv3[3], gw2[3], gv2[3], gw1[3], gv1[3];
  b4.grad.data[cc] += glogit;
  for (int j = 0; j < 3; ++j) {
    const S raw = h4.value.data[cc * 3 + j];
    h4.grad.data[cc * 3 + j] += glogit * k.w3[j] * static_cast<S>(stable_sigmoid(raw));
    gw3[j] = glogit * softplus(raw);
  }
  for (int i = 0; i < 3; ++i) {
    const S araw = a3.value.data[cc * 3 + i];
    const S tv = std::tanh(k.v3[i]);
    const S ta = std::tanh(araw);
    a3.grad.data[cc * 3 + i] += gw3[i] * tv * (S(1) - ta * ta);
    gv3[i] = gw3[i] * (S(1) + ta * (S(1) - tv * tv));
    b3.grad.data[cc * 3 + i] += gv3[i];
  }
  for (int j = 0; j < 3; ++j) {
    S acc = S(0);
    for (int i = 0; i < 3; ++i) {
      const S raw = h3.value.data[(cc * 3 + i) * 3 + j];
      h3.grad.data[(cc * 3 + i) * 3 + j] += gv3[i] * k.w2[j] * static_cast<S>(stable_sigmoid(raw));
      acc += gv3[i] * softplus(raw);
    }
    gw2[j] = acc;
  }
  for (int i = 0; i < 3; ++i) {
    const S araw = a2.value.data[cc * 3 + i];
    const S tv = std::tanh(k.v2[i]);
    const S ta = std::tanh(araw);
    a2.grad.data[cc * 3 + i] += gw2[i] * tv * (S(1) - ta * ta);
    gv2[i] = gw2[i] * (S(1) + ta * (S(1) - tv * tv));
    b2.grad.data[cc * 3 + i] += gv2[i];
  }
  for (int j = 0; j < 3; ++j) {
    S acc = S(0);
    for (int i = 0; i < 3; ++i) {
      const S raw = h2.value.data[(cc * 3 + i) * 3 + j];
      h2.grad.data[(cc * 3 + i) * 3 + j] += gv2[i] * k.w1[j] * static_cast<S>(stable_sigmoid(raw));
      acc += gv2[i] * softplus(raw);
    }
    gw1[j] = acc;
  }
  S gtacc = S(0);
  for (int i = 0; i < 3; ++i) {
    const S araw = a1.value.data[cc * 3 + i];
    const S tv = std::tanh(k.v1[i]);
    const S ta = std::tanh(araw);
    a1.grad.data[cc * 3 + i] += gw1[i] * tv * (S(1) - ta * ta);
    gv1[i] = gw1[i] * (S(1) + ta * (S(1) - tv * tv));
    b1.grad.data[cc * 3 + i] += gv1[i];
    const S raw = h1.value.data[cc * 3 + i];
    h1.grad.data[cc * 3 + i] += gv1[i] * k.t * static_cast<S>(stable_sigmoid(raw));
    gtacc += gv1[i] * softplus(raw);
  }
  if (gt) *gt += gtacc;
}

template <typename S>
S FactorizedEntropyModelT<S>::bin_mass(int channel, S z) const {
  const double hi = static_cast<double>(logits(channel, z + S(0.5)));
  const double lo = static_cast<double>(logits(channel, z - S(0.5)));
  return static_cast<S>(sigmoid_mass(lo, hi));
}

template <typename S>
S FactorizedEntropyModelT<S>::bits(const TensorT<S>& z) {
  if (z.ndim() != 4 || z.dim(1) != C_)
    throw ShapeError("factorized model: expected [N," + std::to_string(C_) + ",H,W], got " +
                     z.shape_str());
  if (!std::all_of(z.data.begin(), z.data.end(), [](S v) { return std::isfinite(v); }))
    throw NumericError("factorized model: non-finite latent");
  z_ = z;
  double total = 0.0;
  const int N = z.dim(0), H = z.dim(2), W = z.dim(3);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C_; ++c)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const S v = z.at(n, c, y, x);
          const double hi = static_cast<double>(logits(c, v + S(0.5)));
          const double lo = static_cast<double>(logits(c, v - S(0.5)));
          total += price_bits(sigmoid_mass(lo, hi), &underflow_);
        }
  return static_cast<S>(total);
}

template <typename S>
TensorT<S> FactorizedEntropyModelT<S>::backward(S gscale) {
  if (z_.empty()) throw StateError("factorized model: backward before bits");
  TensorT<S> gz(z_.shape);
  const int N = z_.dim(0), H = z_.dim(2), W = z_.dim(3);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C_; ++c)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const S v = z_.at(n, c, y, x);
          const double hi = static_cast<double>(logits(c, v + S(0.5)));
          const double lo = static_cast<double>(logits(c, v - S(0.5)));
          const double p = sigmoid_mass(lo, hi);
          if (p < kProbabilityFloor) continue;  // floored bin: flat
          const double gp = -static_cast<double>(gscale) / (p * kLn2);
          S gt = S(0);
          backprop_chain(c, v + S(0.5), static_cast<S>(gp * sigmoid_grad(hi)), &gt);
          backprop_chain(c, v - S(0.5), static_cast<S>(-gp * sigmoid_grad(lo)), &gt);
          gz.at(n, c, y, x) = gt;
        }
  return gz;
}

template <typename S>
void FactorizedEntropyModelT<S>::collect_params(std::vector<ParamTensorT<S>*>& out) {
  for (auto* p : {&h1, &b1, &a1, &h2, &b2, &a2, &h3, &b3, &a3, &h4, &b4}) out.push_back(p);
}

// --------------------------------------------- ConditionalGaussianModel

template <typename S>
ConditionalGaussianModelT<S>::ConditionalGaussianModelT(std::string name, int latent_channels,
                                                        int hidden, uint64_t seed)
    : c_(latent_channels),
      n1_(name + ".ctx1", 3, hidden, 5, 2, 2, derive_seed(seed, 1)),
      n2_(name + ".ctx2", hidden, hidden, 5, 2, 2, derive_seed(seed, 2)),
      n3_(name + ".ctx3", hidden, hidden, 5, 2, 2, derive_seed(seed, 3)),
      n4_(name + ".ctx4", hidden, 2 * latent_channels, 5, 2, 2, derive_seed(seed, 4)) {
  if (latent_channels <= 0) throw ParameterError(name + ": latent channels must be positive");
}

template <typename S>
void ConditionalGaussianModelT<S>::condition(const TensorT<S>& conditioning) {
  TensorT<S> t = n4_.forward(r3_.forward(n3_.forward(r2_.forward(n2_.forward(r1_.forward(n1_.forward(conditioning)))))));
  mu_ = slice_channels(t, 0, c_);
  sigma_raw_ = slice_channels(t, c_, c_);
  sigma_ = sigma_raw_;
  for (auto& v : sigma_.data) v = static_cast<S>(kSigmaMin) + softplus(v);
  conditioned_ = true;
  z_ = TensorT<S>();
}

template <typename S>
S ConditionalGaussianModelT<S>::bits(const TensorT<S>& z) {
  if (!conditioned_) throw StateError("conditional model: bits before condition");
  check_same_shape(z, mu_, "conditional model");
  if (!std::all_of(z.data.begin(), z.data.end(), [](S v) { return std::isfinite(v); }))
    throw NumericError("conditional model: non-finite latent");
  z_ = z;
  double total = 0.0;
  for (size_t i = 0; i < z.data.size(); ++i) {
    const double a = std::abs(static_cast<double>(z.data[i]) - static_cast<double>(mu_.data[i]));
    const double sigma = static_cast<double>(sigma_.data[i]);
    const double p = std_normal_cdf((0.5 - a) / sigma) - std_normal_cdf((-0.5 - a) / sigma);
    total += price_bits(p, &underflow_);
  }
  return static_cast<S>(total);
}

template <typename S>
TensorT<S> ConditionalGaussianModelT<S>::backward(S gscale, TensorT<S>* gcond) {
  if (z_.empty()) throw StateError("conditional model: backward before bits");
  TensorT<S> gz(z_.shape);
  // gradient buffer over the context net output [N, 2c, h, w]
  TensorT<S> gnet({mu_.dim(0), 2 * c_, mu_.dim(2), mu_.dim(3)});
  for (size_t i = 0; i < z_.data.size(); ++i) {
    const double v = static_cast<double>(z_.data[i]) - static_cast<double>(mu_.data[i]);
    const double a = std::abs(v);
    const double sgn = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    const double sigma = static_cast<double>(sigma_.data[i]);
    const double hi = (0.5 - a) / sigma;
    const double lo = (-0.5 - a) / sigma;
    const double p = std_normal_cdf(hi) - std_normal_cdf(lo);
    if (p < kProbabilityFloor) continue;
    const double gp = -static_cast<double>(gscale) / (p * kLn2);
    const double phi_hi = std_normal_pdf(hi), phi_lo = std_normal_pdf(lo);
    const double dp_da = (phi_lo - phi_hi) / sigma;
    const double dp_dv = dp_da * sgn;
    const double dp_dsigma = (phi_lo * lo - phi_hi * hi) / sigma;
    gz.data[i] = static_cast<S>(gp * dp_dv);
    const double gmu = -gp * dp_dv;
    const double gsigma = gp * dp_dsigma;
    const double gsigma_raw = gsigma * stable_sigmoid(static_cast<double>(sigma_raw_.data[i]));
    // scatter into the [mu | sigma_raw] channel split
    const int hw = mu_.dim(2) * mu_.dim(3);
    const int chw = c_ * hw;
    const int n = static_cast<int>(i) / chw;
    const int rem = static_cast<int>(i) % chw;
    const int c = rem / hw;
    const int pos = rem % hw;
    gnet.data[(static_cast<size_t>(n) * 2 * c_ + c) * hw + pos] = static_cast<S>(gmu);
    gnet.data[(static_cast<size_t>(n) * 2 * c_ + c_ + c) * hw + pos] = static_cast<S>(gsigma_raw);
  }
  TensorT<S> g = n1_.backward(r1_.backward(n2_.backward(r2_.backward(n3_.backward(r3_.backward(n4_.backward(gnet)))))));
  if (gcond) {
    if (gcond->empty())
      *gcond = std::move(g);
    else {
      check_same_shape(*gcond, g, "conditional model gradient");
      for (size_t i = 0; i < g.data.size(); ++i) gcond->data[i] += g.data[i];
    }
  }
  return gz;
}

template <typename S>
void ConditionalGaussianModelT<S>::collect_params(std::vector<ParamTensorT<S>*>& out) {
  n1_.collect_params(out);
  n2_.collect_params(out);
  n3_.collect_params(out);
  n4_.collect_params(out);
}

// ------------------------------------------------------------- quantize

template <typename S>
TensorT<S> quantize(const TensorT<S>& x, QuantizeMode mode, Rng* rng) {
  TensorT<S> out = x;
  if (mode == QuantizeMode::kTrain) {
    if (!rng) throw ParameterError("quantize: train mode needs an rng");
    for (auto& v : out.data) v += static_cast<S>(rng->uniform() - 0.5);
  } else {
    // round half to even for cross-run determinism
    for (auto& v : out.data) v = static_cast<S>(std::nearbyint(static_cast<double>(v)));
  }
  return out;
}

template TensorT<float> quantize<float>(const TensorT<float>&, QuantizeMode, Rng*);
template TensorT<double> quantize<double>(const TensorT<double>&, QuantizeMode, Rng*);
template class FactorizedEntropyModelT<float>;
template class FactorizedEntropyModelT<double>;
template class ConditionalGaussianModelT<float>;
template class ConditionalGaussianModelT<double>;

}  // namespace sebcomm
