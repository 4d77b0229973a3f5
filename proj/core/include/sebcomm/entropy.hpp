#ifndef SEBCOMM_ENTROPY_HPP_
#define SEBCOMM_ENTROPY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sebcomm/layers.hpp"
#include "sebcomm/rng.hpp"
#include "sebcomm/tensor.hpp"

namespace sebcomm {

enum class QuantizeMode { kTrain, kEval };

// train: additive uniform noise in [-0.5,0.5) as the differentiable proxy;
// eval: round half to even. Gradient of both is treated as identity.
template <typename S>
TensorT<S> quantize(const TensorT<S>& x, QuantizeMode mode, Rng* rng = nullptr);

// Probability floor shared by both entropy models. An element whose
// probability mass underflows the floor is priced at 32 bits and drops out
// of the gradient; the event is flagged for diagnostics.
constexpr double kProbabilityFloor = 2.328306436538696e-10;  // 2^-32

// Code length of one element whose bin has probability mass p, in bits.
// Mass below the floor is clamped to it (32 bits) and *underflow, when
// given, is set. Both entropy models price elements through this rule.
double price_bits(double mass, bool* underflow = nullptr);

// Fully factorized (non-parametric) entropy model: one learned univariate
// CDF per channel, built from a 4-layer monotone scalar chain
//   f(t) = H4 g3(H3 g2(H2 g1(H1 t + b1) + b2) + b3) + b4,
//   g_k(u) = u + tanh(a_k) * tanh(u),  H_k = softplus(raw),
// with cdf = sigmoid(f). Mass of integer bin z is cdf(z+1/2) - cdf(z-1/2).
template <typename S>
class FactorizedEntropyModelT {
 public:
  FactorizedEntropyModelT(std::string name, int channels, uint64_t seed);

  // total bits = sum over elements of -log2(mass); z is [N,C,H,W]
  S bits(const TensorT<S>& z);
  // gradient of (gscale * bits); accumulates param grads, returns dz
  TensorT<S> backward(S gscale);
  void collect_params(std::vector<ParamTensorT<S>*>& out);

  int channels() const { return C_; }
  bool underflow_flagged() const { return underflow_; }
  void clear_underflow_flag() { underflow_ = false; }

  // per-bin mass of the channel's learned pmf, for tests
  S bin_mass(int channel, S z) const;

  ParamTensorT<S> h1, b1, a1;  // [C,3], [C,3], [C,3]
  ParamTensorT<S> h2, b2, a2;  // [C,3,3], [C,3], [C,3]
  ParamTensorT<S> h3, b3, a3;  // [C,3,3], [C,3], [C,3]
  ParamTensorT<S> h4, b4;      // [C,3], [C,1]

 private:
  struct Chain;  // forward intermediates of one scalar evaluation
  S logits(int c, S t) const;
  S logits_cached(int c, S t, Chain& cache) const;
  void backprop_chain(int c, S t, S glogit, S* gt);

  int C_;
  bool underflow_ = false;
  TensorT<S> z_;
};

// Conditional Gaussian entropy model: a small convolutional context net
// maps the conditioning image to per-element (mu, sigma) of the latent
// grid, and each quantized element is priced by the Gaussian mass of its
// bin. The conditioning input is available at the receiver, so pricing
// needs no extra side information.
template <typename S>
class ConditionalGaussianModelT {
 public:
  ConditionalGaussianModelT(std::string name, int latent_channels, int hidden, uint64_t seed);

  // run the context net; output grid is 16x downsampled from the input
  void condition(const TensorT<S>& conditioning);
  // total bits of z (shape must match the conditioned grid)
  S bits(const TensorT<S>& z);
  // returns dz; accumulates net param grads; if gcond is non-null, adds the
  // gradient w.r.t. the conditioning input into it
  TensorT<S> backward(S gscale, TensorT<S>* gcond = nullptr);
  void collect_params(std::vector<ParamTensorT<S>*>& out);

  int latent_channels() const { return c_; }
  bool underflow_flagged() const { return underflow_; }
  void clear_underflow_flag() { underflow_ = false; }
  const TensorT<S>& mu() const { return mu_; }
  const TensorT<S>& sigma() const { return sigma_; }

  static constexpr double kSigmaMin = 0.11;

 private:
  int c_;
  bool underflow_ = false;
  bool conditioned_ = false;
  Conv2dT<S> n1_, n2_, n3_, n4_;
  ReLUT<S> r1_, r2_, r3_;
  TensorT<S> mu_, sigma_raw_, sigma_, z_;
};

using FactorizedEntropyModel = FactorizedEntropyModelT<float>;
using ConditionalGaussianModel = ConditionalGaussianModelT<float>;

}  // namespace sebcomm

#endif  // SEBCOMM_ENTROPY_HPP_
