#ifndef SEBCOMM_LAYERS_HPP_
#define SEBCOMM_LAYERS_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sebcomm/tensor.hpp"

namespace sebcomm {

// Every layer is templated on the scalar so gradient checks can run the
// exact same code in double. Production instantiates float.
template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct ParamTensorT {
  std::string name;
  TensorT<S> value;
  TensorT<S> grad;

  ParamTensorT() = default;
  ParamTensorT(std::string n, std::vector<int> shape)
      : name(std::move(n)), value(shape), grad(shape) {}

  void zero_grad() { grad.fill(S(0)); }
};

template <typename S>
S softplus(S x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, S(0));
}
template <typename S>
S sigmoid(S x) {
  return x >= S(0) ? S(1) / (S(1) + std::exp(-x)) : std::exp(x) / (S(1) + std::exp(x));
}

// All tensors passing through layers are [N,C,H,W]. forward caches what
// backward needs; backward accumulates into param grads and returns the
// input gradient. One forward per backward.
template <typename S>
class Conv2dT {
 public:
  Conv2dT(std::string name, int in_c, int out_c, int k, int stride, int pad, uint64_t seed);

  TensorT<S> forward(const TensorT<S>& x);
  TensorT<S> backward(const TensorT<S>& gy);
  void collect_params(std::vector<ParamTensorT<S>*>& out);

  static int out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
  }
  int in_channels() const { return in_c_; }
  int out_channels() const { return out_c_; }

  ParamTensorT<S> weight;  // [out_c,in_c,k,k]
  ParamTensorT<S> bias;    // [out_c]

 private:
  int in_c_, out_c_, k_, stride_, pad_;
  TensorT<S> x_;
};

// Mirror of Conv2dT: output side (in-1)*stride - 2*pad + k + out_pad.
template <typename S>
class ConvTranspose2dT {
 public:
  ConvTranspose2dT(std::string name, int in_c, int out_c, int k, int stride, int pad,
                   int out_pad, uint64_t seed);

  TensorT<S> forward(const TensorT<S>& x);
  TensorT<S> backward(const TensorT<S>& gy);
  void collect_params(std::vector<ParamTensorT<S>*>& out);

  static int out_dim(int in, int k, int stride, int pad, int out_pad) {
    return (in - 1) * stride - 2 * pad + k + out_pad;
  }

  ParamTensorT<S> weight;  // [in_c,out_c,k,k]
  ParamTensorT<S> bias;    // [out_c]

 private:
  int in_c_, out_c_, k_, stride_, pad_, out_pad_;
  TensorT<S> x_;
};

// Generalized divisive normalization,
//   y_i = x_i * (beta_i + sum_j gamma_ij x_j^2)^(-1/2)
// per spatial position; the inverse flag flips the exponent sign. beta and
// gamma are stored through a squared-offset reparameterization so the
// constraints beta >= 1e-6, gamma >= 0 survive unconstrained updates:
// effective = max(raw, bound)^2 - pedestal with pedestal = offset^2.
template <typename S>
class GDNT {
 public:
  GDNT(std::string name, int channels, bool inverse, double gamma_init = 0.1);

  TensorT<S> forward(const TensorT<S>& x);
  TensorT<S> backward(const TensorT<S>& gy);
  void collect_params(std::vector<ParamTensorT<S>*>& out);

  VecX<S> effective_beta() const;
  MatX<S> effective_gamma() const;
  // identity configuration used by sanity tests: beta = 1, gamma = 0
  void set_identity();

  ParamTensorT<S> beta_raw;   // [C]
  ParamTensorT<S> gamma_raw;  // [C,C]

 private:
  int C_;
  bool inverse_;
  TensorT<S> x_;
  MatX<S> z_;  // cached denominators, [C, N*H*W]
};

template <typename S>
class ReLUT {
 public:
  TensorT<S> forward(const TensorT<S>& x);
  TensorT<S> backward(const TensorT<S>& gy);

 private:
  std::vector<uint8_t> mask_;
  std::vector<int> shape_;
};

// 2x2 mean pooling, stride 2; input sides must be even.
template <typename S>
class AvgPool2xT {
 public:
  TensorT<S> forward(const TensorT<S>& x);
  TensorT<S> backward(const TensorT<S>& gy);

 private:
  std::vector<int> x_shape_;
};

// 2x bilinear upsampling with half-pixel centers.
template <typename S>
class Upsample2xT {
 public:
  TensorT<S> forward(const TensorT<S>& x);
  TensorT<S> backward(const TensorT<S>& gy);

 private:
  std::vector<int> x_shape_;
};

// channel concatenation/split over [N,C,H,W], used to build composite
// inputs; composites run the matching slice in their backward pass
template <typename S>
TensorT<S> concat_channels(const std::vector<const TensorT<S>*>& parts);
template <typename S>
TensorT<S> slice_channels(const TensorT<S>& x, int from, int count);
// adds gy into the channel range [from, from+gy.C) of gx
template <typename S>
void add_into_channels(TensorT<S>& gx, const TensorT<S>& gy, int from);

template <typename S>
class AdamT {
 public:
  explicit AdamT(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : b1_(beta1), b2_(beta2), eps_(eps) {}

  void attach(std::vector<ParamTensorT<S>*> params);  // resets moments
  void step(double lr);
  void zero_grad();
  long step_count() const { return t_; }

  // moment access for checkpointing
  std::vector<ParamTensorT<S>*>& params() { return params_; }
  std::vector<std::vector<S>>& m() { return m_; }
  std::vector<std::vector<S>>& v() { return v_; }
  void set_step_count(long t) { t_ = t; }

 private:
  std::vector<ParamTensorT<S>*> params_;
  std::vector<std::vector<S>> m_, v_;
  double b1_, b2_, eps_;
  long t_ = 0;
};

using ParamTensor = ParamTensorT<float>;
using Conv2d = Conv2dT<float>;
using ConvTranspose2d = ConvTranspose2dT<float>;
using GDN = GDNT<float>;
using ReLU = ReLUT<float>;
using Adam = AdamT<float>;

}  // namespace sebcomm

#endif  // SEBCOMM_LAYERS_HPP_
