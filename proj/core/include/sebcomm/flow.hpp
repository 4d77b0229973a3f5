#ifndef SEBCOMM_FLOW_HPP_
#define SEBCOMM_FLOW_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sebcomm/layers.hpp"

namespace sebcomm {

// Displacement fields are [N,2,H,W]: channel 0 is the horizontal shift dx,
// channel 1 the vertical shift dy, in pixels. warp samples the reference at
// (x+dx, y+dy) bilinearly, clamping coordinates to the border (replication).

template <typename S>
TensorT<S> warp(const TensorT<S>& reference, const TensorT<S>& flow);

// warp with gradients: caches the forward pair, backward scatters into the
// reference and differentiates the sampling point w.r.t. the flow (clamped
// coordinates contribute zero flow gradient).
template <typename S>
class WarpOpT {
 public:
  TensorT<S> forward(const TensorT<S>& reference, const TensorT<S>& flow);
  void backward(const TensorT<S>& gy, TensorT<S>& greference, TensorT<S>& gflow);

 private:
  TensorT<S> ref_, flow_;
};

// 2-level coarse-to-fine flow estimator. Each level runs three 3x3 convs
// (8->f, ReLU, f->f, ReLU, f->2) on [target | warped reference | upsampled
// flow]; the final conv of each level is zero-initialized so the estimator
// starts at exactly zero flow. Upsampling a flow field doubles its values.
template <typename S>
class FlowEstimatorT {
 public:
  FlowEstimatorT(std::string name, int hidden, uint64_t seed);

  TensorT<S> forward(const TensorT<S>& target, const TensorT<S>& reference);
  // gradients w.r.t. both inputs are accumulated into non-null outputs
  void backward(const TensorT<S>& gflow, TensorT<S>* gtarget, TensorT<S>* greference);
  void collect_params(std::vector<ParamTensorT<S>*>& out);

  Conv2dT<S> l1a_, l1b_, l1c_;  // coarse level, half resolution
  Conv2dT<S> l0a_, l0b_, l0c_;  // fine level, full resolution

 private:
  ReLUT<S> r1a_, r1b_, r0a_, r0b_;
  AvgPool2xT<S> pool_t_, pool_r_;
  Upsample2xT<S> up_;
  WarpOpT<S> warp_;
  std::vector<int> in_shape_;
};

using FlowEstimator = FlowEstimatorT<float>;

}  // namespace sebcomm

#endif  // SEBCOMM_FLOW_HPP_
