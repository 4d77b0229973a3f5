#ifndef SEBCOMM_TRANSFORMS_HPP_
#define SEBCOMM_TRANSFORMS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sebcomm/layers.hpp"

namespace sebcomm {

// 4-stage strided analysis transform: [Conv k5 s2 p2 -> GDN] x4, total 16x
// spatial downsampling. Channel plan in -> hidden -> hidden -> hidden -> out.
template <typename S>
class AnalysisTransformT {
 public:
  AnalysisTransformT(std::string name, int in_c, int hidden_c, int out_c, uint64_t seed);

  TensorT<S> forward(const TensorT<S>& x);
  TensorT<S> backward(const TensorT<S>& gy);
  void collect_params(std::vector<ParamTensorT<S>*>& out);

  int in_channels() const { return c1_.in_channels(); }
  int out_channels() const { return c4_.out_channels(); }

  Conv2dT<S> c1_, c2_, c3_, c4_;
  GDNT<S> g1_, g2_, g3_, g4_;
};

// Mirror of the analysis transform: [IGDN -> Deconv k5 s2 p2 op1] x4, 16x
// upsampling; restores the analysis input shape for 16-divisible inputs.
template <typename S>
class SynthesisTransformT {
 public:
  SynthesisTransformT(std::string name, int in_c, int hidden_c, int out_c, uint64_t seed);

  TensorT<S> forward(const TensorT<S>& x);
  TensorT<S> backward(const TensorT<S>& gy);
  void collect_params(std::vector<ParamTensorT<S>*>& out);

  GDNT<S> g1_, g2_, g3_, g4_;
  ConvTranspose2dT<S> d1_, d2_, d3_, d4_;
};

using AnalysisTransform = AnalysisTransformT<float>;
using SynthesisTransform = SynthesisTransformT<float>;

}  // namespace sebcomm

#endif  // SEBCOMM_TRANSFORMS_HPP_
