#include "sebcomm/transforms.hpp"

#include "sebcomm/rng.hpp"

namespace sebcomm {

template <typename S>
AnalysisTransformT<S>::AnalysisTransformT(std::string name, int in_c, int hidden_c, int out_c,
                                          uint64_t seed)
    : c1_(name + ".c1", in_c, hidden_c, 5, 2, 2, derive_seed(seed, 1)),
      c2_(name + ".c2", hidden_c, hidden_c, 5, 2, 2, derive_seed(seed, 2)),
      c3_(name + ".c3", hidden_c, hidden_c, 5, 2, 2, derive_seed(seed, 3)),
      c4_(name + ".c4", hidden_c, out_c, 5, 2, 2, derive_seed(seed, 4)),
      g1_(name + ".g1", hidden_c, false),
      g2_(name + ".g2", hidden_c, false),
      g3_(name + ".g3", hidden_c, false),
      g4_(name + ".g4", out_c, false) {}

template <typename S>
TensorT<S> AnalysisTransformT<S>::forward(const TensorT<S>& x) {
  return g4_.forward(c4_.forward(g3_.forward(c3_.forward(g2_.forward(c2_.forward(g1_.forward(c1_.forward(x))))))));
}

template <typename S>
TensorT<S> AnalysisTransformT<S>::backward(const TensorT<S>& gy) {
  return c1_.backward(g1_.backward(c2_.backward(g2_.backward(c3_.backward(g3_.backward(c4_.backward(g4_.backward(gy))))))));
}

template <typename S>
void AnalysisTransformT<S>::collect_params(std::vector<ParamTensorT<S>*>& out) {
  c1_.collect_params(out);
  g1_.collect_params(out);
  c2_.collect_params(out);
  g2_.collect_params(out);
  c3_.collect_params(out);
  g3_.collect_params(out);
  c4_.collect_params(out);
  g4_.collect_params(out);
}

template <typename S>
SynthesisTransformT<S>::SynthesisTransformT(std::string name, int in_c, int hidden_c, int out_c,
                                            uint64_t seed)
    : g1_(name + ".g1", in_c, true),
      g2_(name + ".g2", hidden_c, true),
      g3_(name + ".g3", hidden_c, true),
      g4_(name + ".g4", hidden_c, true),
      d1_(name + ".d1", in_c, hidden_c, 5, 2, 2, 1, derive_seed(seed, 1)),
      d2_(name + ".d2", hidden_c, hidden_c, 5, 2, 2, 1, derive_seed(seed, 2)),
      d3_(name + ".d3", hidden_c, hidden_c, 5, 2, 2, 1, derive_seed(seed, 3)),
      d4_(name + ".d4", hidden_c, out_c, 5, 2, 2, 1, derive_seed(seed, 4)) {}

template <typename S>
TensorT<S> SynthesisTransformT<S>::forward(const TensorT<S>& x) {
  return d4_.forward(g4_.forward(d3_.forward(g3_.forward(d2_.forward(g2_.forward(d1_.forward(g1_.forward(x))))))));
}

template <typename S>
TensorT<S> SynthesisTransformT<S>::backward(const TensorT<S>& gy) {
  return g1_.backward(d1_.backward(g2_.backward(d2_.backward(g3_.backward(d3_.backward(g4_.backward(d4_.backward(gy))))))));
}

template <typename S>
void SynthesisTransformT<S>::collect_params(std::vector<ParamTensorT<S>*>& out) {
  g1_.collect_params(out);
  d1_.collect_params(out);
  g2_.collect_params(out);
  d2_.collect_params(out);
  g3_.collect_params(out);
  d3_.collect_params(out);
  g4_.collect_params(out);
  d4_.collect_params(out);
}

template class AnalysisTransformT<float>;
template class AnalysisTransformT<double>;
template class SynthesisTransformT<float>;
template class SynthesisTransformT<double>;

}  // namespace sebcomm
