#include "sebcomm/flow.hpp"

#include <algorithm>
#include <cmath>

#include "sebcomm/errors.hpp"
#include "sebcomm/rng.hpp"

namespace sebcomm {

namespace {

template <typename S>
void check_warp_shapes(const TensorT<S>& ref, const TensorT<S>& flow) {
  if (ref.ndim() != 4 || flow.ndim() != 4 || flow.dim(1) != 2 || ref.dim(0) != flow.dim(0) ||
      ref.dim(2) != flow.dim(2) || ref.dim(3) != flow.dim(3))
    throw ShapeError("warp: reference " + ref.shape_str() + " vs flow " + flow.shape_str());
}

// taps of one bilinear sample at coordinate s in [0, n-1] after clamping;
// interior reports whether the coordinate kept its derivative
template <typename S>
void sample_taps(S s, int n, int& i0, int& i1, S& f, bool& interior) {
  interior = (s > S(0) && s < S(n - 1));
  s = std::clamp(s, S(0), S(n - 1));
  S fl = std::floor(s);
  f = s - fl;
  i0 = static_cast<int>(fl);
  i1 = std::min(i0 + 1, n - 1);
}

}  // namespace

template <typename S>
TensorT<S> warp(const TensorT<S>& reference, const TensorT<S>& flow) {
  check_warp_shapes(reference, flow);
  const int N = reference.dim(0), C = reference.dim(1), H = reference.dim(2),
            W = reference.dim(3);
  TensorT<S> out({N, C, H, W});
  for (int n = 0; n < N; ++n)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const S sx = S(x) + flow.at(n, 0, y, x);
        const S sy = S(y) + flow.at(n, 1, y, x);
        int x0, x1, y0, y1;
        S fx, fy;
        bool ix, iy;
        sample_taps(sx, W, x0, x1, fx, ix);
        sample_taps(sy, H, y0, y1, fy, iy);
        for (int c = 0; c < C; ++c)
          out.at(n, c, y, x) =
              (S(1) - fy) * ((S(1) - fx) * reference.at(n, c, y0, x0) + fx * reference.at(n, c, y0, x1)) +
              fy * ((S(1) - fx) * reference.at(n, c, y1, x0) + fx * reference.at(n, c, y1, x1));
      }
  return out;
}

template <typename S>
TensorT<S> WarpOpT<S>::forward(const TensorT<S>& reference, const TensorT<S>& flow) {
  ref_ = reference;
  flow_ = flow;
  return warp(reference, flow);
}

template <typename S>
void WarpOpT<S>::backward(const TensorT<S>& gy, TensorT<S>& greference, TensorT<S>& gflow) {
  const int N = ref_.dim(0), C = ref_.dim(1), H = ref_.dim(2), W = ref_.dim(3);
  if (greference.empty()) greference = TensorT<S>(ref_.shape);
  if (gflow.empty()) gflow = TensorT<S>(flow_.shape);
  for (int n = 0; n < N; ++n)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const S sx = S(x) + flow_.at(n, 0, y, x);
        const S sy = S(y) + flow_.at(n, 1, y, x);
        int x0, x1, y0, y1;
        S fx, fy;
        bool ix, iy;
        sample_taps(sx, W, x0, x1, fx, ix);
        sample_taps(sy, H, y0, y1, fy, iy);
        S gdx = S(0), gdy = S(0);
        for (int c = 0; c < C; ++c) {
          const S g = gy.at(n, c, y, x);
          const S r00 = ref_.at(n, c, y0, x0), r01 = ref_.at(n, c, y0, x1);
          const S r10 = ref_.at(n, c, y1, x0), r11 = ref_.at(n, c, y1, x1);
          greference.at(n, c, y0, x0) += g * (S(1) - fy) * (S(1) - fx);
          greference.at(n, c, y0, x1) += g * (S(1) - fy) * fx;
          greference.at(n, c, y1, x0) += g * fy * (S(1) - fx);
          greference.at(n, c, y1, x1) += g * fy * fx;
          gdx += g * ((S(1) - fy) * (r01 - r00) + fy * (r11 - r10));
          gdy += g * ((S(1) - fx) * (r10 - r00) + fx * (r11 - r01));
        }
        if (ix) gflow.at(n, 0, y, x) += gdx;
        if (iy) gflow.at(n, 1, y, x) += gdy;
      }
}

template <typename S>
FlowEstimatorT<S>::FlowEstimatorT(std::string name, int hidden, uint64_t seed)
    : l1a_(name + ".l1a", 8, hidden, 3, 1, 1, derive_seed(seed, 1)),
      l1b_(name + ".l1b", hidden, hidden, 3, 1, 1, derive_seed(seed, 2)),
      l1c_(name + ".l1c", hidden, 2, 3, 1, 1, derive_seed(seed, 3)),
      l0a_(name + ".l0a", 8, hidden, 3, 1, 1, derive_seed(seed, 4)),
      l0b_(name + ".l0b", hidden, hidden, 3, 1, 1, derive_seed(seed, 5)),
      l0c_(name + ".l0c", hidden, 2, 3, 1, 1, derive_seed(seed, 6)) {
  l1c_.weight.value.fill(S(0));
  l0c_.weight.value.fill(S(0));
}

template <typename S>
TensorT<S> FlowEstimatorT<S>::forward(const TensorT<S>& target, const TensorT<S>& reference) {
  check_same_shape(target, reference, "flow estimator");
  if (target.ndim() != 4 || target.dim(1) != 3)
    throw ShapeError("flow estimator: expected [N,3,H,W], got " + target.shape_str());
  in_shape_ = target.shape;

  TensorT<S> t1 = pool_t_.forward(target);
  TensorT<S> r1 = pool_r_.forward(reference);
  TensorT<S> zero_flow({t1.dim(0), 2, t1.dim(2), t1.dim(3)});
  TensorT<S> in1 = concat_channels<S>({&t1, &r1, &zero_flow});
  TensorT<S> f1 = l1c_.forward(r1b_.forward(l1b_.forward(r1a_.forward(l1a_.forward(in1)))));

  TensorT<S> up = up_.forward(f1);
  for (auto& v : up.data) v *= S(2);
  TensorT<S> warped = warp_.forward(reference, up);
  TensorT<S> in0 = concat_channels<S>({&target, &warped, &up});
  TensorT<S> f0 = l0c_.forward(r0b_.forward(l0b_.forward(r0a_.forward(l0a_.forward(in0)))));

  for (size_t i = 0; i < f0.data.size(); ++i) f0.data[i] += up.data[i];
  return f0;
}

template <typename S>
void FlowEstimatorT<S>::backward(const TensorT<S>& gflow, TensorT<S>* gtarget,
                                 TensorT<S>* greference) {
  TensorT<S> gt(in_shape_), gr(in_shape_);
  TensorT<S> gup = gflow;  // the additive skip path

  TensorT<S> gin0 = l0a_.backward(r0a_.backward(l0b_.backward(r0b_.backward(l0c_.backward(gflow)))));
  add_into_channels(gt, slice_channels(gin0, 0, 3), 0);
  TensorT<S> gwarped = slice_channels(gin0, 3, 3);
  add_into_channels(gup, slice_channels(gin0, 6, 2), 0);
  warp_.backward(gwarped, gr, gup);

  for (auto& v : gup.data) v *= S(2);
  TensorT<S> gf1 = up_.backward(gup);
  TensorT<S> gin1 = l1a_.backward(r1a_.backward(l1b_.backward(r1b_.backward(l1c_.backward(gf1)))));
  TensorT<S> gt1 = pool_t_.backward(slice_channels(gin1, 0, 3));
  TensorT<S> gr1 = pool_r_.backward(slice_channels(gin1, 3, 3));
  for (size_t i = 0; i < gt.data.size(); ++i) {
    gt.data[i] += gt1.data[i];
    gr.data[i] += gr1.data[i];
  }

  if (gtarget) {
    if (gtarget->empty()) *gtarget = TensorT<S>(in_shape_);
    for (size_t i = 0; i < gt.data.size(); ++i) gtarget->data[i] += gt.data[i];
  }
  if (greference) {
    if (greference->empty()) *greference = TensorT<S>(in_shape_);
    for (size_t i = 0; i < gr.data.size(); ++i) greference->data[i] += gr.data[i];
  }
}

template <typename S>
void FlowEstimatorT<S>::collect_params(std::vector<ParamTensorT<S>*>& out) {
  l1a_.collect_params(out);
  l1b_.collect_params(out);
  l1c_.collect_params(out);
  l0a_.collect_params(out);
  l0b_.collect_params(out);
  l0c_.collect_params(out);
}

template TensorT<float> warp<float>(const TensorT<float>&, const TensorT<float>&);
template TensorT<double> warp<double>(const TensorT<double>&, const TensorT<double>&);
template class WarpOpT<float>;
template class WarpOpT<double>;
template class FlowEstimatorT<float>;
template class FlowEstimatorT<double>;

}  // namespace sebcomm
