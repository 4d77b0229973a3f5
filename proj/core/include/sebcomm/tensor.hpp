#ifndef SEBCOMM_TENSOR_HPP_
#define SEBCOMM_TENSOR_HPP_

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sebcomm/errors.hpp"

namespace sebcomm {

// Dense row-major tensor. Most of the pipeline uses rank 3 ([C,H,W] images
// and latents) and rank 4 ([N,C,H,W] batches). Scalar type is a template
// parameter so gradient checks can run the exact same code in double.
template <typename S>
struct TensorT {
  std::vector<int> shape;
  std::vector<S> data;

  TensorT() = default;
  explicit TensorT(std::vector<int> s, S fill = S(0)) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(count(shape)), fill);
  }

  static int64_t count(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw ShapeError("negative tensor dimension");
      n *= d;
    }
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape.at(static_cast<size_t>(i)); }
  bool empty() const { return data.empty(); }

  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  // rank-3 accessors
  S& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
  }
  S at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
  }
  // rank-4 accessors
  S& at(int n, int c, int y, int x) {
    return data[((static_cast<size_t>(n) * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }
  S at(int n, int c, int y, int x) const {
    return data[((static_cast<size_t>(n) * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  void fill(S v) { std::fill(data.begin(), data.end(), v); }

  template <typename T>
  TensorT<T> cast() const {
    TensorT<T> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
    return out;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
  }
};

using Tensor = TensorT<float>;

template <typename S>
TensorT<S> zeros_like(const TensorT<S>& t) {
  return TensorT<S>(t.shape);
}

template <typename S>
void check_same_shape(const TensorT<S>& a, const TensorT<S>& b, const char* where) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
}

}  // namespace sebcomm

#endif  // SEBCOMM_TENSOR_HPP_
