#include "sebcomm/layers.hpp"

#include <algorithm>
#include <cmath>

#include "sebcomm/errors.hpp"
#include "sebcomm/rng.hpp"

namespace sebcomm {

namespace {

template <typename S>
void check_input(const TensorT<S>& x, int channels, const std::string& who) {
  if (x.ndim() != 4) throw ShapeError(who + ": expected [N,C,H,W], got " + x.shape_str());
  if (x.dim(1) != channels)
    throw ShapeError(who + ": expected " + std::to_string(channels) + " channels, got " +
                     x.shape_str());
}

// cols(r, (n*oh+oy)*ow+ox) = x[n, c, oy*stride-pad+ky, ox*stride-pad+kx]
// with r = (c*k+ky)*k+kx and zeros outside the input.
template <typename S>
MatX<S> im2col(const TensorT<S>& x, int k, int stride, int pad, int oh, int ow) {
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  MatX<S> cols = MatX<S>::Zero(static_cast<Eigen::Index>(C) * k * k,
                               static_cast<Eigen::Index>(N) * oh * ow);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const Eigen::Index row = (static_cast<Eigen::Index>(c) * k + ky) * k + kx;
          for (int oy = 0; oy < oh; ++oy) {
            const int sy = oy * stride - pad + ky;
            if (sy < 0 || sy >= H) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int sx = ox * stride - pad + kx;
              if (sx < 0 || sx >= W) continue;
              cols(row, (static_cast<Eigen::Index>(n) * oh + oy) * ow + ox) = x.at(n, c, sy, sx);
            }
          }
        }
  return cols;
}

// adjoint of im2col: scatter-add columns back onto the [N,C,H,W] canvas
template <typename S>
TensorT<S> col2im(const MatX<S>& cols, int N, int C, int H, int W, int k, int stride, int pad,
                  int oh, int ow) {
  TensorT<S> x({N, C, H, W});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const Eigen::Index row = (static_cast<Eigen::Index>(c) * k + ky) * k + kx;
          for (int oy = 0; oy < oh; ++oy) {
            const int sy = oy * stride - pad + ky;
            if (sy < 0 || sy >= H) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int sx = ox * stride - pad + kx;
              if (sx < 0 || sx >= W) continue;
              x.at(n, c, sy, sx) += cols(row, (static_cast<Eigen::Index>(n) * oh + oy) * ow + ox);
            }
          }
        }
  return x;
}

// [N,C,H,W] tensor <-> [C, N*H*W] matrix with column (n*H+y)*W+x
template <typename S>
MatX<S> to_channel_mat(const TensorT<S>& x) {
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  MatX<S> m(C, static_cast<Eigen::Index>(N) * H * W);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx)
          m(c, (static_cast<Eigen::Index>(n) * H + y) * W + xx) = x.at(n, c, y, xx);
  return m;
}

template <typename S>
TensorT<S> from_channel_mat(const MatX<S>& m, int N, int H, int W) {
  const int C = static_cast<int>(m.rows());
  TensorT<S> x({N, C, H, W});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx)
          x.at(n, c, y, xx) = m(c, (static_cast<Eigen::Index>(n) * H + y) * W + xx);
  return x;
}

template <typename S>
void init_conv_weights(ParamTensorT<S>& weight, ParamTensorT<S>& bias, int fan_in,
                       uint64_t seed) {
  Rng rng(seed);
  const double stddev = std::sqrt(1.0 / fan_in);
  for (auto& w : weight.value.data) w = static_cast<S>(stddev * rng.normal());
  bias.value.fill(S(0));
}

template <typename S>
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename S>
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename S>
Conv2dT<S>::Conv2dT(std::string name, int in_c, int out_c, int k, int stride, int pad,
                    uint64_t seed)
    : weight(name + ".weight", {out_c, in_c, k, k}),
      bias(name + ".bias", {out_c}),
      in_c_(in_c),
      out_c_(out_c),
      k_(k),
      stride_(stride),
      pad_(pad) {
  if (in_c <= 0 || out_c <= 0 || k <= 0 || stride <= 0 || pad < 0)
    throw ParameterError(name + ": bad convolution geometry");
  init_conv_weights(weight, bias, in_c * k * k, seed);
}

template <typename S>
TensorT<S> Conv2dT<S>::forward(const TensorT<S>& x) {
  check_input(x, in_c_, weight.name);
  const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
  const int oh = out_dim(H, k_, stride_, pad_), ow = out_dim(W, k_, stride_, pad_);
  if (oh <= 0 || ow <= 0) throw ShapeError(weight.name + ": input too small " + x.shape_str());
  x_ = x;
  MatX<S> cols = im2col(x, k_, stride_, pad_, oh, ow);
  RowMajorMap<S> wmap(weight.value.ptr(), out_c_, static_cast<Eigen::Index>(in_c_) * k_ * k_);
  MatX<S> y = wmap * cols;
  TensorT<S> out({N, out_c_, oh, ow});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < out_c_; ++c) {
      const S b = bias.value.data[static_cast<size_t>(c)];
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
          out.at(n, c, oy, ox) = y(c, (static_cast<Eigen::Index>(n) * oh + oy) * ow + ox) + b;
    }
  return out;
}

template <typename S>
TensorT<S> Conv2dT<S>::backward(const TensorT<S>& gy) {
  const int N = x_.dim(0), H = x_.dim(2), W = x_.dim(3);
  const int oh = gy.dim(2), ow = gy.dim(3);
  MatX<S> gym = to_channel_mat(gy);
  MatX<S> cols = im2col(x_, k_, stride_, pad_, oh, ow);
  RowMajorMutMap<S> gw(weight.grad.ptr(), out_c_, static_cast<Eigen::Index>(in_c_) * k_ * k_);
  gw += gym * cols.transpose();
  VecX<S> gb = gym.rowwise().sum();
  for (int c = 0; c < out_c_; ++c) bias.grad.data[static_cast<size_t>(c)] += gb[c];
  RowMajorMap<S> wmap(weight.value.ptr(), out_c_, static_cast<Eigen::Index>(in_c_) * k_ * k_);
  MatX<S> gcols = wmap.transpose() * gym;
  return col2im(gcols, N, in_c_, H, W, k_, stride_, pad_, oh, ow);
}

template <typename S>
void Conv2dT<S>::collect_params(std::vector<ParamTensorT<S>*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ------------------------------------------------------- ConvTranspose2d

template <typename S>
ConvTranspose2dT<S>::ConvTranspose2dT(std::string name, int in_c, int out_c, int k, int stride,
                                      int pad, int out_pad, uint64_t seed)
    : weight(name + ".weight", {in_c, out_c, k, k}),
      bias(name + ".bias", {out_c}),
      in_c_(in_c),
      out_c_(out_c),
      k_(k),
      stride_(stride),
      pad_(pad),
      out_pad_(out_pad) {
  if (in_c <= 0 || out_c <= 0 || k <= 0 || stride <= 0 || pad < 0)
    throw ParameterError(name + ": bad deconvolution geometry");
  if (out_pad < 0 || out_pad >= stride)
    throw ParameterError(name + ": output padding must lie in [0, stride)");
  init_conv_weights(weight, bias, in_c * k * k, seed);
}

template <typename S>
TensorT<S> ConvTranspose2dT<S>::forward(const TensorT<S>& x) {
  check_input(x, in_c_, weight.name);
  const int N = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int H = out_dim(h, k_, stride_, pad_, out_pad_);
  const int W = out_dim(w, k_, stride_, pad_, out_pad_);
  if (H <= 0 || W <= 0) throw ShapeError(weight.name + ": input too small " + x.shape_str());
  x_ = x;
  MatX<S> xm = to_channel_mat(x);
  RowMajorMap<S> wmap(weight.value.ptr(), in_c_, static_cast<Eigen::Index>(out_c_) * k_ * k_);
  MatX<S> cols = wmap.transpose() * xm;
  TensorT<S> out = col2im(cols, N, out_c_, H, W, k_, stride_, pad_, h, w);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < out_c_; ++c) {
      const S b = bias.value.data[static_cast<size_t>(c)];
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx) out.at(n, c, y, xx) += b;
    }
  return out;
}

template <typename S>
TensorT<S> ConvTranspose2dT<S>::backward(const TensorT<S>& gy) {
  const int N = x_.dim(0), h = x_.dim(2), w = x_.dim(3);
  MatX<S> gcols = im2col(gy, k_, stride_, pad_, h, w);
  MatX<S> xm = to_channel_mat(x_);
  RowMajorMutMap<S> gw(weight.grad.ptr(), in_c_, static_cast<Eigen::Index>(out_c_) * k_ * k_);
  gw += xm * gcols.transpose();
  for (int c = 0; c < out_c_; ++c) {
    double s = 0.0;
    for (int n = 0; n < N; ++n)
      for (int y = 0; y < gy.dim(2); ++y)
        for (int xx = 0; xx < gy.dim(3); ++xx) s += gy.at(n, c, y, xx);
    bias.grad.data[static_cast<size_t>(c)] += static_cast<S>(s);
  }
  RowMajorMap<S> wmap(weight.value.ptr(), in_c_, static_cast<Eigen::Index>(out_c_) * k_ * k_);
  MatX<S> gxm = wmap * gcols;
  return from_channel_mat(gxm, N, h, w);
}

template <typename S>
void ConvTranspose2dT<S>::collect_params(std::vector<ParamTensorT<S>*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ------------------------------------------------------------------ GDN

namespace gdn {
constexpr double kOffset = 3.814697265625e-06;  // 2^-18
constexpr double kPedestal = kOffset * kOffset;
constexpr double kBetaMin = 1e-6;
// raw storage is sqrt(effective + pedestal); effective recovers as
// max(raw, bound)^2 - pedestal, which keeps beta >= 1e-6 and gamma >= 0
inline double beta_bound() { return std::sqrt(kBetaMin + kPedestal); }
inline double gamma_bound() { return std::sqrt(kPedestal); }
inline double to_raw(double effective) { return std::sqrt(effective + kPedestal); }
}  // namespace gdn

template <typename S>
GDNT<S>::GDNT(std::string name, int channels, bool inverse, double gamma_init)
    : beta_raw(name + ".beta", {channels}),
      gamma_raw(name + ".gamma", {channels, channels}),
      C_(channels),
      inverse_(inverse) {
  if (channels <= 0) throw ParameterError(name + ": channels must be positive");
  for (int i = 0; i < C_; ++i)
    beta_raw.value.data[static_cast<size_t>(i)] = static_cast<S>(gdn::to_raw(1.0));
  for (int i = 0; i < C_; ++i)
    for (int j = 0; j < C_; ++j)
      gamma_raw.value.data[static_cast<size_t>(i) * C_ + j] =
          static_cast<S>(gdn::to_raw(i == j ? gamma_init : 0.0));
}

template <typename S>
VecX<S> GDNT<S>::effective_beta() const {
  VecX<S> b(C_);
  const S bound = static_cast<S>(gdn::beta_bound());
  for (int i = 0; i < C_; ++i) {
    S r = std::max(beta_raw.value.data[static_cast<size_t>(i)], bound);
    b[i] = r * r - static_cast<S>(gdn::kPedestal);
  }
  return b;
}

template <typename S>
MatX<S> GDNT<S>::effective_gamma() const {
  MatX<S> g(C_, C_);
  const S bound = static_cast<S>(gdn::gamma_bound());
  for (int i = 0; i < C_; ++i)
    for (int j = 0; j < C_; ++j) {
      S r = std::max(gamma_raw.value.data[static_cast<size_t>(i) * C_ + j], bound);
      g(i, j) = r * r - static_cast<S>(gdn::kPedestal);
    }
  return g;
}

template <typename S>
void GDNT<S>::set_identity() {
  for (auto& v : beta_raw.value.data) v = static_cast<S>(gdn::to_raw(1.0));
  for (auto& v : gamma_raw.value.data) v = static_cast<S>(gdn::to_raw(0.0));
}

template <typename S>
TensorT<S> GDNT<S>::forward(const TensorT<S>& x) {
  check_input(x, C_, beta_raw.name);
  x_ = x;
  MatX<S> xm = to_channel_mat(x);
  MatX<S> x2 = xm.array().square().matrix();
  z_ = effective_gamma() * x2;
  z_.colwise() += effective_beta();
  MatX<S> ym(C_, xm.cols());
  if (inverse_)
    ym = xm.array() * z_.array().sqrt();
  else
    ym = xm.array() / z_.array().sqrt();
  return from_channel_mat(ym, x.dim(0), x.dim(2), x.dim(3));
}

template <typename S>
TensorT<S> GDNT<S>::backward(const TensorT<S>& gy) {
  MatX<S> xm = to_channel_mat(x_);
  MatX<S> gym = to_channel_mat(gy);
  Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> zs = z_.array().sqrt();
  // z^p and p*z^(p-1) for p = +-1/2
  Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> zp, pzpm1;
  if (inverse_) {
    zp = zs;
    pzpm1 = S(0.5) / zs;
  } else {
    zp = S(1) / zs;
    pzpm1 = S(-0.5) / (z_.array() * zs);
  }
  MatX<S> u = (gym.array() * xm.array() * pzpm1).matrix();

  VecX<S> gbeta_eff = u.rowwise().sum();
  MatX<S> ggamma_eff = u * xm.array().square().matrix().transpose();
  MatX<S> gxm =
      (gym.array() * zp).matrix() + (S(2) * xm.array() * (effective_gamma().transpose() * u).array()).matrix();

  const S bbound = static_cast<S>(gdn::beta_bound());
  for (int i = 0; i < C_; ++i) {
    S raw = beta_raw.value.data[static_cast<size_t>(i)];
    if (raw >= bbound) beta_raw.grad.data[static_cast<size_t>(i)] += gbeta_eff[i] * S(2) * raw;
  }
  const S gbound = static_cast<S>(gdn::gamma_bound());
  for (int i = 0; i < C_; ++i)
    for (int j = 0; j < C_; ++j) {
      S raw = gamma_raw.value.data[static_cast<size_t>(i) * C_ + j];
      if (raw >= gbound)
        gamma_raw.grad.data[static_cast<size_t>(i) * C_ + j] += ggamma_eff(i, j) * S(2) * raw;
    }
  return from_channel_mat(gxm, x_.dim(0), x_.dim(2), x_.dim(3));
}

template <typename S>
void GDNT<S>::collect_params(std::vector<ParamTensorT<S>*>& out) {
  out.push_back(&beta_raw);
  out.push_back(&gamma_raw);
}

// ----------------------------------------------------------------- ReLU

template <typename S>
TensorT<S> ReLUT<S>::forward(const TensorT<S>& x) {
  shape_ = x.shape;
  mask_.resize(x.data.size());
  TensorT<S> y = x;
  for (size_t i = 0; i < y.data.size(); ++i) {
    mask_[i] = y.data[i] > S(0);
    if (!mask_[i]) y.data[i] = S(0);
  }
  return y;
}

template <typename S>
TensorT<S> ReLUT<S>::backward(const TensorT<S>& gy) {
  TensorT<S> gx = gy;
  for (size_t i = 0; i < gx.data.size(); ++i)
    if (!mask_[i]) gx.data[i] = S(0);
  return gx;
}

// ------------------------------------------------------------ AvgPool2x

template <typename S>
TensorT<S> AvgPool2xT<S>::forward(const TensorT<S>& x) {
  if (x.ndim() != 4 || x.dim(2) % 2 || x.dim(3) % 2)
    throw ShapeError("avg pool: need even [N,C,H,W], got " + x.shape_str());
  x_shape_ = x.shape;
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2) / 2, W = x.dim(3) / 2;
  TensorT<S> y({N, C, H, W});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int yy = 0; yy < H; ++yy)
        for (int xx = 0; xx < W; ++xx)
          y.at(n, c, yy, xx) = (x.at(n, c, 2 * yy, 2 * xx) + x.at(n, c, 2 * yy, 2 * xx + 1) +
                                x.at(n, c, 2 * yy + 1, 2 * xx) + x.at(n, c, 2 * yy + 1, 2 * xx + 1)) *
                               S(0.25);
  return y;
}

template <typename S>
TensorT<S> AvgPool2xT<S>::backward(const TensorT<S>& gy) {
  TensorT<S> gx(x_shape_);
  const int N = gy.dim(0), C = gy.dim(1), H = gy.dim(2), W = gy.dim(3);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int yy = 0; yy < H; ++yy)
        for (int xx = 0; xx < W; ++xx) {
          const S g = gy.at(n, c, yy, xx) * S(0.25);
          gx.at(n, c, 2 * yy, 2 * xx) += g;
          gx.at(n, c, 2 * yy, 2 * xx + 1) += g;
          gx.at(n, c, 2 * yy + 1, 2 * xx) += g;
          gx.at(n, c, 2 * yy + 1, 2 * xx + 1) += g;
        }
  return gx;
}

// ----------------------------------------------------------- Upsample2x

namespace {

// half-pixel source coordinate and bilinear taps for one output index
template <typename S>
void up_taps(int o, int n, int& i0, int& i1, S& f) {
  S s = S(o) * S(0.5) - S(0.25);
  S fl = std::floor(s);
  f = s - fl;
  i0 = std::clamp(static_cast<int>(fl), 0, n - 1);
  i1 = std::clamp(static_cast<int>(fl) + 1, 0, n - 1);
}

}  // namespace

template <typename S>
TensorT<S> Upsample2xT<S>::forward(const TensorT<S>& x) {
  if (x.ndim() != 4) throw ShapeError("upsample: expected [N,C,H,W], got " + x.shape_str());
  x_shape_ = x.shape;
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  TensorT<S> y({N, C, 2 * H, 2 * W});
  for (int oy = 0; oy < 2 * H; ++oy) {
    int y0, y1;
    S fy;
    up_taps(oy, H, y0, y1, fy);
    for (int ox = 0; ox < 2 * W; ++ox) {
      int x0, x1;
      S fx;
      up_taps(ox, W, x0, x1, fx);
      for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
          y.at(n, c, oy, ox) = (S(1) - fy) * ((S(1) - fx) * x.at(n, c, y0, x0) + fx * x.at(n, c, y0, x1)) +
                               fy * ((S(1) - fx) * x.at(n, c, y1, x0) + fx * x.at(n, c, y1, x1));
    }
  }
  return y;
}

template <typename S>
TensorT<S> Upsample2xT<S>::backward(const TensorT<S>& gy) {
  TensorT<S> gx(x_shape_);
  const int N = x_shape_[0], C = x_shape_[1], H = x_shape_[2], W = x_shape_[3];
  for (int oy = 0; oy < 2 * H; ++oy) {
    int y0, y1;
    S fy;
    up_taps(oy, H, y0, y1, fy);
    for (int ox = 0; ox < 2 * W; ++ox) {
      int x0, x1;
      S fx;
      up_taps(ox, W, x0, x1, fx);
      for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
          const S g = gy.at(n, c, oy, ox);
          gx.at(n, c, y0, x0) += (S(1) - fy) * (S(1) - fx) * g;
          gx.at(n, c, y0, x1) += (S(1) - fy) * fx * g;
          gx.at(n, c, y1, x0) += fy * (S(1) - fx) * g;
          gx.at(n, c, y1, x1) += fy * fx * g;
        }
    }
  }
  return gx;
}

// ---------------------------------------------------- channel utilities

template <typename S>
TensorT<S> concat_channels(const std::vector<const TensorT<S>*>& parts) {
  if (parts.empty()) throw ParameterError("concat: no inputs");
  int C = 0;
  for (const auto* p : parts) {
    if (p->ndim() != 4) throw ShapeError("concat: expected [N,C,H,W]");
    if (p->dim(0) != parts[0]->dim(0) || p->dim(2) != parts[0]->dim(2) ||
        p->dim(3) != parts[0]->dim(3))
      throw ShapeError("concat: mismatched dims " + p->shape_str());
    C += p->dim(1);
  }
  const int N = parts[0]->dim(0), H = parts[0]->dim(2), W = parts[0]->dim(3);
  TensorT<S> out({N, C, H, W});
  int base = 0;
  for (const auto* p : parts) {
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < p->dim(1); ++c)
        for (int y = 0; y < H; ++y)
          for (int x = 0; x < W; ++x) out.at(n, base + c, y, x) = p->at(n, c, y, x);
    base += p->dim(1);
  }
  return out;
}

template <typename S>
TensorT<S> slice_channels(const TensorT<S>& x, int from, int count) {
  if (x.ndim() != 4 || from < 0 || count <= 0 || from + count > x.dim(1))
    throw ShapeError("slice: bad channel range on " + x.shape_str());
  const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
  TensorT<S> out({N, count, H, W});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < count; ++c)
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx) out.at(n, c, y, xx) = x.at(n, from + c, y, xx);
  return out;
}

template <typename S>
void add_into_channels(TensorT<S>& gx, const TensorT<S>& gy, int from) {
  const int N = gy.dim(0), C = gy.dim(1), H = gy.dim(2), W = gy.dim(3);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx) gx.at(n, from + c, y, xx) += gy.at(n, c, y, xx);
}

// ----------------------------------------------------------------- Adam

template <typename S>
void AdamT<S>::attach(std::vector<ParamTensorT<S>*> params) {
  params_ = std::move(params);
  m_.assign(params_.size(), {});
  v_.assign(params_.size(), {});
  for (size_t i = 0; i < params_.size(); ++i) {
    m_[i].assign(params_[i]->value.data.size(), S(0));
    v_[i].assign(params_[i]->value.data.size(), S(0));
  }
  t_ = 0;
}

template <typename S>
void AdamT<S>::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& value = params_[i]->value.data;
    auto& grad = params_[i]->grad.data;
    for (size_t j = 0; j < value.size(); ++j) {
      const double g = static_cast<double>(grad[j]);
      m_[i][j] = static_cast<S>(b1_ * m_[i][j] + (1.0 - b1_) * g);
      v_[i][j] = static_cast<S>(b2_ * v_[i][j] + (1.0 - b2_) * g * g);
      const double mhat = m_[i][j] / c1;
      const double vhat = v_[i][j] / c2;
      value[j] -= static_cast<S>(lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

template <typename S>
void AdamT<S>::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

// ----------------------------------------------------- instantiations

template struct ParamTensorT<float>;
template struct ParamTensorT<double>;
template class Conv2dT<float>;
template class Conv2dT<double>;
template class ConvTranspose2dT<float>;
template class ConvTranspose2dT<double>;
template class GDNT<float>;
template class GDNT<double>;
template class ReLUT<float>;
template class ReLUT<double>;
template class AvgPool2xT<float>;
template class AvgPool2xT<double>;
template class Upsample2xT<float>;
template class Upsample2xT<double>;
template class AdamT<float>;
template class AdamT<double>;
template TensorT<float> concat_channels<float>(const std::vector<const TensorT<float>*>&);
template TensorT<double> concat_channels<double>(const std::vector<const TensorT<double>*>&);
template TensorT<float> slice_channels<float>(const TensorT<float>&, int, int);
template TensorT<double> slice_channels<double>(const TensorT<double>&, int, int);
template void add_into_channels<float>(TensorT<float>&, const TensorT<float>&, int);
template void add_into_channels<double>(TensorT<double>&, const TensorT<double>&, int);

}  // namespace sebcomm
