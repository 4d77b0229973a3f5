#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "sebcomm/entropy.hpp"
#include "sebcomm/errors.hpp"
#include "test_util.hpp"

using namespace sebcomm;
using testutil::check_fd;
using testutil::rand_tensor;

namespace {

using DTensor = TensorT<double>;

double std_normal_cdf(double t) { return 0.5 * std::erfc(-t * 0.7071067811865476); }

double gaussian_bin_bits(double z, double mu, double sigma) {
  const double a = std::abs(z - mu);
  const double p = std_normal_cdf((0.5 - a) / sigma) - std_normal_cdf((-0.5 - a) / sigma);
  return -std::log2(std::max(p, kProbabilityFloor));
}

}  // namespace

TEST_CASE("probability pricing law") {
  CHECK(price_bits(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(price_bits(1.0) == doctest::Approx(0.0).scale(1));
  CHECK(price_bits(0.25) == doctest::Approx(2.0).epsilon(1e-12));
  bool underflow = false;
  CHECK(price_bits(kProbabilityFloor * 0.5, &underflow) ==
        doctest::Approx(32.0).epsilon(1e-12));
  CHECK(underflow);
  underflow = false;
  CHECK(price_bits(0.5, &underflow) == doctest::Approx(1.0));
  CHECK_FALSE(underflow);
  CHECK(price_bits(0.0, nullptr) == doctest::Approx(32.0).epsilon(1e-12));
}

TEST_CASE("eval quantization rounds half to even") {
  Tensor x({1, 1, 1, 8});
  x.data = {1.4f, -0.5f, 0.5f, 1.5f, 2.5f, -1.5f, -2.3f, 0.49f};
  Tensor q = quantize(x, QuantizeMode::kEval);
  CHECK(q.data[0] == 1.0f);
  CHECK(q.data[1] == 0.0f);
  CHECK(q.data[2] == 0.0f);
  CHECK(q.data[3] == 2.0f);
  CHECK(q.data[4] == 2.0f);
  CHECK(q.data[5] == -2.0f);
  CHECK(q.data[6] == -2.0f);
  CHECK(q.data[7] == 0.0f);
}

TEST_CASE("train quantization adds bounded uniform noise deterministically") {
  Tensor x = rand_tensor<float>({2, 3, 4, 4}, 1, -4.0, 4.0);
  Rng r1(77), r2(77), r3(78);
  Tensor a = quantize(x, QuantizeMode::kTrain, &r1);
  Tensor b = quantize(x, QuantizeMode::kTrain, &r2);
  Tensor c = quantize(x, QuantizeMode::kTrain, &r3);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
  bool varies = false;
  for (int64_t i = 0; i < x.size(); ++i) {
    const float d = a.ptr()[i] - x.ptr()[i];
    CHECK(d >= -0.5f);
    CHECK(d < 0.5f);
    if (i > 0 && std::abs(d - (a.ptr()[0] - x.ptr()[0])) > 1e-9) varies = true;
  }
  CHECK(varies);
  CHECK_THROWS_AS(quantize(x, QuantizeMode::kTrain), ParameterError);
}

TEST_CASE("factorized model is a proper pmf at initialization") {
  // the untrained prior is deliberately broad (logistic-like, scale ~10),
  // so the window must reach far into the tails before mass sums to one
  FactorizedEntropyModelT<double> em("em", 2, 5);
  for (int c = 0; c < 2; ++c) {
    double total = 0.0;
    for (int z = -150; z <= 150; ++z) {
      const double m = em.bin_mass(c, static_cast<double>(z));
      CHECK(m >= 0.0);
      total += m;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("factorized bits price elements by their bin mass") {
  FactorizedEntropyModelT<double> em("em", 2, 5);
  DTensor z({1, 2, 1, 2});
  z.data = {0.0, 1.0, -1.0, 2.0};
  const double bits = em.bits(z);
  double expect = 0.0;
  expect += -std::log2(em.bin_mass(0, 0.0));
  expect += -std::log2(em.bin_mass(0, 1.0));
  expect += -std::log2(em.bin_mass(1, -1.0));
  expect += -std::log2(em.bin_mass(1, 2.0));
  CHECK(bits == doctest::Approx(expect).epsilon(1e-9));
  CHECK(bits >= 0.0);
  CHECK_FALSE(em.underflow_flagged());
}

TEST_CASE("factorized model floors far-tail symbols at 32 bits") {
  FactorizedEntropyModelT<double> em("em", 1, 5);
  DTensor z({1, 1, 1, 1});
  z.data = {1.0e7};
  const double bits = em.bits(z);
  CHECK(bits == doctest::Approx(32.0).epsilon(1e-9));
  CHECK(em.underflow_flagged());
  em.clear_underflow_flag();
  CHECK_FALSE(em.underflow_flagged());

  z.data = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(em.bits(z), NumericError);
  DTensor bad({1, 3, 1, 1});
  CHECK_THROWS_AS(em.bits(bad), ShapeError);
}

TEST_CASE("factorized model gradients agree with finite differences") {
  FactorizedEntropyModelT<double> em("em", 2, 6);
  std::vector<ParamTensorT<double>*> params;
  em.collect_params(params);
  for (auto* p : params) p->zero_grad();
  DTensor z = rand_tensor<double>({1, 2, 2, 2}, 7, -1.3, 1.3);
  (void)em.bits(z);
  DTensor dz = em.backward(1.0);
  auto loss = [&]() { return em.bits(z); };
  int failures = 0;
  check_fd(loss, z.data.data(), dz.data.data(), z.size(), 1e-5, 1e-4, 1, &failures);
  for (auto* p : params)
    check_fd(loss, p->value.data.data(), p->grad.data.data(), p->value.size(), 1e-5, 1e-4, 1,
             &failures);
  CHECK(failures == 0);

  CHECK_THROWS_AS(FactorizedEntropyModelT<double>("bad", 0, 0), ParameterError);
}

TEST_CASE("factorized model fits a two-symbol uniform source to one bit") {
  FactorizedEntropyModel em("em", 1, 9);
  std::vector<ParamTensor*> params;
  em.collect_params(params);
  Adam opt;
  opt.attach(params);

  Tensor clean({1, 1, 16, 16});
  for (int64_t i = 0; i < clean.size(); ++i) clean.ptr()[i] = static_cast<float>(i % 2);

  for (int step = 0; step < 600; ++step) {
    opt.zero_grad();
    Rng noise(9000 + static_cast<uint64_t>(step));
    Tensor z = quantize(clean, QuantizeMode::kTrain, &noise);
    (void)em.bits(z);
    em.backward(1.0f / static_cast<float>(z.size()));
    opt.step(5e-2);
  }

  const double per_element = static_cast<double>(em.bits(clean)) /
                             static_cast<double>(clean.size());
  CHECK(per_element == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("conditional model with a zeroed context net prices a unit-free gaussian") {
  ConditionalGaussianModelT<double> cm("cm", 2, 4, 11);
  std::vector<ParamTensorT<double>*> params;
  cm.collect_params(params);
  for (auto* p : params) p->value.fill(0.0);

  DTensor cond = rand_tensor<double>({1, 3, 16, 16}, 12, 0.0, 1.0);
  cm.condition(cond);

  const double sigma0 = 0.11 + std::log(2.0);  // 0.11 + softplus(0)
  for (int64_t i = 0; i < cm.mu().size(); ++i) {
    CHECK(cm.mu().ptr()[i] == 0.0);
    CHECK(cm.sigma().ptr()[i] == doctest::Approx(sigma0).epsilon(1e-12));
  }

  DTensor z({1, 2, 1, 1});
  z.data = {0.0, 2.0};
  const double bits = cm.bits(z);
  const double expect =
      gaussian_bin_bits(0.0, 0.0, sigma0) + gaussian_bin_bits(2.0, 0.0, sigma0);
  CHECK(bits == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("conditional model enforces its state and shape contracts") {
  ConditionalGaussianModel cm("cm", 2, 4, 13);
  Tensor z({1, 2, 1, 1});
  CHECK_THROWS_AS(cm.bits(z), StateError);

  Tensor cond = rand_tensor<float>({1, 3, 16, 16}, 14, 0.0, 1.0);
  cm.condition(cond);
  for (int64_t i = 0; i < cm.sigma().size(); ++i)
    CHECK(cm.sigma().ptr()[i] >= static_cast<float>(ConditionalGaussianModel::kSigmaMin));

  Tensor wrong_c({1, 3, 1, 1});
  CHECK_THROWS_AS(cm.bits(wrong_c), ShapeError);
  Tensor wrong_hw({1, 2, 2, 2});
  CHECK_THROWS_AS(cm.bits(wrong_hw), ShapeError);

  Tensor nan_z({1, 2, 1, 1});
  nan_z.data[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(cm.bits(nan_z), NumericError);
}

TEST_CASE("conditional model gradients agree with finite differences") {
  ConditionalGaussianModelT<double> cm("cm", 2, 3, 15);
  std::vector<ParamTensorT<double>*> params;
  cm.collect_params(params);
  for (auto* p : params) p->zero_grad();

  DTensor cond = rand_tensor<double>({1, 3, 16, 16}, 16, 0.1, 0.9);
  DTensor z = rand_tensor<double>({1, 2, 1, 1}, 17, -1.0, 1.0);

  cm.condition(cond);
  (void)cm.bits(z);
  DTensor gcond = zeros_like(cond);
  DTensor dz = cm.backward(1.0, &gcond);

  auto loss = [&]() {
    cm.condition(cond);
    return cm.bits(z);
  };
  int failures = 0;
  check_fd(loss, z.data.data(), dz.data.data(), z.size(), 1e-5, 2e-4, 1, &failures);
  check_fd(loss, cond.data.data(), gcond.data.data(), cond.size(), 1e-5, 2e-4, 11, &failures);
  for (auto* p : params)
    check_fd(loss, p->value.data.data(), p->grad.data.data(), p->value.size(), 1e-5, 2e-4, 3,
             &failures);
  CHECK(failures == 0);
}
