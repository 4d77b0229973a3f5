// End-to-end acceptance: one pass/fail line per criterion, nonzero exit on
// any failure. Criteria 6 and 7 train small models and dominate the runtime.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "graph_check.hpp"
#include "sebcomm/augment.hpp"
#include "sebcomm/channel.hpp"
#include "sebcomm/entropy.hpp"
#include "sebcomm/eval.hpp"
#include "sebcomm/kmeans.hpp"
#include "sebcomm/layers.hpp"
#include "sebcomm/metrics.hpp"
#include "sebcomm/rates.hpp"
#include "sebcomm/serialize.hpp"
#include "sebcomm/trainer.hpp"
#include "test_util.hpp"

using namespace sebcomm;

namespace {

struct Failures {
  std::vector<std::string> items;
  void require(bool ok, const std::string& what) {
    if (!ok) items.push_back(what);
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// ---------------------------------------------------------------- corpus

// four structured sources, sixteen augmented crops each, one subset per
// source; every image is 64x64
ImageSet toy_corpus() {
  ImageSet set;
  set.subset_count = 4;
  for (int s = 0; s < 4; ++s) {
    Image base = testutil::make_smooth_image(64, 64, 1000 + static_cast<uint64_t>(s));
    std::vector<Image> copies = augment(base, 16, 64, 64, derive_seed(2000, static_cast<uint64_t>(s)));
    for (Image& im : copies) {
      set.images.push_back(std::move(im));
      set.subset_labels.push_back(s);
    }
  }
  return set;
}

ModelHyper toy_hyper() {
  ModelHyper h;
  h.patch = 32;
  h.c_seb = 8;
  h.hidden_seb = 16;
  h.c_comp = 4;
  h.hidden_comp = 8;
  h.c_res = 24;
  h.hidden_res = 24;
  h.flow_hidden = 4;
  h.ctx_hidden = 8;
  h.seb_divisor = 25;
  return h;
}

constexpr long kToySteps = 1800;
constexpr long kTrendSteps = 800;

struct ToyEval {
  double psnr_mean = 0.0;
  double msssim_mean = 0.0;
  double mse_mean = 0.0;
  RateBreakdown rates;
};

ToyEval evaluate_toy(SebModel& model, const ImageSet& set, uint64_t seed) {
  std::vector<std::vector<Image>> groups(static_cast<size_t>(set.subset_count));
  for (size_t i = 0; i < set.images.size(); ++i)
    groups[static_cast<size_t>(set.subset_labels[i])].push_back(set.images[i]);

  ToyEval out;
  size_t n = 0;
  for (size_t g = 0; g < groups.size(); ++g) {
    SubsetEval ev = evaluate_subset(model, groups[g], derive_seed(seed, g));
    out.rates.bits_S += ev.rates.bits_S;
    out.rates.bits_A += ev.rates.bits_A;
    out.rates.bits_Zm += ev.rates.bits_Zm;
    out.rates.bits_Zr += ev.rates.bits_Zr;
    for (size_t i = 0; i < groups[g].size(); ++i) {
      out.psnr_mean += ev.metrics[i].psnr;
      out.msssim_mean += ev.metrics[i].ms_ssim;
      out.mse_mean += mse(groups[g][i], ev.reconstructions[i]);
      ++n;
    }
  }
  out.psnr_mean /= static_cast<double>(n);
  out.msssim_mean /= static_cast<double>(n);
  out.mse_mean /= static_cast<double>(n);
  return out;
}

SebModel train_toy(const ImageSet& set, double lambda, long steps, uint64_t seed) {
  SebModel model(toy_hyper(), seed);
  TrainConfig cfg;
  cfg.lambda = lambda;
  cfg.beta = 1.0;
  // three-stage decay sized so the cap lands inside the last stage
  const int epochs = static_cast<int>((steps + 3) / 4);
  cfg.schedule = {{(epochs * 3) / 4, 1e-4}, {epochs / 5, 1e-5}, {epochs, 1e-6}};
  cfg.max_steps = steps;
  cfg.seed = seed;
  TrainResult r = train(model, set, cfg);
  (void)r;
  return model;
}

// ------------------------------------------------------------- criteria

// closed-form rates and capacity
bool crit1(std::string& detail) {
  Failures f;
  const double a = rate_A(16, 4, 40);
  f.require(std::abs(a - 340.60) <= 0.01, fmt("rate_A(16,4,40)=%.6f not 340.60+-0.01", a));
  const double snr = snr_from_bpp(0.2, 1.0 / 30.0);
  f.require(std::abs(snr - 4.7712) <= 1e-4, fmt("snr_from_bpp=%.6f not 4.7712+-1e-4", snr));
  const double cap = capacity_from_snr_linear(3.0);
  f.require(cap == 2.0, fmt("capacity(linear 3)=%.17g not exactly 2", cap));
  detail = fmt("rate_A=%.4f bits, snr=%.5f dB, C(3)=%.1f", a, snr, cap);
  if (!f.items.empty()) detail = f.items.front();
  return f.items.empty();
}

// patch geometry round trip
bool crit2(std::string& detail) {
  Failures f;
  Rng rng(4242);
  int worst_h = 0, worst_w = 0;
  for (int i = 0; i < 100; ++i) {
    const int h = 1 + static_cast<int>(rng.uniform_int(192));
    const int w = 1 + static_cast<int>(rng.uniform_int(192));
    const int ph = 1 + static_cast<int>(rng.uniform_int(47));
    const int pw = 1 + static_cast<int>(rng.uniform_int(47));
    Image im = testutil::make_image(h, w, derive_seed(7, static_cast<uint64_t>(i)));
    Image back = depatchify(patchify(im, ph, pw));
    if (back.height() != h || back.width() != w || back.pixels.data != im.pixels.data) {
      f.require(false, fmt("round trip broke at %gx%g patch %gx%g", h, w, ph, pw));
      worst_h = h;
      worst_w = w;
      break;
    }
  }
  detail = "100 random sizes bit-exact";
  if (!f.items.empty()) detail = f.items.front() + fmt(" (%gx%g)", worst_h, worst_w);
  return f.items.empty();
}

// clustering against the brute-force oracle
bool crit3(std::string& detail) {
  Failures f;
  int optimal = 0;
  for (int i = 0; i < 50; ++i) {
    Rng rng(derive_seed(31337, static_cast<uint64_t>(i)));
    const int m = 2 + i % 9;
    const int d = 1 + i % 3;
    const int K = 1 + i % std::min(3, m);
    Eigen::MatrixXd pts(m, d);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < d; ++c) pts(r, c) = rng.uniform() * 2.0 - 1.0;

    KMeansResult km = kmeans(pts, K, derive_seed(555, static_cast<uint64_t>(i)));
    f.require(static_cast<int>(km.labels.size()) == m, "label count");
    double inertia = 0.0;
    std::vector<int> count(static_cast<size_t>(K), 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, d);
    for (int r = 0; r < m; ++r) {
      const int l = km.labels[static_cast<size_t>(r)];
      f.require(l >= 0 && l < K, "label out of range");
      double best = 1e300;
      int arg = -1;
      for (int k = 0; k < K; ++k) {
        const double dist = (pts.row(r) - km.centers.row(k)).squaredNorm();
        if (dist < best - 1e-12) {
          best = dist;
          arg = k;
        }
      }
      f.require(l == arg || (pts.row(r) - km.centers.row(l)).squaredNorm() <= best + 1e-12,
                fmt("instance %g point %g not nearest", i, r));
      inertia += (pts.row(r) - km.centers.row(l)).squaredNorm();
      ++count[static_cast<size_t>(l)];
      sums.row(l) += pts.row(r);
    }
    for (int k = 0; k < K; ++k)
      if (count[static_cast<size_t>(k)] > 0)
        f.require((sums.row(k) / count[static_cast<size_t>(k)] - km.centers.row(k)).norm() <= 1e-9,
                  fmt("instance %g center %g is not the member mean", i, k));
    f.require(std::abs(inertia - km.inertia) <= 1e-9 * std::max(1.0, inertia),
              fmt("instance %g inertia bookkeeping off", i));

    const double best = testutil::brute_force_inertia(pts, K);
    f.require(km.inertia >= best - 1e-9, fmt("instance %g beat the oracle?!", i));
    if (km.inertia <= best + 1e-6) ++optimal;
  }
  f.require(optimal >= 45, fmt("only %g/50 instances reached the optimum (need 45)", optimal));
  detail = fmt("invariants on 50/50, optimal on %g/50", optimal);
  if (!f.items.empty()) detail = f.items.front();
  return f.items.empty();
}

// gradients: regularizer closed form, straight-through equivalence, finite
// differences through the entropy model and both GDN modes
bool crit4(std::string& detail) {
  Failures f;

  // dL_reg/dF = 2(F - S); the Seb side is a stop-gradient by construction
  {
    std::vector<TensorT<double>> F, S;
    std::vector<int> assign = {0, 1, 0, 1, 1};
    for (int i = 0; i < 5; ++i)
      F.push_back(testutil::rand_tensor<double>({3}, 60 + static_cast<uint64_t>(i)));
    for (int i = 0; i < 2; ++i)
      S.push_back(testutil::rand_tensor<double>({3}, 70 + static_cast<uint64_t>(i)));

    double manual = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int e = 0; e < 3; ++e) {
        const double dd = F[static_cast<size_t>(i)].data[static_cast<size_t>(e)] -
                          S[static_cast<size_t>(assign[static_cast<size_t>(i)])]
                              .data[static_cast<size_t>(e)];
        manual += dd * dd;
      }
    const double got = loss_reg<double>(F, S, assign);
    f.require(std::abs(got - manual) <= 1e-12 * std::max(1.0, manual), "loss_reg value law");

    const double h = 1e-6;
    for (int i = 0; i < 5 && f.items.empty(); ++i)
      for (int e = 0; e < 3; ++e) {
        double& x = F[static_cast<size_t>(i)].data[static_cast<size_t>(e)];
        const double analytic =
            2.0 * (x - S[static_cast<size_t>(assign[static_cast<size_t>(i)])]
                           .data[static_cast<size_t>(e)]);
        const double keep = x;
        x = keep + h;
        const double up = loss_reg<double>(F, S, assign);
        x = keep - h;
        const double dn = loss_reg<double>(F, S, assign);
        x = keep;
        f.require(testutil::approx_rel((up - dn) / (2.0 * h), analytic, 1e-7),
                  "loss_reg gradient is not 2(F-S)");
      }

    // straight-through forward passes the assigned Seb through unchanged
    auto st = straight_through<double>(F, S, assign);
    for (int i = 0; i < 5; ++i)
      f.require(st[static_cast<size_t>(i)].data ==
                    S[static_cast<size_t>(assign[static_cast<size_t>(i)])].data,
                "straight-through value");
  }

  // identity clustering: the full graph and the clustering-free graph agree
  {
    ModelHyper h;
    h.patch = 16;
    h.c_seb = 4;
    h.hidden_seb = 4;
    h.c_comp = 2;
    h.hidden_comp = 4;
    h.c_res = 4;
    h.hidden_res = 4;
    h.flow_hidden = 4;
    h.ctx_hidden = 4;
    h.seb_divisor = 1;
    SebModel a(h, 77), b(h, 77);
    Tensor batch = images_to_batch({testutil::make_smooth_image(16, 16, 5)});
    for (ParamTensor* p : a.params()) p->grad.fill(0.0f);
    for (ParamTensor* p : b.params()) p->grad.fill(0.0f);
    StepStats sa = train_step_graph(a, batch, 512.0, 1.0, 42, nullptr);
    StepStats sb = testutil::manual_identity_step(b, batch, 512.0, 42);
    f.require(testutil::approx_rel(sa.mse, sb.mse, 1e-9), "identity graphs disagree on mse");
    f.require(testutil::approx_rel(sa.total_bits(), sb.total_bits(), 1e-9),
              "identity graphs disagree on bits");
    f.require(sa.loss_reg <= 1e-12, "regularizer nonzero under identity clustering");
    auto pa = a.params();
    auto pb = b.params();
    double worst = 0.0;
    for (size_t i = 0; i < pa.size(); ++i)
      for (int64_t e = 0; e < pa[i]->grad.size(); ++e) {
        const double ga = pa[i]->grad.ptr()[e], gb = pb[i]->grad.ptr()[e];
        worst = std::max(worst, std::abs(ga - gb) / std::max({1.0, std::abs(ga), std::abs(gb)}));
      }
    f.require(worst <= 1e-6, fmt("straight-through equivalence off by %.3g", worst));
  }

  // finite differences, double precision: factorized entropy model
  {
    FactorizedEntropyModelT<double> em("em", 2, 99);
    std::vector<ParamTensorT<double>*> params;
    em.collect_params(params);
    TensorT<double> z = testutil::rand_tensor<double>({1, 2, 3, 3}, 31, -1.3, 1.3);
    auto run = [&] { return static_cast<double>(em.bits(z)); };
    for (auto* p : params) p->grad.fill(0.0);
    em.bits(z);
    em.backward(1.0);
    int bad = 0;
    for (auto* p : params)
      testutil::check_fd(run, p->value.data.data(), p->grad.data.data(),
                         static_cast<int64_t>(p->value.data.size()), 1e-4, 1e-4, 1, &bad);
    f.require(bad == 0, fmt("entropy model fd: %g parameter entries off", bad));
  }

  // finite differences, double precision: GDN forward and inverse
  for (bool inverse : {false, true}) {
    GDNT<double> gdn("g", 3, inverse);
    std::vector<ParamTensorT<double>*> params;
    gdn.collect_params(params);
    for (auto* p : params)
      for (auto& v : p->value.data) v += 0.1;  // step off the clamp kink
    TensorT<double> x = testutil::rand_tensor<double>({1, 3, 4, 4}, 17, 0.2, 1.0);
    TensorT<double> w = testutil::rand_tensor<double>({1, 3, 4, 4}, 18);
    auto run = [&] {
      TensorT<double> y = gdn.forward(x);
      double L = 0.0;
      for (int64_t e = 0; e < y.size(); ++e) L += w.ptr()[e] * y.ptr()[e];
      return L;
    };
    for (auto* p : params) p->grad.fill(0.0);
    TensorT<double> y = gdn.forward(x);
    TensorT<double> gy = w;
    gdn.backward(gy);
    int bad = 0;
    for (auto* p : params)
      testutil::check_fd(run, p->value.data.data(), p->grad.data.data(),
                         static_cast<int64_t>(p->value.data.size()), 1e-5, 1e-4, 1, &bad);
    f.require(bad == 0, fmt("gdn fd (inverse=%g): %g parameter entries off",
                            inverse ? 1.0 : 0.0, bad));
  }

  detail = "regularizer, straight-through, entropy + GDN finite differences";
  if (!f.items.empty()) detail = f.items.front();
  return f.items.empty();
}

// channel noise statistics and the noiseless round trip
bool crit5(std::string& detail) {
  Failures f;
  ChannelSpec spec;
  spec.snr_db = 7.0;
  spec.seed = 99;
  const double sigma2 = spec.noise_power();
  std::vector<std::complex<double>> x(1000000, {0.0, 0.0});
  auto y = transmit(x, spec);
  double acc = 0.0;
  for (const auto& v : y) acc += std::norm(v);
  acc /= static_cast<double>(y.size());
  f.require(std::abs(acc - sigma2) <= 0.01 * sigma2,
            fmt("noise variance %.6g vs sigma^2 %.6g exceeds 1%%", acc, sigma2));

  ChannelSpec clean;
  clean.snr_db = 10000.0;  // noise power underflows to exactly zero
  clean.gain = {2.0, 0.0};
  clean.seed = 1;
  Rng rng(8);
  std::vector<std::complex<double>> sym(1000);
  for (auto& v : sym) v = {rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0};
  auto eq = equalize(transmit(sym, clean), clean.gain);
  bool exact = eq.size() == sym.size();
  for (size_t i = 0; exact && i < sym.size(); ++i) exact = eq[i] == sym[i];
  f.require(exact, "zero-noise equalized round trip is not bit-exact");

  detail = fmt("variance off by %.3f%%, noiseless round trip exact",
               100.0 * std::abs(acc - sigma2) / sigma2);
  if (!f.items.empty()) detail = f.items.front();
  return f.items.empty();
}

ImageSet g_toy;        // shared by criteria 6 and 7
ToyEval g_toy_eval256; // stashed by criterion 7

// toy overfit at lambda = 1024
bool crit6(std::string& detail) {
  Failures f;
  SebModel model = train_toy(g_toy, 1024.0, kToySteps, 21);
  ToyEval ev = evaluate_toy(model, g_toy, 9000);
  f.require(ev.psnr_mean >= 30.0, fmt("mean psnr %.2f dB < 30", ev.psnr_mean));
  f.require(ev.msssim_mean >= 0.95, fmt("mean ms-ssim %.4f < 0.95", ev.msssim_mean));
  detail = fmt("psnr %.2f dB, ms-ssim %.4f", ev.psnr_mean, ev.msssim_mean);
  if (!f.items.empty()) detail += " - " + f.items.front();
  return f.items.empty();
}

// rate-distortion trend across lambda
bool crit7(std::string& detail) {
  Failures f;
  SebModel low = train_toy(g_toy, 256.0, kTrendSteps, 22);
  SebModel high = train_toy(g_toy, 2048.0, kTrendSteps, 22);
  ToyEval e_low = evaluate_toy(low, g_toy, 9000);
  ToyEval e_high = evaluate_toy(high, g_toy, 9000);
  g_toy_eval256 = e_low;

  const double r_low = e_low.rates.total(), r_high = e_high.rates.total();
  f.require(r_high >= r_low, fmt("rate(2048)=%.0f < rate(256)=%.0f bits", r_high, r_low));
  f.require(e_high.mse_mean <= e_low.mse_mean,
            fmt("mse(2048)=%.3g > mse(256)=%.3g", e_high.mse_mean, e_low.mse_mean));
  const double share_low = e_low.rates.bits_Zr / r_low;
  const double share_high = e_high.rates.bits_Zr / r_high;
  f.require(share_high > share_low,
            fmt("residual share %.3f !> %.3f", share_high, share_low));
  const double seb_ratio = e_high.rates.bits_S / e_low.rates.bits_S;
  f.require(seb_ratio >= 0.75 && seb_ratio <= 1.25,
            fmt("Seb bits moved x%.3f across lambda (allowed 0.75..1.25)", seb_ratio));
  detail = fmt("rate x%.2f, mse x%.2f, residual share %.3f", r_high / r_low,
               e_high.mse_mean / std::max(e_low.mse_mean, 1e-30), share_high) +
           fmt(" vs %.3f, Seb bits x%.3f", share_low, seb_ratio);
  if (!f.items.empty()) detail = f.items.front();
  return f.items.empty();
}

// accounting exactness
bool crit8(std::string& detail) {
  Failures f;
  RateBreakdown rates;
  rates.bits_S = 137.31;
  rates.bits_A = 41.07;
  rates.bits_Zm = 512.25;
  rates.bits_Zr = 913.77;
  rates.n_images = 1;
  CbrBreakdown parts = cbr_breakdown(rates, 3.7, 123, 77);
  const double total = cbr(rates.total(), 3.7, 1, 123, 77);
  f.require(std::abs(parts.total() - total) <= 1e-12 * std::max(1.0, total),
            fmt("cbr parts sum %.17g != total %.17g", parts.total(), total));

  testutil::TempDir tmp;
  bool sized_ok = true, ideal_ok = true;
  for (int K : {1, 2, 3, 4, 5, 7, 8, 9, 16, 31, 32, 33}) {
    UsageMap um;
    um.K = K;
    Rng rng(static_cast<uint64_t>(K));
    um.indices.assign(3, std::vector<int>(14));
    for (auto& row : um.indices)
      for (int& v : row) v = static_cast<int>(rng.uniform() * K) % K;
    const std::string path = tmp.file("u" + std::to_string(K) + ".seba");
    write_usage(path, um);
    const auto bytes = std::filesystem::file_size(path);
    const int w = K == 1 ? 0 : static_cast<int>(std::ceil(std::log2(static_cast<double>(K))));
    const int64_t payload_bits = static_cast<int64_t>(w) * 3 * 14;
    sized_ok = sized_ok && bytes == 16 + static_cast<uintmax_t>((payload_bits + 7) / 8);
    const double serialized = rate_A_serialized(3, 14, K);
    sized_ok = sized_ok && serialized == static_cast<double>(payload_bits);
    if ((K & (K - 1)) == 0)
      ideal_ok = ideal_ok && serialized == rate_A(3, 14, K);
  }
  f.require(sized_ok, "usage container size is not ceil(log2 K) n n_p bits");
  f.require(ideal_ok, "power-of-two usage size differs from the ideal rate");

  detail = "cbr sum exact, usage sizes exact, power-of-two matches ideal";
  if (!f.items.empty()) detail = f.items.front();
  return f.items.empty();
}

// container round trips
bool crit9(std::string& detail) {
  Failures f;
  testutil::TempDir tmp;

  SebCodebook cb;
  cb.K = 3;
  for (int k = 0; k < 3; ++k)
    cb.sebs.push_back(testutil::rand_tensor<float>({4, 2, 2}, 80 + static_cast<uint64_t>(k), -9, 9));
  write_codebook(tmp.file("b.seb"), cb);
  SebCodebook cb2 = read_codebook(tmp.file("b.seb"));
  bool ok = cb2.K == cb.K;
  for (int k = 0; ok && k < 3; ++k)
    ok = cb2.sebs[static_cast<size_t>(k)].data == cb.sebs[static_cast<size_t>(k)].data &&
         cb2.sebs[static_cast<size_t>(k)].shape == cb.sebs[static_cast<size_t>(k)].shape;
  f.require(ok, "codebook round trip not bit-exact");

  for (int K : {1, 5}) {
    UsageMap um;
    um.K = K;
    um.indices = {{0, K - 1, 0, K / 2}, {K / 2, 0, K - 1, 0}};
    write_usage(tmp.file("u.seba"), um);
    UsageMap um2 = read_usage(tmp.file("u.seba"));
    f.require(um2.K == K && um2.indices == um.indices,
              fmt("usage round trip broke at K=%g", K));
  }

  std::vector<Tensor> zs;
  Tensor z({2, 3, 2});
  int v = -6;
  for (auto& e : z.data) e = static_cast<float>(v++);
  zs.push_back(z);
  write_latent_records(tmp.file("z.sebz"), zs);
  auto zs2 = read_latent_records(tmp.file("z.sebz"));
  f.require(zs2.size() == 1 && zs2[0].shape == z.shape && zs2[0].data == z.data,
            "latent record round trip not bit-exact");

  detail = "SEB1, SEBA (K=1 and K=5), SEBZ all bit-exact";
  if (!f.items.empty()) detail = f.items.front();
  return f.items.empty();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "closed-form rates and capacity", crit1},
      {2, "patch geometry round trip", crit2},
      {3, "clustering vs brute-force oracle", crit3},
      {4, "gradient suite", crit4},
      {5, "channel statistics", crit5},
      {6, "toy overfit", crit6},
      {7, "lambda rate-distortion trend", crit7},
      {8, "accounting exactness", crit8},
      {9, "container round trips", crit9},
  };

  g_toy = toy_corpus();
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s (%.2f s) %s - %s\n", c.id, ok ? "PASS" : "FAIL", secs,
                c.label, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures == 0)
    std::printf("all 9 acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
