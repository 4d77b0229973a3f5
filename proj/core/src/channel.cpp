#include "sebcomm/channel.hpp"

#include <cmath>
#include <limits>

#include "sebcomm/errors.hpp"
#include "sebcomm/rng.hpp"

namespace sebcomm {

double ChannelSpec::noise_power() const {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::pow(10.0, -snr_db / 10.0);
}

std::vector<std::complex<double>> transmit(const std::vector<std::complex<double>>& x,
                                           const ChannelSpec& spec) {
  std::vector<std::complex<double>> y(x.size());
  const double sigma2 = spec.noise_power();
  Rng rng(spec.seed);
  if (sigma2 == 0.0) {
    for (size_t i = 0; i < x.size(); ++i) y[i] = spec.gain * x[i];
    return y;
  }
  const double s = std::sqrt(sigma2 / 2.0);  // per real component
  for (size_t i = 0; i < x.size(); ++i)
    y[i] = spec.gain * x[i] + std::complex<double>(s * rng.normal(), s * rng.normal());
  return y;
}

std::vector<std::complex<double>> equalize(const std::vector<std::complex<double>>& y,
                                           std::complex<double> h) {
  if (h == std::complex<double>(0.0, 0.0))
    throw ParameterError("equalize: singular channel gain h = 0");
  std::vector<std::complex<double>> x(y.size());
  for (size_t i = 0; i < y.size(); ++i) x[i] = y[i] / h;
  return x;
}

double capacity_from_snr(double snr_db) {
  return capacity_from_snr_linear(std::pow(10.0, snr_db / 10.0));
}

double capacity_from_snr_linear(double snr_linear) { return std::log2(1.0 + snr_linear); }

double snr_from_bpp(double bpp, double cbr) {
  if (bpp < 0.0) throw ParameterError("snr_from_bpp: negative bpp");
  if (cbr <= 0.0) throw ParameterError("snr_from_bpp: cbr must be positive");
  const double c = bpp / (3.0 * cbr);
  if (c == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(std::exp2(c) - 1.0);
}

double bpp_from_snr(double snr_db, double cbr) {
  if (cbr <= 0.0) throw ParameterError("bpp_from_snr: cbr must be positive");
  return 3.0 * cbr * capacity_from_snr(snr_db);
}

LinkBudget budget(double bits, double snr_db) {
  if (bits < 0.0) throw ParameterError("budget: negative bit count");
  const double c = capacity_from_snr(snr_db);
  if (!(c > 0.0)) throw ParameterError("budget: non-positive channel capacity");
  return LinkBudget{bits, c, bits / c};
}

}  // namespace sebcomm
