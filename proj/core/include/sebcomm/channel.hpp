#ifndef SEBCOMM_CHANNEL_HPP_
#define SEBCOMM_CHANNEL_HPP_

#include <complex>
#include <cstdint>
#include <vector>

namespace sebcomm {

// y = h x + z over complex symbols with circular complex Gaussian noise of
// total variance sigma^2 per symbol. Signal power is taken as 1, so
// sigma^2 = 10^(-snr_db/10).
struct ChannelSpec {
  double snr_db = 10.0;
  std::complex<double> gain{1.0, 0.0};
  uint64_t seed = 0;

  double noise_power() const;
};

std::vector<std::complex<double>> transmit(const std::vector<std::complex<double>>& x,
                                           const ChannelSpec& spec);

// x_hat = y / h with known channel state; h = 0 is singular
std::vector<std::complex<double>> equalize(const std::vector<std::complex<double>>& y,
                                           std::complex<double> h);

// Shannon capacity, bits per complex symbol
double capacity_from_snr(double snr_db);
double capacity_from_snr_linear(double snr_linear);

// capacity implied by a bits-per-pixel figure at a given channel bandwidth
// ratio (C = bpp / (3 cbr)), inverted to dB; zero capacity reports -inf
double snr_from_bpp(double bpp, double cbr);
double bpp_from_snr(double snr_db, double cbr);

// symbol budget of a payload under the ideal capacity-achieving code; the
// payload itself is delivered error-free
struct LinkBudget {
  double bits = 0.0;
  double capacity_bits_per_symbol = 0.0;
  double symbols = 0.0;
};

LinkBudget budget(double bits, double snr_db);

}  // namespace sebcomm

#endif  // SEBCOMM_CHANNEL_HPP_
