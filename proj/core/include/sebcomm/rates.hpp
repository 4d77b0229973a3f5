#ifndef SEBCOMM_RATES_HPP_
#define SEBCOMM_RATES_HPP_

#include "sebcomm/entropy.hpp"
#include "sebcomm/seb_core.hpp"

namespace sebcomm {

// ideal usage-information cost: n * n_p * log2(K) bits (0 when K = 1)
double rate_A(int n, int n_p, int K);

// wire cost of the packed usage container: ceil(log2 K) bits per index
double rate_A_serialized(int n, int n_p, int K);

// entropy-model pricing of the rounded Seb latents
double rate_S(FactorizedEntropyModel& model, const SebCodebook& codebook);

// Bit totals of one transmission. Component order matches the loss: Seb
// codebook, usage map, compensation latent, residual latent.
struct RateBreakdown {
  double bits_S = 0.0;
  double bits_A = 0.0;
  double bits_Zm = 0.0;
  double bits_Zr = 0.0;
  int n_images = 1;

  double total() const { return bits_S + bits_A + bits_Zm + bits_Zr; }
};

double bpp(double bits, int n_images, int height, int width);

// channel symbols for `bits` over source symbols (3 H W per image); the
// set-level figure divides by n_images
double cbr(double bits, double snr_db, int n_images, int height, int width);

// Per-component CBR of a breakdown. total is the exact sum of the parts.
struct CbrBreakdown {
  double S = 0.0;
  double A = 0.0;
  double Zm = 0.0;
  double Zr = 0.0;

  double total() const { return S + A + Zm + Zr; }
};

CbrBreakdown cbr_breakdown(const RateBreakdown& rates, double snr_db, int height, int width);

}  // namespace sebcomm

#endif  // SEBCOMM_RATES_HPP_
