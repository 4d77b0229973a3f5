#include "sebcomm/rates.hpp"

#include <cmath>

#include "sebcomm/channel.hpp"
#include "sebcomm/errors.hpp"

namespace sebcomm {

double rate_A(int n, int n_p, int K) {
  if (K < 1) throw ParameterError("rate_A: K must be at least 1");
  if (n < 0 || n_p < 0) throw ParameterError("rate_A: negative counts");
  return static_cast<double>(n) * n_p * std::log2(static_cast<double>(K));
}

double rate_A_serialized(int n, int n_p, int K) {
  if (K < 1) throw ParameterError("rate_A_serialized: K must be at least 1");
  int bits_per_index = 0;
  while ((1 << bits_per_index) < K) ++bits_per_index;  // ceil(log2 K)
  return static_cast<double>(n) * n_p * bits_per_index;
}

double rate_S(FactorizedEntropyModel& model, const SebCodebook& codebook) {
  if (codebook.sebs.empty()) throw ParameterError("rate_S: empty codebook");
  const auto& s = codebook.sebs[0].shape;
  Tensor batch({codebook.K, s[0], s[1], s[2]});
  const size_t per = codebook.sebs[0].data.size();
  for (int k = 0; k < codebook.K; ++k)
    std::copy(codebook.sebs[static_cast<size_t>(k)].data.begin(),
              codebook.sebs[static_cast<size_t>(k)].data.end(),
              batch.data.begin() + static_cast<size_t>(k) * per);
  Tensor rounded = quantize(batch, QuantizeMode::kEval);
  return static_cast<double>(model.bits(rounded));
}

double bpp(double bits, int n_images, int height, int width) {
  if (n_images <= 0 || height <= 0 || width <= 0) throw ParameterError("bpp: bad dimensions");
  return bits / (static_cast<double>(n_images) * height * width);
}

double cbr(double bits, double snr_db, int n_images, int height, int width) {
  if (n_images <= 0 || height <= 0 || width <= 0) throw ParameterError("cbr: bad dimensions");
  const double symbols = budget(bits, snr_db).symbols;
  const double source_symbols = 3.0 * height * width;
  return symbols / source_symbols / n_images;
}

CbrBreakdown cbr_breakdown(const RateBreakdown& rates, double snr_db, int height, int width) {
  CbrBreakdown out;
  out.S = cbr(rates.bits_S, snr_db, rates.n_images, height, width);
  out.A = cbr(rates.bits_A, snr_db, rates.n_images, height, width);
  out.Zm = cbr(rates.bits_Zm, snr_db, rates.n_images, height, width);
  out.Zr = cbr(rates.bits_Zr, snr_db, rates.n_images, height, width);
  return out;
}

}  // namespace sebcomm
