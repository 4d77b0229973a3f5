#ifndef SEBCOMM_TRAINER_HPP_
#define SEBCOMM_TRAINER_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sebcomm/model.hpp"

namespace sebcomm {

// Rate-distortion objective over a set: lambda * MSE + total bits, with MSE
// pooled over every pixel of the set.
double loss_rd(const std::vector<Image>& original, const std::vector<Image>& reconstructed,
               const RateBreakdown& rates, double lambda);

// Sum of squared distances between each latent and its assigned Seb. The
// Seb side is a stop-gradient: the pull acts on the latents only.
template <typename S>
S loss_reg(const std::vector<TensorT<S>>& latents, const std::vector<TensorT<S>>& sebs,
           const std::vector<int>& assignment);
float loss_reg(const std::vector<Tensor>& latents, const SebCodebook& codebook,
               const UsageMap& usage);

double total_loss(double rd, double reg, double beta);

// Clustering pass-through: forward value is the assigned Seb, backward
// copies the incoming gradient at each output position to the matching
// latent unchanged. With one Seb per latent this is the identity.
template <typename S>
std::vector<TensorT<S>> straight_through(const std::vector<TensorT<S>>& latents,
                                         const std::vector<TensorT<S>>& sebs,
                                         const std::vector<int>& assignment);
std::vector<Tensor> straight_through(const std::vector<Tensor>& latents,
                                     const SebCodebook& codebook, const UsageMap& usage);

struct TrainConfig {
  double lambda = 1024.0;
  double beta = 1.0;
  // (epochs, learning rate) stages; an epoch is one pass over the subsets
  std::vector<std::pair<int, double>> schedule = {{1, 1e-4}, {1, 1e-5}, {3, 1e-6}};
  long max_steps = 0;  // caps the schedule when positive; extra steps reuse the last rate
  uint64_t seed = 0;
  std::string log_path;       // JSONL, one record per step
  std::string snapshot_path;  // checkpoint written when training diverges
};

struct TrainResult {
  long steps = 0;
  StepStats last;
};

// Adam over the full parameter set. Each step consumes one subset (its
// images form the batch) in round-robin order; the per-subset codebook is
// re-clustered every step, warm-started from the previous one. A non-finite
// loss writes the diagnostic snapshot and raises a numeric error.
TrainResult train(SebModel& model, const ImageSet& data, const TrainConfig& cfg);

}  // namespace sebcomm

#endif  // SEBCOMM_TRAINER_HPP_
