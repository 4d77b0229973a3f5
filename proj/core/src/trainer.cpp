#include "sebcomm/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>

#include "sebcomm/rng.hpp"

namespace sebcomm {

double loss_rd(const std::vector<Image>& original, const std::vector<Image>& reconstructed,
               const RateBreakdown& rates, double lambda) {
  if (original.size() != reconstructed.size())
    throw ShapeError("loss_rd: set sizes differ");
  if (original.empty()) throw ParameterError("loss_rd: empty sets");
  double se = 0.0;
  int64_t count = 0;
  for (size_t i = 0; i < original.size(); ++i) {
    const Tensor& a = original[i].pixels;
    const Tensor& b = reconstructed[i].pixels;
    check_same_shape(a, b, "loss_rd");
    for (int64_t e = 0; e < a.size(); ++e) {
      const double d = static_cast<double>(a.ptr()[e]) - static_cast<double>(b.ptr()[e]);
      se += d * d;
    }
    count += a.size();
  }
  return lambda * (se / static_cast<double>(count)) + rates.total();
}

template <typename S>
S loss_reg(const std::vector<TensorT<S>>& latents, const std::vector<TensorT<S>>& sebs,
           const std::vector<int>& assignment) {
  if (assignment.size() != latents.size())
    throw StructuralError("loss_reg: latent without an assignment");
  double sum = 0.0;
  for (size_t i = 0; i < latents.size(); ++i) {
    const int k = assignment[i];
    if (k < 0 || k >= static_cast<int>(sebs.size()))
      throw StructuralError("loss_reg: assignment index out of range");
    check_same_shape(latents[i], sebs[k], "loss_reg");
    for (int64_t e = 0; e < latents[i].size(); ++e) {
      const double d =
          static_cast<double>(latents[i].ptr()[e]) - static_cast<double>(sebs[k].ptr()[e]);
      sum += d * d;
    }
  }
  return static_cast<S>(sum);
}

template float loss_reg<float>(const std::vector<Tensor>&, const std::vector<Tensor>&,
                               const std::vector<int>&);
template double loss_reg<double>(const std::vector<TensorT<double>>&,
                                 const std::vector<TensorT<double>>&, const std::vector<int>&);

namespace {

std::vector<int> flatten_usage(const UsageMap& usage) {
  std::vector<int> flat;
  for (const auto& row : usage.indices) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

}  // namespace

float loss_reg(const std::vector<Tensor>& latents, const SebCodebook& codebook,
               const UsageMap& usage) {
  return loss_reg<float>(latents, codebook.sebs, flatten_usage(usage));
}

double total_loss(double rd, double reg, double beta) { return rd + beta * reg; }

template <typename S>
std::vector<TensorT<S>> straight_through(const std::vector<TensorT<S>>& latents,
                                         const std::vector<TensorT<S>>& sebs,
                                         const std::vector<int>& assignment) {
  if (assignment.size() != latents.size())
    throw StructuralError("straight_through: latent without an assignment");
  std::vector<TensorT<S>> out;
  out.reserve(latents.size());
  for (size_t i = 0; i < latents.size(); ++i) {
    const int k = assignment[i];
    if (k < 0 || k >= static_cast<int>(sebs.size()))
      throw StructuralError("straight_through: assignment index out of range");
    check_same_shape(latents[i], sebs[k], "straight_through");
    out.push_back(sebs[k]);
  }
  return out;
}

template std::vector<Tensor> straight_through<float>(const std::vector<Tensor>&,
                                                     const std::vector<Tensor>&,
                                                     const std::vector<int>&);
template std::vector<TensorT<double>> straight_through<double>(
    const std::vector<TensorT<double>>&, const std::vector<TensorT<double>>&,
    const std::vector<int>&);

std::vector<Tensor> straight_through(const std::vector<Tensor>& latents,
                                     const SebCodebook& codebook, const UsageMap& usage) {
  return straight_through<float>(latents, codebook.sebs, flatten_usage(usage));
}

TrainResult train(SebModel& model, const ImageSet& data, const TrainConfig& cfg) {
  if (data.images.empty()) throw ParameterError("train: empty image set");
  const int n_subsets = data.has_labels() ? data.subset_count : 1;
  if (n_subsets <= 0) throw ParameterError("train: bad subset count");
  std::vector<std::vector<size_t>> members(static_cast<size_t>(n_subsets));
  for (size_t i = 0; i < data.images.size(); ++i) {
    const int j = data.has_labels() ? data.subset_labels[i] : 0;
    if (j < 0 || j >= n_subsets) throw StructuralError("train: subset label out of range");
    members[static_cast<size_t>(j)].push_back(i);
  }
  std::vector<Tensor> batches;
  batches.reserve(members.size());
  for (const auto& m : members) {
    if (m.empty()) throw StructuralError("train: empty subset");
    std::vector<Image> imgs;
    imgs.reserve(m.size());
    for (size_t i : m) imgs.push_back(data.images[i]);
    batches.push_back(images_to_batch(imgs));
  }

  long schedule_steps = 0;
  for (const auto& [epochs, lr] : cfg.schedule) {
    if (epochs < 0 || !(lr > 0.0)) throw ParameterError("train: bad schedule entry");
    schedule_steps += static_cast<long>(epochs) * n_subsets;
  }
  const long total_steps = cfg.max_steps > 0 ? cfg.max_steps : schedule_steps;
  if (total_steps <= 0) throw ParameterError("train: zero training steps");
  auto lr_at = [&](long step) {
    long edge = 0;
    double lr = cfg.schedule.empty() ? 1e-4 : cfg.schedule.back().second;
    for (const auto& [epochs, rate] : cfg.schedule) {
      edge += static_cast<long>(epochs) * n_subsets;
      if (step < edge) return rate;
      lr = rate;
    }
    return lr;
  };

  AdamT<float> opt;
  opt.attach(model.params());
  std::map<int, Eigen::MatrixXd> warm;
  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path, std::ios::trunc);
    if (!log) throw IngestError("train: cannot open log " + cfg.log_path);
  }

  TrainResult result;
  bool underflow_warned = false;
  for (long step = 0; step < total_steps; ++step) {
    const int j = static_cast<int>(step % n_subsets);
    const double lr = lr_at(step);
    opt.zero_grad();
    StepStats stats = train_step_graph(model, batches[static_cast<size_t>(j)], cfg.lambda,
                                       cfg.beta, derive_seed(cfg.seed, 1000 + step), &warm[j]);
    if (!std::isfinite(stats.loss)) {
      if (!cfg.snapshot_path.empty()) {
        write_checkpoint(cfg.snapshot_path, model.to_checkpoint());
        std::cerr << "train: diagnostic snapshot written to " << cfg.snapshot_path << "\n";
      }
      throw NumericError("train: non-finite loss at step " + std::to_string(step));
    }
    if (stats.underflow && !underflow_warned) {
      std::cerr << "train: probability floor hit at step " << step
                << "; affected elements are priced at 32 bits\n";
      underflow_warned = true;
    }
    opt.step(lr);
    if (log) {
      nlohmann::json line;
      line["step"] = step;
      line["lr"] = lr;
      line["loss"] = stats.loss;
      line["loss_rd"] = stats.loss_rd;
      line["loss_reg"] = stats.loss_reg;
      line["bits_S"] = stats.bits_S;
      line["bits_A"] = stats.bits_A;
      line["bits_Zm"] = stats.bits_Zm;
      line["bits_Zr"] = stats.bits_Zr;
      line["mse"] = stats.mse;
      log << line.dump() << "\n";
      log.flush();
    }
    result.steps = step + 1;
    result.last = stats;
  }
  return result;
}

}  // namespace sebcomm
