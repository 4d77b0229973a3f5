#ifndef SEBCOMM_SERIALIZE_HPP_
#define SEBCOMM_SERIALIZE_HPP_

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "sebcomm/seb_core.hpp"
#include "sebcomm/tensor.hpp"

namespace sebcomm {

// All containers are little-endian and round-trip bit-exactly.
//
//   codebook  "SEB1"  u32 K, c', h', w'; K*c'*h'*w' float32 values
//   usage     "SEBA"  u32 n_images, n_p, K; n_images*n_p zero-based indices
//                     packed MSB-first at ceil(log2 K) bits each, zero-padded
//                     to a byte boundary (K = 1 packs zero payload bytes)
//   latents   "SEBZ"  u32 c, h, w; c*h*w int32 values - one record per
//                     latent, records concatenated back to back
//   model     "SEBC"  u32 json_len, hyperparameter JSON; u32 tensor count;
//                     per tensor u32 name_len, name, u32 ndim, u32 dims...,
//                     float32 payload

void write_codebook(const std::string& path, const SebCodebook& book);
SebCodebook read_codebook(const std::string& path);

void write_usage(const std::string& path, const UsageMap& usage);
UsageMap read_usage(const std::string& path);

// latents must hold integer values (rounded); stored as int32
void write_latent_records(const std::string& path, const std::vector<Tensor>& latents);
std::vector<Tensor> read_latent_records(const std::string& path);

struct Checkpoint {
  std::string hyper_json;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// text embedding table: header "n d", then n rows of d decimal floats
void write_embeddings(const std::string& path, const Eigen::MatrixXd& rows);

}  // namespace sebcomm

#endif  // SEBCOMM_SERIALIZE_HPP_
