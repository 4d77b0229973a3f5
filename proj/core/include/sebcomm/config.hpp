#ifndef SEBCOMM_CONFIG_HPP_
#define SEBCOMM_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sebcomm/model.hpp"

namespace CLI {
class App;
}

namespace sebcomm {

// Run-wide knobs with production defaults. Resolution order when bound to a
// command line: flags, then environment, then config file, then these.
struct RunConfig {
  ModelHyper model;
  double lambda = 1024.0;
  double beta = 1.0;
  std::string schedule = "1x1e-4,1x1e-5,3x1e-6";  // epochs x learning rate stages
  long max_steps = 0;
  double snr_db = 10.0;
  int augment = 0;      // augmented copies per source image; 0 keeps originals
  int aug_size = 256;   // square side of augmented crops
  int j_max = 8;        // largest candidate subset count for the splitter
  uint64_t seed = 0;
  std::string projector = "conv";  // conv | meanpool | file:<embeddings>
};

std::vector<std::pair<int, double>> parse_schedule(const std::string& text);

// Registers every RunConfig field as a flag (plus --config for an INI file
// and SEBCOMM_SEED for the seed).
void add_config_options(CLI::App& app, RunConfig& cfg);

// INI echo of the resolved configuration; readable back through --config.
std::string config_to_ini(const RunConfig& cfg);

}  // namespace sebcomm

#endif  // SEBCOMM_CONFIG_HPP_
