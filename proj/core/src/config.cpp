#include "sebcomm/config.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <sstream>

namespace sebcomm {

std::vector<std::pair<int, double>> parse_schedule(const std::string& text) {
  std::vector<std::pair<int, double>> out;
  std::stringstream ss(text);
  std::string stage;
  while (std::getline(ss, stage, ',')) {
    const size_t x = stage.find('x');
    if (x == std::string::npos)
      throw ParameterError("schedule stage '" + stage + "' is not epochsxrate");
    try {
      size_t used = 0;
      const int epochs = std::stoi(stage.substr(0, x), &used);
      if (used != x) throw std::invalid_argument(stage);
      const std::string rate_text = stage.substr(x + 1);
      const double rate = std::stod(rate_text, &used);
      if (used != rate_text.size()) throw std::invalid_argument(stage);
      if (epochs < 0 || !(rate > 0.0)) throw std::invalid_argument(stage);
      out.emplace_back(epochs, rate);
    } catch (const std::exception&) {
      throw ParameterError("schedule stage '" + stage + "' is not epochsxrate");
    }
  }
  if (out.empty()) throw ParameterError("empty schedule");
  return out;
}

void add_config_options(CLI::App& app, RunConfig& cfg) {
  app.set_config("--config", "", "INI configuration file");
  app.add_option("--patch", cfg.model.patch, "patch side in pixels (multiple of 16)");
  app.add_option("--c-seb", cfg.model.c_seb, "Seb latent channels");
  app.add_option("--hidden-seb", cfg.model.hidden_seb, "Seb codec hidden channels");
  app.add_option("--c-comp", cfg.model.c_comp, "compensation latent channels");
  app.add_option("--hidden-comp", cfg.model.hidden_comp, "compensation codec hidden channels");
  app.add_option("--c-res", cfg.model.c_res, "residual latent channels");
  app.add_option("--hidden-res", cfg.model.hidden_res, "residual codec hidden channels");
  app.add_option("--flow-hidden", cfg.model.flow_hidden, "flow estimator hidden channels");
  app.add_option("--ctx-hidden", cfg.model.ctx_hidden, "conditional entropy context channels");
  app.add_option("--divisor", cfg.model.seb_divisor, "patches per Seb");
  app.add_option("--lambda", cfg.lambda, "distortion weight");
  app.add_option("--beta", cfg.beta, "latent regularizer weight");
  app.add_option("--schedule", cfg.schedule, "training stages, e.g. 1x1e-4,1x1e-5,3x1e-6");
  app.add_option("--max-steps", cfg.max_steps, "hard cap on training steps (0: schedule)");
  app.add_option("--snr", cfg.snr_db, "channel SNR in dB");
  app.add_option("--augment", cfg.augment, "augmented copies per source image");
  app.add_option("--aug-size", cfg.aug_size, "square side of augmented crops");
  app.add_option("--j-max", cfg.j_max, "largest candidate subset count");
  app.add_option("--seed", cfg.seed, "run seed")->envname("SEBCOMM_SEED");
  app.add_option("--projector", cfg.projector,
                 "subset splitter features: conv, meanpool, or file:<embeddings>");
}

std::string config_to_ini(const RunConfig& cfg) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "patch=" << cfg.model.patch << "\n";
  os << "c-seb=" << cfg.model.c_seb << "\n";
  os << "hidden-seb=" << cfg.model.hidden_seb << "\n";
  os << "c-comp=" << cfg.model.c_comp << "\n";
  os << "hidden-comp=" << cfg.model.hidden_comp << "\n";
  os << "c-res=" << cfg.model.c_res << "\n";
  os << "hidden-res=" << cfg.model.hidden_res << "\n";
  os << "flow-hidden=" << cfg.model.flow_hidden << "\n";
  os << "ctx-hidden=" << cfg.model.ctx_hidden << "\n";
  os << "divisor=" << cfg.model.seb_divisor << "\n";
  os << "lambda=" << num(cfg.lambda) << "\n";
  os << "beta=" << num(cfg.beta) << "\n";
  os << "schedule=" << cfg.schedule << "\n";
  os << "max-steps=" << cfg.max_steps << "\n";
  os << "snr=" << num(cfg.snr_db) << "\n";
  os << "augment=" << cfg.augment << "\n";
  os << "aug-size=" << cfg.aug_size << "\n";
  os << "j-max=" << cfg.j_max << "\n";
  os << "seed=" << cfg.seed << "\n";
  os << "projector=" << cfg.projector << "\n";
  return os.str();
}

}  // namespace sebcomm
