#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>

#include "sebcomm/augment.hpp"
#include "sebcomm/channel.hpp"
#include "sebcomm/config.hpp"
#include "sebcomm/eval.hpp"
#include "sebcomm/image_io.hpp"
#include "sebcomm/split.hpp"
#include "sebcomm/trainer.hpp"

namespace fs = std::filesystem;
using namespace sebcomm;

namespace {

// exit codes: 0 ok, 2 usage or bad input, 3 numeric divergence, 4
// incompatible inputs

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IngestError("cannot write " + path.string());
  f << content;
}

void echo_config(const fs::path& dir, const RunConfig& cfg) {
  write_text(dir / "config.ini", config_to_ini(cfg));
}

std::unique_ptr<Projector> make_projector(const RunConfig& cfg) {
  if (cfg.projector == "conv")
    return std::make_unique<ConvFeatureProjector>(derive_seed(cfg.seed, 77));
  if (cfg.projector == "meanpool") return std::make_unique<MeanPoolProjector>();
  if (cfg.projector.rfind("file:", 0) == 0)
    return std::make_unique<FileEmbeddingProjector>(cfg.projector.substr(5));
  throw ParameterError("unknown projector '" + cfg.projector + "'");
}

void apply_labels(ImageSet& set, const std::string& labels_path) {
  if (labels_path.empty()) return;
  std::ifstream f(labels_path);
  if (!f) throw IngestError("cannot read labels " + labels_path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(std::string("bad labels JSON: ") + e.what());
  }
  if (!j.contains("J") || !j.contains("labels"))
    throw IngestError("labels JSON must hold J and labels");
  const int J = j["J"].get<int>();
  std::vector<int> labels = j["labels"].get<std::vector<int>>();
  if (labels.size() != set.images.size())
    throw IncompatError("labels cover " + std::to_string(labels.size()) + " images, loaded " +
                        std::to_string(set.images.size()));
  for (int l : labels)
    if (l < 0 || l >= J) throw IncompatError("label out of range in " + labels_path);
  set.subset_labels = std::move(labels);
  set.subset_count = J;
}

ImageSet augmented_trainset(const ImageSet& set, const RunConfig& cfg) {
  if (cfg.augment <= 0) return set;
  ImageSet out;
  out.subset_count = set.subset_count;
  for (size_t i = 0; i < set.images.size(); ++i) {
    std::vector<Image> copies = augment(set.images[i], cfg.augment, cfg.aug_size, cfg.aug_size,
                                        derive_seed(cfg.seed, 500 + i));
    for (Image& im : copies) {
      out.images.push_back(std::move(im));
      if (set.has_labels()) out.subset_labels.push_back(set.subset_labels[i]);
    }
  }
  return out;
}

std::vector<std::vector<size_t>> group_by_subset(const ImageSet& set) {
  const int n_subsets = set.has_labels() ? set.subset_count : 1;
  std::vector<std::vector<size_t>> groups(static_cast<size_t>(n_subsets));
  for (size_t i = 0; i < set.images.size(); ++i)
    groups[static_cast<size_t>(set.has_labels() ? set.subset_labels[i] : 0)].push_back(i);
  return groups;
}

int run_split(const RunConfig& cfg, const std::vector<std::string>& paths,
              const std::string& out_dir, const std::string& dump_embeddings) {
  ImageSet set = load_images(paths);
  auto projector = make_projector(cfg);
  if (!dump_embeddings.empty()) write_embeddings(dump_embeddings, embed_set(*projector, set));
  SplitResult r = split(set, *projector, cfg.j_max, cfg.seed);

  fs::create_directories(out_dir);
  nlohmann::json j;
  j["J"] = r.J;
  j["labels"] = r.labels;
  j["files"] = paths;
  auto curve = nlohmann::json::array();
  for (const auto& [jc, inertia] : r.inertia_curve) curve.push_back({jc, inertia});
  j["inertia_curve"] = curve;
  write_text(fs::path(out_dir) / "subsets.json", j.dump(2) + "\n");
  echo_config(out_dir, cfg);
  std::cout << "split: " << set.images.size() << " images into J=" << r.J << " subsets -> "
            << (fs::path(out_dir) / "subsets.json").string() << "\n";
  return 0;
}

int run_train(const RunConfig& cfg, const std::vector<std::string>& paths,
              const std::string& out_dir, const std::string& labels_path) {
  ImageSet set = load_images(paths);
  apply_labels(set, labels_path);
  ImageSet trainset = augmented_trainset(set, cfg);

  fs::create_directories(out_dir);
  echo_config(out_dir, cfg);
  SebModel model(cfg.model, cfg.seed);
  TrainConfig tc;
  tc.lambda = cfg.lambda;
  tc.beta = cfg.beta;
  tc.schedule = parse_schedule(cfg.schedule);
  tc.max_steps = cfg.max_steps;
  tc.seed = cfg.seed;
  tc.log_path = (fs::path(out_dir) / "train_log.jsonl").string();
  tc.snapshot_path = (fs::path(out_dir) / "diverged.ckpt").string();
  TrainResult r = train(model, trainset, tc);
  write_checkpoint((fs::path(out_dir) / "model.ckpt").string(), model.to_checkpoint());
  std::cout << "train: " << r.steps << " steps, last loss " << r.last.loss << " (mse "
            << r.last.mse << ", " << r.last.total_bits() << " bits) -> "
            << (fs::path(out_dir) / "model.ckpt").string() << "\n";
  return 0;
}

int run_transmit(const RunConfig& cfg, const std::vector<std::string>& paths,
                 const std::string& out_dir, const std::string& model_path,
                 const std::string& labels_path) {
  SebModel model = SebModel::from_checkpoint(read_checkpoint(model_path));
  ImageSet set = load_images(paths);
  apply_labels(set, labels_path);
  auto groups = group_by_subset(set);

  fs::create_directories(fs::path(out_dir) / "recon");
  nlohmann::json report;
  report["snr_db"] = cfg.snr_db;
  report["capacity_bits_per_symbol"] = capacity_from_snr(cfg.snr_db);
  auto subsets_json = nlohmann::json::array();
  double psnr_sum = 0.0, msssim_sum = 0.0;
  size_t n_done = 0;

  for (size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    std::vector<Image> images;
    for (size_t i : groups[g]) images.push_back(set.images[i]);
    SubsetEval ev = evaluate_subset(model, images, derive_seed(cfg.seed, g));

    const fs::path dir = fs::path(out_dir) / ("subset_" + std::to_string(g));
    fs::create_directories(dir);
    write_codebook((dir / "codebook.seb").string(), ev.codebook);
    write_usage((dir / "usage.seba").string(), ev.usage);
    write_latent_records((dir / "zm.sebz").string(), ev.zm);
    write_latent_records((dir / "zr.sebz").string(), ev.zr);

    CbrBreakdown cbr = cbr_breakdown(ev.rates, cfg.snr_db, ev.height, ev.width);
    nlohmann::json sj;
    sj["subset"] = g;
    sj["K"] = ev.codebook.K;
    sj["bits"] = {{"S", ev.rates.bits_S},
                  {"A", ev.rates.bits_A},
                  {"Zm", ev.rates.bits_Zm},
                  {"Zr", ev.rates.bits_Zr}};
    sj["symbols"] = budget(ev.rates.total(), cfg.snr_db).symbols;
    sj["cbr"] = {{"S", cbr.S}, {"A", cbr.A}, {"Zm", cbr.Zm}, {"Zr", cbr.Zr},
                 {"total", cbr.total()}};
    auto images_json = nlohmann::json::array();
    for (size_t k = 0; k < groups[g].size(); ++k) {
      const size_t i = groups[g][k];
      const std::string stem = fs::path(paths[i]).stem().string();
      const std::string name = std::to_string(i) + "_" + stem + ".png";
      save_png((fs::path(out_dir) / "recon" / name).string(), ev.reconstructions[k]);
      images_json.push_back({{"file", paths[i]},
                             {"reconstruction", "recon/" + name},
                             {"psnr", ev.metrics[k].psnr},
                             {"ms_ssim", ev.metrics[k].ms_ssim}});
      psnr_sum += ev.metrics[k].psnr;
      msssim_sum += ev.metrics[k].ms_ssim;
      ++n_done;
    }
    sj["images"] = images_json;
    subsets_json.push_back(sj);
  }
  report["subsets"] = subsets_json;
  report["psnr_mean"] = psnr_sum / static_cast<double>(n_done);
  report["msssim_mean"] = msssim_sum / static_cast<double>(n_done);
  write_text(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
  echo_config(out_dir, cfg);
  std::cout << "transmit: " << n_done << " images at " << cfg.snr_db << " dB, mean psnr "
            << report["psnr_mean"].get<double>() << " dB -> "
            << (fs::path(out_dir) / "report.json").string() << "\n";
  return 0;
}

int run_eval(const RunConfig& cfg, const std::vector<std::string>& paths,
             const std::string& out_dir, const std::string& model_path,
             const std::vector<std::string>& point_specs, const std::string& labels_path) {
  ImageSet set = load_images(paths);
  apply_labels(set, labels_path);

  std::vector<SweepPoint> points;
  for (const std::string& spec : point_specs) {
    const size_t c1 = spec.find(',');
    const size_t c2 = c1 == std::string::npos ? std::string::npos : spec.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw ParameterError("point '" + spec + "' is not snr,lambda,checkpoint");
    SweepPoint pt;
    try {
      pt.snr_db = std::stod(spec.substr(0, c1));
      pt.lambda = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    } catch (const std::exception&) {
      throw ParameterError("point '" + spec + "' is not snr,lambda,checkpoint");
    }
    pt.checkpoint = spec.substr(c2 + 1);
    points.push_back(std::move(pt));
  }
  if (points.empty()) {
    if (model_path.empty())
      throw ParameterError("eval needs --point entries or a --model checkpoint");
    points.push_back({cfg.snr_db, cfg.lambda, model_path});
  }

  std::vector<SweepRow> rows = sweep(points, set, cfg.seed);
  fs::create_directories(out_dir);
  write_sweep_csv((fs::path(out_dir) / "sweep.csv").string(), rows);
  if (!rows.empty()) render_sweep_plots(out_dir, rows);
  echo_config(out_dir, cfg);
  std::cout << "eval: " << rows.size() << " of " << points.size() << " points -> "
            << (fs::path(out_dir) / "sweep.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic-base image transmission over noisy channels"};
  app.set_version_flag("--version", "0.1.0");
  app.require_subcommand(1);

  RunConfig cfg;
  std::vector<std::string> images, points;
  std::string out_dir, labels_path, model_path, dump_embeddings;

  CLI::App* sp = app.add_subcommand("split", "partition images into correlated subsets");
  add_config_options(*sp, cfg);
  sp->add_option("images", images, "input images")->required();
  sp->add_option("--out", out_dir, "output directory")->required();
  sp->add_option("--dump-embeddings", dump_embeddings, "write the embedding table here");

  CLI::App* tr = app.add_subcommand("train", "train a model on (optionally augmented) images");
  add_config_options(*tr, cfg);
  tr->add_option("images", images, "input images")->required();
  tr->add_option("--out", out_dir, "output directory")->required();
  tr->add_option("--labels", labels_path, "subsets.json from split");

  CLI::App* tx = app.add_subcommand("transmit", "encode, price the link, decode, report");
  add_config_options(*tx, cfg);
  tx->add_option("images", images, "input images")->required();
  tx->add_option("--out", out_dir, "output directory")->required();
  tx->add_option("--model", model_path, "model checkpoint")->required();
  tx->add_option("--labels", labels_path, "subsets.json from split");

  CLI::App* ev = app.add_subcommand("eval", "sweep checkpoints over channel qualities");
  add_config_options(*ev, cfg);
  ev->add_option("images", images, "input images")->required();
  ev->add_option("--out", out_dir, "output directory")->required();
  ev->add_option("--model", model_path, "single checkpoint (with --snr/--lambda)");
  ev->add_option("--point", points, "snr,lambda,checkpoint (repeatable)");
  ev->add_option("--labels", labels_path, "subsets.json from split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sp->parsed()) return run_split(cfg, images, out_dir, dump_embeddings);
    if (tr->parsed()) return run_train(cfg, images, out_dir, labels_path);
    if (tx->parsed()) return run_transmit(cfg, images, out_dir, model_path, labels_path);
    if (ev->parsed()) return run_eval(cfg, images, out_dir, model_path, points, labels_path);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const IncompatError& e) {
    std::cerr << "incompatible inputs: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
