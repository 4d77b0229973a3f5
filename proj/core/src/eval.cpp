#include "sebcomm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "sebcomm/channel.hpp"
#include "sebcomm/plot.hpp"
#include "sebcomm/rng.hpp"

namespace sebcomm {

namespace {

Tensor single_batch(const Image& image) {
  Tensor out({1, image.channels(), image.height(), image.width()});
  std::copy_n(image.pixels.ptr(), image.pixels.size(), out.ptr());
  return out;
}

Tensor drop_batch_dim(const Tensor& t) {
  Tensor out({t.dim(1), t.dim(2), t.dim(3)});
  std::copy_n(t.ptr(), t.size(), out.ptr());
  return out;
}

}  // namespace

Tensor reconstruct(const Tensor& prediction, const Tensor& residual) {
  check_same_shape(prediction, residual, "reconstruct");
  Tensor out = zeros_like(prediction);
  for (int64_t e = 0; e < out.size(); ++e)
    out.ptr()[e] = std::clamp(prediction.ptr()[e] + residual.ptr()[e], 0.0f, 1.0f);
  return out;
}

SubsetEval evaluate_subset(SebModel& model, const std::vector<Image>& images, uint64_t seed) {
  if (images.empty()) throw ParameterError("evaluate_subset: empty subset");
  const int H = images[0].height(), W = images[0].width();
  for (const Image& im : images)
    if (im.height() != H || im.width() != W)
      throw IncompatError("evaluate_subset: subset mixes image sizes");

  const int p = model.hyper.patch;
  const int n = static_cast<int>(images.size());
  std::vector<PatchGrid> grids;
  grids.reserve(images.size());
  for (const Image& im : images) grids.push_back(patchify(im, p, p));
  const int n_p = grids[0].patch_count();

  std::vector<Tensor> latents = encode_patches(model.seb_enc, grids);
  CodebookOptions opts;
  opts.divisor = model.hyper.seb_divisor;
  auto [book, usage] = build_codebook(latents, n, n_p, seed, opts);
  for (Tensor& seb : book.sebs) seb = quantize(seb, QuantizeMode::kEval);

  SubsetEval out;
  out.height = H;
  out.width = W;
  out.rates.n_images = n;
  out.rates.bits_S = rate_S(model.em_seb, book);
  out.rates.bits_A = rate_A(n, n_p, book.K);
  decode_codebook(model.ref_dec, book);

  std::vector<GridGeometry> geoms, full_geoms;
  for (const PatchGrid& g : grids) {
    GridGeometry geo = geometry_of(g);
    geoms.push_back(geo);
    geo.pad = {};
    full_geoms.push_back(geo);
  }
  out.references = assemble_reference(book, usage, geoms);
  std::vector<Image> refs_padded = assemble_reference(book, usage, full_geoms);

  for (int i = 0; i < n; ++i) {
    PatchGrid g0 = grids[static_cast<size_t>(i)];
    g0.pad = {};
    Tensor target = single_batch(depatchify(g0));
    Tensor ref = single_batch(refs_padded[static_cast<size_t>(i)]);

    Tensor flow = model.flow_est.forward(target, ref);
    Tensor zm_q = quantize(model.comp_enc.forward(flow), QuantizeMode::kEval);
    model.em_comp.condition(ref);
    out.rates.bits_Zm += static_cast<double>(model.em_comp.bits(zm_q));
    Tensor flow_hat = model.comp_dec.forward(zm_q);
    Tensor prediction = warp(ref, flow_hat);

    Tensor residual = zeros_like(prediction);
    for (int64_t e = 0; e < residual.size(); ++e)
      residual.ptr()[e] = target.ptr()[e] - prediction.ptr()[e];
    Tensor zr_q = quantize(model.res_enc.forward(residual), QuantizeMode::kEval);
    out.rates.bits_Zr += static_cast<double>(model.em_res.bits(zr_q));
    Tensor residual_hat = model.res_dec.forward(zr_q);

    const PadInfo& pad = grids[static_cast<size_t>(i)].pad;
    Tensor canvas = reconstruct(prediction, residual_hat);
    Image recon(H, W);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          recon.pixels.at(c, y, x) = canvas.at(0, c, y + pad.top, x + pad.left);

    ImageEval ev;
    ev.psnr = psnr(images[static_cast<size_t>(i)], recon);
    ev.ms_ssim = ms_ssim(images[static_cast<size_t>(i)], recon);
    out.metrics.push_back(ev);
    out.reconstructions.push_back(std::move(recon));
    out.zm.push_back(drop_batch_dim(zm_q));
    out.zr.push_back(drop_batch_dim(zr_q));
  }
  out.codebook = std::move(book);
  out.usage = std::move(usage);
  return out;
}

std::vector<SweepRow> sweep(const std::vector<SweepPoint>& points, const ImageSet& data,
                            uint64_t seed) {
  if (data.images.empty()) throw ParameterError("sweep: empty image set");
  const int n_subsets = data.has_labels() ? data.subset_count : 1;
  std::vector<std::vector<Image>> groups(static_cast<size_t>(n_subsets));
  for (size_t i = 0; i < data.images.size(); ++i) {
    const int j = data.has_labels() ? data.subset_labels[i] : 0;
    if (j < 0 || j >= n_subsets) throw StructuralError("sweep: subset label out of range");
    groups[static_cast<size_t>(j)].push_back(data.images[i]);
  }

  std::map<std::string, SebModel> cache;
  std::vector<SweepRow> rows;
  for (const SweepPoint& pt : points) {
    auto it = cache.find(pt.checkpoint);
    if (it == cache.end()) {
      try {
        SebModel model = SebModel::from_checkpoint(read_checkpoint(pt.checkpoint));
        it = cache.emplace(pt.checkpoint, std::move(model)).first;
      } catch (const Error& e) {
        std::cerr << "sweep: skipping point (snr " << pt.snr_db << " dB, lambda " << pt.lambda
                  << "): " << e.what() << "\n";
        continue;
      }
    }
    SebModel& model = it->second;

    SweepRow row;
    row.snr_db = pt.snr_db;
    row.lambda = pt.lambda;
    RateBreakdown total;
    double psnr_sum = 0.0, msssim_sum = 0.0;
    int64_t n_images = 0, pixels = 0;
    for (size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].empty()) continue;
      SubsetEval ev =
          evaluate_subset(model, groups[g], derive_seed(seed, static_cast<uint64_t>(g)));
      total.bits_S += ev.rates.bits_S;
      total.bits_A += ev.rates.bits_A;
      total.bits_Zm += ev.rates.bits_Zm;
      total.bits_Zr += ev.rates.bits_Zr;
      for (const ImageEval& m : ev.metrics) {
        psnr_sum += m.psnr;
        msssim_sum += m.ms_ssim;
      }
      n_images += static_cast<int64_t>(groups[g].size());
      pixels += static_cast<int64_t>(groups[g].size()) * ev.height * ev.width;
    }
    row.psnr_mean = psnr_sum / static_cast<double>(n_images);
    row.msssim_mean = msssim_sum / static_cast<double>(n_images);
    row.bpp = total.total() / static_cast<double>(pixels);
    const double symbols_hw = 3.0 * static_cast<double>(pixels);
    row.cbr.S = budget(total.bits_S, pt.snr_db).symbols / symbols_hw;
    row.cbr.A = budget(total.bits_A, pt.snr_db).symbols / symbols_hw;
    row.cbr.Zm = budget(total.bits_Zm, pt.snr_db).symbols / symbols_hw;
    row.cbr.Zr = budget(total.bits_Zr, pt.snr_db).symbols / symbols_hw;
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IngestError("cannot open " + path);
  f << "snr_db,lambda,psnr_mean,msssim_mean,cbr_total,cbr_S,cbr_A,cbr_Zm,cbr_Zr,bpp\n";
  char buf[320];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  r.snr_db, r.lambda, r.psnr_mean, r.msssim_mean, r.cbr.total(), r.cbr.S, r.cbr.A,
                  r.cbr.Zm, r.cbr.Zr, r.bpp);
    f << buf;
  }
}

void render_sweep_plots(const std::string& dir, const std::vector<SweepRow>& rows) {
  if (rows.empty()) return;
  std::vector<double> lambdas;
  for (const SweepRow& r : rows)
    if (std::find(lambdas.begin(), lambdas.end(), r.lambda) == lambdas.end())
      lambdas.push_back(r.lambda);
  std::sort(lambdas.begin(), lambdas.end());

  auto series_for = [&](double SweepRow::*field) {
    std::vector<plot::Series> out;
    for (double l : lambdas) {
      plot::Series s;
      char buf[64];
      std::snprintf(buf, sizeof buf, "lambda %.6g", l);
      s.label = buf;
      std::vector<std::pair<double, double>> pts;
      for (const SweepRow& r : rows)
        if (r.lambda == l) pts.emplace_back(r.snr_db, r.*field);
      std::sort(pts.begin(), pts.end());
      for (auto& [x, y] : pts) {
        s.x.push_back(x);
        s.y.push_back(y);
      }
      out.push_back(std::move(s));
    }
    return out;
  };

  plot::lines(dir + "/psnr_vs_snr.png", series_for(&SweepRow::psnr_mean), "psnr vs channel snr",
              "snr (db)", "psnr (db)");
  plot::lines(dir + "/msssim_vs_snr.png", series_for(&SweepRow::msssim_mean),
              "ms-ssim vs channel snr", "snr (db)", "ms-ssim");

  plot::StackedBars bars;
  bars.part_labels = {"cbr S", "cbr A", "cbr Zm", "cbr Zr"};
  bars.values.assign(4, {});
  for (const SweepRow& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g/%.4g", r.snr_db, r.lambda);
    bars.group_labels.emplace_back(buf);
    bars.values[0].push_back(r.cbr.S);
    bars.values[1].push_back(r.cbr.A);
    bars.values[2].push_back(r.cbr.Zm);
    bars.values[3].push_back(r.cbr.Zr);
  }
  plot::stacked_bars(dir + "/cbr_breakdown.png", bars, "cbr composition (snr/lambda)", "cbr");
}

}  // namespace sebcomm
