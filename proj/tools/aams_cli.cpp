// SPDX-License-Identifier: Apache-2.0
// Command-line front end: stylize, reconstruct, attention-map, sweep, plus
// helpers for random weight bundles and saliency scoring.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "aams/aams.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumerical = 4;

int exit_code_for(aams::ErrorKind kind) {
  switch (kind) {
    case aams::ErrorKind::configuration: return kExitConfig;
    case aams::ErrorKind::numerical: return kExitNumerical;
    case aams::ErrorKind::dimension:
    case aams::ErrorKind::format:
    case aams::ErrorKind::validation: return kExitInput;
  }
  return kExitInput;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw aams::FormatError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw aams::FormatError("failed writing '" + path + "'");
}

std::string gamma_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void print_report(const aams::RenderReport& r) {
  const auto& s = r.stages;
  std::fprintf(stderr,
               "%dx%d, K=%d: encode %.3fs attention %.3fs whiten %.3fs swaps %.3fs fusion %.3fs color %.3fs "
               "decode %.3fs total %.3fs\n",
               r.width, r.height, r.strokes, s.encode, s.attention, s.whiten, s.swaps, s.fusion, s.color, s.decode,
               r.total_seconds);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

struct StylizeArgs {
  std::string content, style, weights, out, emit_attention;
  std::optional<int> strokes;
  std::vector<double> betas;
  aams::StylizeConfig cfg;
};

aams::StylizeConfig resolve_config(const StylizeArgs& a) {
  aams::StylizeConfig cfg = a.cfg;
  if (a.strokes) {
    cfg.strokes = *a.strokes;
    cfg.betas = aams::default_betas(cfg.strokes);
  }
  if (!a.betas.empty()) {
    cfg.betas = a.betas;
    if (!a.strokes) cfg.strokes = static_cast<int>(a.betas.size());
  }
  cfg.validate();
  return cfg;
}

int run_stylize(const StylizeArgs& a) {
  const aams::StylizeConfig cfg = resolve_config(a);
  const aams::WeightBundle bundle = aams::load_weights_file(a.weights);
  const aams::Tensor content = aams::read_png_rgb(a.content);
  const aams::Tensor style = aams::read_png_rgb(a.style);
  const aams::StylizeResult result = aams::stylize(content, style, bundle, cfg);
  aams::write_png_rgb(a.out, result.image);
  if (!a.emit_attention.empty()) aams::write_png_gray(a.emit_attention, result.attention.map);
  print_report(result.report);
  return kExitOk;
}

int run_reconstruct(const std::string& input, const std::string& weights, const std::string& out,
                    const std::string& losses, int max_side) {
  const aams::WeightBundle bundle = aams::load_weights_file(weights);
  const aams::Tensor image = aams::fit_to_grid(aams::read_png_rgb(input), max_side);
  const aams::ReconstructResult r = aams::reconstruct(image, bundle);
  aams::write_png_rgb(out, r.image);
  char row[256];
  std::snprintf(row, sizeof(row), "%.9g,%.9g,%.9g,%.9g\n", r.parts.content, r.parts.attention, r.parts.tv, r.total);
  if (!losses.empty()) write_text(losses, std::string("content,attention,tv,total\n") + row);
  std::printf("content=%.9g attention=%.9g tv=%.9g total=%.9g\n", r.parts.content, r.parts.attention, r.parts.tv,
              r.total);
  return kExitOk;
}

int run_attention_map(const std::string& input, const std::string& weights, const std::string& out, double sigma,
                      int max_side) {
  if (!(sigma >= 0.0)) throw aams::ConfigurationError("sigma must be non-negative");
  const aams::WeightBundle bundle = aams::load_weights_file(weights);
  const aams::Tensor image = aams::fit_to_grid(aams::read_png_rgb(input), max_side);
  const aams::EncoderTaps taps = aams::encode(image, bundle);
  const aams::AttentionFeature a = aams::attention_feature(taps.relu4_1, aams::AttentionParams::from_bundle(bundle));
  aams::write_png_gray(out, aams::attention_filter(a, sigma).map);
  return kExitOk;
}

int run_sweep(const StylizeArgs& a, const std::vector<double>& gammas, const std::vector<int>& strokes,
              const std::vector<double>& sigmas, const std::string& out_dir) {
  aams::SweepGrid grid;
  if (!gammas.empty()) grid.gammas = gammas;
  if (!strokes.empty()) grid.strokes = strokes;
  if (!sigmas.empty()) grid.sigmas = sigmas;
  const aams::StylizeConfig base = resolve_config(a);
  const aams::WeightBundle bundle = aams::load_weights_file(a.weights);
  const aams::Tensor content = aams::read_png_rgb(a.content);
  const aams::Tensor style = aams::read_png_rgb(a.style);
  const aams::SweepResult result = aams::sweep(content, style, bundle, grid, base);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw aams::FormatError("cannot create '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);
  aams::write_png_rgb((dir / "montage.png").string(), result.montage);
  for (const aams::SweepCell& cell : result.cells) {
    const std::string name =
        "k" + std::to_string(cell.strokes) + "_s" + gamma_label(cell.sigma) + "_g" + gamma_label(cell.gamma) + ".png";
    aams::write_png_rgb((dir / name).string(), cell.result.image);
    print_report(cell.result.report);
  }
  write_text((dir / "report.csv").string(), aams::sweep_csv(result));
  return kExitOk;
}

int run_init_weights(const std::string& out, std::uint64_t seed) {
  const std::vector<std::uint8_t> bytes = aams::save_weights(aams::make_random_bundle(seed));
  aams::write_file_bytes(out, bytes);
  return kExitOk;
}

int run_saliency(const std::string& content, const std::string& stylized, const std::string& fixations, bool csv) {
  aams::SaliencyPair pair{aams::read_png_gray(content), aams::read_png_gray(stylized), std::nullopt};
  if (!fixations.empty()) pair.fixations = aams::read_png_gray(fixations);
  const aams::SaliencyScores scores = aams::saliency_metrics(pair);
  if (csv)
    std::printf("%s\n%s\n", aams::kSaliencyCsvHeader, aams::to_csv_row(scores).c_str());
  else
    std::printf("%s\n", aams::to_record(scores).c_str());
  return kExitOk;
}

void add_transfer_options(CLI::App* cmd, StylizeArgs& a) {
  cmd->add_option("--content", a.content, "Content image (PNG)")->required();
  cmd->add_option("--style", a.style, "Style image (PNG)")->required();
  cmd->add_option("--weights", a.weights, "AAMS-W1 weight bundle")->required();
  cmd->add_option("--strokes", a.strokes, "Number of swapped strokes K (K+1 strokes are fused)");
  cmd->add_option("--betas", a.betas, "Comma-separated style scale coefficients")->delimiter(',');
  cmd->add_option("--gamma", a.cfg.gamma, "Fusion smoothing factor")->capture_default_str();
  cmd->add_option("--sigma", a.cfg.sigma, "Attention-map Gaussian sigma (grid cells)")->capture_default_str();
  cmd->add_option("--patch", a.cfg.patch, "Style-swap patch size (odd)")->capture_default_str();
  cmd->add_option("--max-side", a.cfg.max_side, "Resize cap for the longer image side")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale style transfer with attention-weighted stroke fusion"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (overrides AAMS_THREADS)");

  StylizeArgs stylize_args;
  auto* stylize = app.add_subcommand("stylize", "Stylize a content image with a style image");
  add_transfer_options(stylize, stylize_args);
  stylize->add_option("--out", stylize_args.out, "Output PNG")->required();
  stylize->add_option("--emit-attention", stylize_args.emit_attention, "Also write the attention map (gray PNG)");

  std::string rec_input, rec_weights, rec_out, rec_losses;
  int rec_max_side = aams::kDefaultMaxSide;
  auto* reconstruct = app.add_subcommand("reconstruct", "Autoencoder reconstruction with loss report");
  reconstruct->add_option("--input", rec_input, "Input image (PNG)")->required();
  reconstruct->add_option("--weights", rec_weights, "AAMS-W1 weight bundle")->required();
  reconstruct->add_option("--out", rec_out, "Output PNG")->required();
  reconstruct->add_option("--losses", rec_losses, "Write content,attention,tv,total as CSV");
  reconstruct->add_option("--max-side", rec_max_side, "Resize cap for the longer image side")->capture_default_str();

  std::string att_input, att_weights, att_out;
  double att_sigma = aams::kDefaultAttentionSigma;
  int att_max_side = aams::kDefaultMaxSide;
  auto* attention = app.add_subcommand("attention-map", "Write the normalized attention map as a gray PNG");
  attention->add_option("--input", att_input, "Input image (PNG)")->required();
  attention->add_option("--weights", att_weights, "AAMS-W1 weight bundle")->required();
  attention->add_option("--out", att_out, "Output PNG")->required();
  attention->add_option("--sigma", att_sigma, "Gaussian sigma (grid cells)")->capture_default_str();
  attention->add_option("--max-side", att_max_side, "Resize cap for the longer image side")->capture_default_str();

  StylizeArgs sweep_args;
  std::vector<double> sweep_gammas, sweep_sigmas;
  std::vector<int> sweep_strokes;
  std::string sweep_dir;
  auto* sweep = app.add_subcommand("sweep", "Grid over gamma / K / sigma with a montage and timing CSV");
  add_transfer_options(sweep, sweep_args);
  sweep->add_option("--gammas", sweep_gammas, "Comma-separated gamma values")->delimiter(',');
  sweep->add_option("--strokes-list", sweep_strokes, "Comma-separated K values")->delimiter(',');
  sweep->add_option("--sigmas", sweep_sigmas, "Comma-separated sigma values")->delimiter(',');
  sweep->add_option("--out-dir", sweep_dir, "Output directory")->required();

  std::string init_out;
  std::uint64_t init_seed = 1;
  auto* init = app.add_subcommand("init-weights", "Write a randomly initialized AAMS-W1 bundle");
  init->add_option("--out", init_out, "Output weight file")->required();
  init->add_option("--seed", init_seed, "Random seed")->capture_default_str();

  std::string sal_content, sal_stylized, sal_fix;
  bool sal_csv = false;
  auto* saliency = app.add_subcommand("saliency-metrics", "Score two saliency maps (gray PNGs)");
  saliency->add_option("--content", sal_content, "Content saliency map")->required();
  saliency->add_option("--stylized", sal_stylized, "Stylized saliency map")->required();
  saliency->add_option("--fixations", sal_fix, "Binary fixation mask");
  saliency->add_flag("--csv", sal_csv, "Print a CSV header and row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (threads > 0) aams::set_max_threads(threads);

  try {
    if (*stylize) return run_stylize(stylize_args);
    if (*reconstruct) return run_reconstruct(rec_input, rec_weights, rec_out, rec_losses, rec_max_side);
    if (*attention) return run_attention_map(att_input, att_weights, att_out, att_sigma, att_max_side);
    if (*sweep) return run_sweep(sweep_args, sweep_gammas, sweep_strokes, sweep_sigmas, sweep_dir);
    if (*init) return run_init_weights(init_out, init_seed);
    if (*saliency) return run_saliency(sal_content, sal_stylized, sal_fix, sal_csv);
  } catch (const aams::Error& e) {
    std::fprintf(stderr, "aams: %s\n", e.what());
    return exit_code_for(e.kind());
  }
  return kExitConfig;
}
