// Command-line front end: sheaf construction, spectra, denoising runs and the
// experiment harness. Exit codes: 0 success, 2 bad configuration/input,
// 3 numeric failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tbnn/errors.hpp"
#include "tbnn/experiments.hpp"
#include "tbnn/filter.hpp"
#include "tbnn/io.hpp"
#include "tbnn/spectral.hpp"
#include "tbnn/tnn.hpp"

using namespace tbnn;
namespace fs = std::filesystem;

namespace {

PointCloud resolve_input(const std::string& input, std::uint64_t seed) {
  if (input.rfind("sphere:", 0) == 0) {
    int n = static_cast<int>(parse_int(input.substr(7)));
    return sample_sphere(n, seed);
  }
  return load_cloud_csv(input, ManifoldTag::custom);
}

int cmd_build_sheaf(const std::string& input, std::uint64_t seed,
                    const std::string& out_dir, double epsilon,
                    double epsilon_pca, double gamma) {
  PointCloud cloud = resolve_input(input, seed);
  SheafOptions opts;
  opts.epsilon = epsilon;
  opts.epsilon_pca = epsilon_pca;
  opts.gamma = gamma;
  OrthogonalSheaf sheaf = build_sheaf(cloud, opts);
  save_sheaf(out_dir, sheaf);
  save_cloud_csv(fs::path(out_dir) / "cloud.csv", cloud);
  std::printf("sheaf: n=%d p=%d d_hat=%d epsilon=%.6g edges=%zu -> %s\n",
              sheaf.n, sheaf.p, sheaf.d_hat, sheaf.epsilon, sheaf.edges.size(),
              out_dir.c_str());
  return 0;
}

int cmd_spectrum(const std::string& sheaf_dir, int k,
                 const std::string& out_dir) {
  OrthogonalSheaf sheaf = load_sheaf(sheaf_dir);
  SheafSpectrum sp = eigendecompose(sheaf, k);
  save_spectrum(out_dir, sp);
  std::printf("spectrum: %d eigenpairs, lambda_1=%.6g lambda_max=%.6g -> %s\n",
              sp.count(), sp.eigenvalues(0),
              sp.eigenvalues(sp.count() - 1), out_dir.c_str());
  return 0;
}

int cmd_denoise(const std::string& config_path, const std::string& out_dir) {
  ExperimentConfig cfg = load_config_toml(config_path);
  const int n = cfg.n_values.front();
  const double tau = cfg.tau_values.front();
  const std::uint64_t seed_sample = cfg.sample_seeds.front();
  const std::uint64_t seed_noise = cfg.noise_seeds.front();

  PointCloud cloud = sample_sphere(n, seed_sample);
  SheafOptions opts;
  opts.epsilon = cfg.epsilon;
  opts.epsilon_pca = cfg.epsilon_pca;
  opts.gamma = cfg.gamma;
  OrthogonalSheaf sheaf = build_sheaf(cloud, opts);
  ShiftOperator shift = shift_operator(sheaf);

  AmbientField clean_field = rotational_field(cloud);
  AmbientField noisy_field = add_awgn(clean_field, tau, seed_noise);
  Eigen::MatrixXd clean = sample_field(sheaf, clean_field);
  Eigen::MatrixXd noisy = sample_field(sheaf, noisy_field);

  TnnModel model = make_model(cfg.width_chain(), cfg.taps,
                              nonlinearity_from_string(cfg.nonlinearity),
                              seed_sample);
  TrainResult trace = train_denoiser(model, shift, noisy, cfg.epochs, cfg.lr,
                                     seed_sample, &clean);
  Eigen::MatrixXd output = forward(model, shift, noisy);
  double eval = evaluate_mse(output, clean, n);

  fs::create_directories(out_dir);
  save_loss_trace_csv(fs::path(out_dir) / "loss_trace.csv", trace);
  save_checkpoint_json(fs::path(out_dir) / "checkpoint.json", model,
                       seed_sample, cfg.epochs);
  save_field_csv(fs::path(out_dir) / "denoised_field.csv", cloud,
                 lift_signal(sheaf, output.col(0)));
  nlohmann::json result = {
      {"n", n},
      {"tau", tau},
      {"seed_sample", seed_sample},
      {"seed_noise", seed_noise},
      {"eval_mse", eval},
      {"train_mse_final", trace.train_mse.back()},
      {"noisy_vs_clean_mse", evaluate_mse(noisy, clean, n)}};
  std::ofstream rout(fs::path(out_dir) / "result.json");
  rout << result.dump(2) << "\n";
  write_meta_json(out_dir, cfg, "denoise");
  std::printf("denoise: n=%d tau=%g eval_mse=%.6g (noisy floor %.6g) -> %s\n",
              n, tau, eval, evaluate_mse(noisy, clean, n), out_dir.c_str());
  return 0;
}

int cmd_table1(const std::string& config_path, const std::string& out_dir) {
  ExperimentConfig cfg = load_config_toml(config_path);
  Table1Output out = run_table1(cfg);
  write_table1(out_dir, out, cfg);
  for (const auto& s : out.summary)
    std::printf("n=%-5d tau=%-8g %-6s mean=%.4e std=%.2e (%d trials)\n", s.n,
                s.tau, s.model.c_str(), s.mean, s.stddev, s.trials);
  std::printf("-> %s\n", out_dir.c_str());
  return 0;
}

int cmd_converge(const std::string& config_path, const std::string& out_dir,
                 bool skip_output, bool skip_spectral) {
  ExperimentConfig cfg = load_config_toml(config_path);
  if (!skip_output) {
    ConvergenceOutput out = run_convergence(cfg);
    write_convergence(out_dir, out, cfg);
    for (const auto& [n, d] : out.medians)
      std::printf("n=%-5d median discrepancy %.6e\n", n, d);
  }
  if (!skip_spectral) {
    SpectralOutput sp = run_spectral_convergence(cfg);
    write_spectral(out_dir, sp, cfg);
    for (const auto& s : sp.summary)
      std::printf("n=%-5d l1 spread %.4f cluster ratio %.4f\n", s.n,
                  s.median_l1_spread, s.median_cluster_ratio);
  }
  std::printf("-> %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tangent-bundle signal processing on point-cloud sheaves"};
  app.require_subcommand(1);

  std::string input, out_dir, sheaf_dir, config_path;
  std::uint64_t seed = 0;
  double epsilon = 0, epsilon_pca = 0, gamma = 0.9;
  int k = -1;
  bool skip_output = false, skip_spectral = false;

  auto* build = app.add_subcommand("build-sheaf",
                                   "construct a sheaf from a cloud");
  build->add_option("--input", input,
                    "csv path or sphere:<n> for a sampled sphere")
      ->required();
  build->add_option("--seed", seed, "sampling seed");
  build->add_option("--out", out_dir, "output directory")->required();
  build->add_option("--epsilon", epsilon, "kernel scale (default: auto)");
  build->add_option("--epsilon-pca", epsilon_pca, "local PCA scale");
  build->add_option("--gamma", gamma, "PCA variance threshold");

  auto* spec = app.add_subcommand("spectrum", "eigendecompose a saved sheaf");
  spec->add_option("--sheaf", sheaf_dir, "sheaf directory")->required();
  spec->add_option("--k", k, "number of eigenpairs (default: all)");
  spec->add_option("--out", out_dir, "output directory")->required();

  auto* den = app.add_subcommand("denoise", "train one denoising model");
  den->add_option("--config", config_path, "toml config")->required();
  den->add_option("--out", out_dir, "output directory")->required();

  auto* tbl = app.add_subcommand("table1", "run the full denoising grid");
  tbl->add_option("--config", config_path, "toml config")->required();
  tbl->add_option("--out", out_dir, "output directory")->required();

  auto* conv = app.add_subcommand("converge", "sampling-ladder diagnostics");
  conv->add_option("--config", config_path, "toml config")->required();
  conv->add_option("--out", out_dir, "output directory")->required();
  conv->add_flag("--skip-output", skip_output, "skip the network-output study");
  conv->add_flag("--skip-spectral", skip_spectral, "skip the spectrum study");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed())
      return cmd_build_sheaf(input, seed, out_dir, epsilon, epsilon_pca, gamma);
    if (spec->parsed()) return cmd_spectrum(sheaf_dir, k, out_dir);
    if (den->parsed()) return cmd_denoise(config_path, out_dir);
    if (tbl->parsed()) return cmd_table1(config_path, out_dir);
    if (conv->parsed())
      return cmd_converge(config_path, out_dir, skip_output, skip_spectral);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
