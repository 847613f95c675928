#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tbnn/sheaf.hpp"
#include "tbnn/tnn.hpp"

namespace tbnn {

// Experiment harness configuration. TOML keys match field names exactly.
struct ExperimentConfig {
  std::vector<int> n_values;
  std::vector<std::uint64_t> sample_seeds;
  std::vector<std::uint64_t> noise_seeds;
  std::vector<double> tau_values;

  double epsilon = 0;      // 0 = n^(-2/(d_hat+4)) schedule
  double epsilon_pca = 0;  // 0 = same as epsilon
  double gamma = 0.9;

  int layers = 1;
  int taps = 5;
  std::vector<int> widths;  // F_0..F_L; default all-ones chain of `layers`
  std::string nonlinearity = "identity";

  double lr = 1e-2;
  int epochs = 2000;

  int eval_points = 50;             // nested-sampling probe size
  std::uint64_t filter_seed = 123;  // probe taps for the convergence study
  int spectrum_count = 16;

  std::string output_dir;
  int threads = 0;  // 0 = library default

  void validate() const;
  std::vector<int> width_chain() const;
};

ExperimentConfig load_config_toml(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct ResultRow {
  std::string experiment_id;
  int n = 0;
  double tau = 0;
  std::uint64_t seed_sample = 0;
  std::uint64_t seed_noise = 0;
  std::string model;  // "ddtnn" | "mnn"
  double eval_mse = 0;
  double train_mse_final = 0;
  double wallclock_s = 0;
  std::string error;  // empty on success
};

struct CellSummary {
  int n = 0;
  double tau = 0;
  std::string model;
  double mean = 0;
  double stddev = 0;
  int trials = 0;
};

struct Table1Output {
  std::vector<ResultRow> rows;
  std::vector<CellSummary> summary;
};

// Denoising grid: for every (n, tau), each sampling seed crossed with each
// noise seed, both models trained on the noisy target and scored against the
// clean field. Failed trials carry an error tag instead of being dropped.
Table1Output run_table1(const ExperimentConfig& cfg);
void write_table1(const std::filesystem::path& dir, const Table1Output& out,
                  const ExperimentConfig& cfg);

struct ConvergenceRow {
  int n = 0;
  std::uint64_t seed = 0;
  double discrepancy = 0;
  std::string error;
};
struct ConvergenceOutput {
  std::vector<ConvergenceRow> trials;
  std::vector<std::pair<int, double>> medians;  // (n, median discrepancy)
};

// Nested-sampling network-output stability: one fixed, non-amplifying random
// filter bank drives an untrained network on clouds of increasing size that
// share their first eval_points points; outputs are lifted to ambient space
// at the shared points and compared against the largest-n run.
ConvergenceOutput run_convergence(const ExperimentConfig& cfg);
void write_convergence(const std::filesystem::path& dir,
                       const ConvergenceOutput& out,
                       const ExperimentConfig& cfg);

struct SpectralRow {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<double> eigenvalues;  // lowest spectrum_count of -laplacian
  double l1_spread = 0;             // (max-min)/mean over the 6-value cluster
  double cluster_ratio = 0;         // mean(7..16) / mean(1..6)
  std::string error;
};
struct SpectralOutput {
  std::vector<SpectralRow> trials;
  // per n: median l1_spread, median cluster_ratio, std of lambda_2/lambda_1
  struct Summary {
    int n;
    double median_l1_spread;
    double median_cluster_ratio;
    double ratio21_std;
  };
  std::vector<Summary> summary;
};

// Low-spectrum diagnostics per (n, seed): eigenvalue ratios and the cluster
// structure of the smallest eigenvalues.
SpectralOutput run_spectral_convergence(const ExperimentConfig& cfg);
void write_spectral(const std::filesystem::path& dir, const SpectralOutput& out,
                    const ExperimentConfig& cfg);

void write_meta_json(const std::filesystem::path& dir,
                     const ExperimentConfig& cfg, const std::string& command);

}  // namespace tbnn
