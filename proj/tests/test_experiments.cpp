#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tbnn/errors.hpp"
#include "tbnn/experiments.hpp"
#include "tbnn/io.hpp"

using namespace tbnn;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_values = {60};
  cfg.sample_seeds = {1, 2};
  cfg.noise_seeds = {10};
  cfg.tau_values = {1e-2};
  cfg.epochs = 60;
  cfg.nonlinearity = "identity";
  return cfg;
}

}  // namespace

TEST_CASE("config loading and validation") {
  auto dir = std::filesystem::temp_directory_path() / "tbnn_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "ok.toml");
    out << "n_values = [200, 800]\n"
           "sample_seeds = [1, 2, 3, 4, 5]\n"
           "noise_seeds = [11, 12, 13, 14, 15]\n"
           "tau_values = [1e-2, 5e-2, 1e-1]\n"
           "nonlinearity = \"identity\"\n"
           "epochs = 1500\n"
           "lr = 1e-2\n";
  }
  ExperimentConfig cfg = load_config_toml(dir / "ok.toml");
  CHECK(cfg.n_values == std::vector<int>{200, 800});
  CHECK(cfg.tau_values.size() == 3);
  CHECK(cfg.epochs == 1500);
  CHECK(cfg.width_chain() == std::vector<int>{1, 1});

  {
    std::ofstream out(dir / "bad_key.toml");
    out << "n_values = [200]\nsample_seeds = [1]\nnoise_seeds = [1]\n"
           "tau_values = [0.1]\nbogus = 3\n";
  }
  CHECK_THROWS_AS(load_config_toml(dir / "bad_key.toml"), ConfigError);

  {
    std::ofstream out(dir / "small_n.toml");
    out << "n_values = [20]\nsample_seeds = [1]\nnoise_seeds = [1]\n"
           "tau_values = [0.1]\n";
  }
  CHECK_THROWS_AS(load_config_toml(dir / "small_n.toml"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("table1 runner: schema, ordering, determinism") {
  ExperimentConfig cfg = small_config();
  Table1Output a = run_table1(cfg);
  REQUIRE(a.rows.size() == 4);  // 2 sample seeds x 1 noise x 2 models
  for (const auto& r : a.rows) {
    CHECK(r.error.empty());
    CHECK(r.eval_mse >= 0);
  }
  // deterministic ordering: ddtnn row precedes mnn row per seed pair
  CHECK(a.rows[0].model == "ddtnn");
  CHECK(a.rows[1].model == "mnn");
  CHECK(a.rows[0].seed_sample <= a.rows[2].seed_sample);

  Table1Output b = run_table1(cfg);
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].eval_mse == b.rows[i].eval_mse);
    CHECK(a.rows[i].train_mse_final == b.rows[i].train_mse_final);
  }
  REQUIRE(a.summary.size() == 2);
  CHECK(a.summary[0].trials == 2);

  auto dir = std::filesystem::temp_directory_path() / "tbnn_tbl_test";
  write_table1(dir, a, cfg);
  CsvTable results = read_csv(dir / "results.csv");
  CHECK(results.header ==
        std::vector<std::string>{"experiment_id", "n", "tau", "seed_sample",
                                 "seed_noise", "model", "eval_mse",
                                 "train_mse_final", "wallclock_s", "error"});
  CHECK(results.rows.size() == 4);
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "meta.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("convergence runner on a tiny ladder") {
  ExperimentConfig cfg;
  cfg.n_values = {80, 120};
  cfg.sample_seeds = {1, 2};
  cfg.noise_seeds = {1};
  cfg.tau_values = {0.0};
  cfg.eval_points = 40;
  cfg.nonlinearity = "tanh";
  cfg.taps = 3;
  ConvergenceOutput out = run_convergence(cfg);
  REQUIRE(out.trials.size() == 4);
  for (const auto& r : out.trials) {
    CHECK(r.error.empty());
    if (r.n == 120) CHECK(r.discrepancy == 0.0);  // self-reference
    if (r.n == 80) CHECK(r.discrepancy > 0.0);
  }
  REQUIRE(out.medians.size() == 2);
  CHECK(out.medians[0].second > out.medians[1].second);

  // identity probe with a single tap reduces to sampling consistency
  ExperimentConfig idc = cfg;
  idc.taps = 1;
  idc.nonlinearity = "identity";
  ConvergenceOutput idout = run_convergence(idc);
  CHECK(idout.medians[0].second > idout.medians[1].second);
}

TEST_CASE("spectral runner emits ordered eigenvalues and diagnostics") {
  ExperimentConfig cfg;
  cfg.n_values = {100};
  cfg.sample_seeds = {3};
  cfg.noise_seeds = {1};
  cfg.tau_values = {0.0};
  SpectralOutput out = run_spectral_convergence(cfg);
  REQUIRE(out.trials.size() == 1);
  const auto& r = out.trials[0];
  CHECK(r.error.empty());
  REQUIRE(r.eigenvalues.size() == 16);
  for (size_t i = 1; i < r.eigenvalues.size(); ++i)
    CHECK(r.eigenvalues[i] >= r.eigenvalues[i - 1]);
  CHECK(r.cluster_ratio > 1.0);
  REQUIRE(out.summary.size() == 1);
}
