#include "tbnn/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tbnn/errors.hpp"
#include "tbnn/io.hpp"
#include "tbnn/rng.hpp"
#include "tbnn/spectral.hpp"
#include "tbnn/tomlmini.hpp"

namespace tbnn {

using json = nlohmann::json;
using clock_type = std::chrono::steady_clock;

static double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void ExperimentConfig::validate() const {
  if (n_values.empty() || sample_seeds.empty() || noise_seeds.empty() ||
      tau_values.empty())
    throw ConfigError("n_values, sample_seeds, noise_seeds, tau_values must be non-empty");
  for (int n : n_values)
    if (n < 50) throw ConfigError("sphere runs need n >= 50");
  for (double t : tau_values)
    if (t < 0) throw ConfigError("tau must be >= 0");
  if (layers < 1 || taps < 1) throw ConfigError("layers, taps must be >= 1");
  if (epochs < 0 || lr < 0) throw ConfigError("epochs, lr must be >= 0");
  if (eval_points < 1) throw ConfigError("eval_points must be >= 1");
  nonlinearity_from_string(nonlinearity);
  if (!widths.empty() && static_cast<int>(widths.size()) != layers + 1)
    throw ConfigError("widths must list layers+1 feature counts");
}

std::vector<int> ExperimentConfig::width_chain() const {
  if (!widths.empty()) return widths;
  return std::vector<int>(layers + 1, 1);
}

ExperimentConfig load_config_toml(const std::filesystem::path& path) {
  TomlTable t = TomlTable::parse_file(path);
  static const std::vector<std::string> known = {
      "n_values",    "sample_seeds", "noise_seeds",  "tau_values",
      "epsilon",     "epsilon_pca",  "gamma",        "layers",
      "taps",        "widths",       "nonlinearity", "lr",
      "epochs",      "eval_points",  "filter_seed",  "spectrum_count",
      "output_dir",  "threads"};
  for (const auto& k : t.keys())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("unknown config key '" + k + "'");

  ExperimentConfig cfg;
  auto ints = [&](const std::string& key) {
    std::vector<int> out;
    for (long long v : t.get_int_array(key)) out.push_back(static_cast<int>(v));
    return out;
  };
  auto seeds = [&](const std::string& key) {
    std::vector<std::uint64_t> out;
    for (long long v : t.get_int_array(key))
      out.push_back(static_cast<std::uint64_t>(v));
    return out;
  };
  if (t.has("n_values")) cfg.n_values = ints("n_values");
  if (t.has("sample_seeds")) cfg.sample_seeds = seeds("sample_seeds");
  if (t.has("noise_seeds")) cfg.noise_seeds = seeds("noise_seeds");
  if (t.has("tau_values")) cfg.tau_values = t.get_double_array("tau_values");
  cfg.epsilon = t.get_double("epsilon", cfg.epsilon);
  cfg.epsilon_pca = t.get_double("epsilon_pca", cfg.epsilon_pca);
  cfg.gamma = t.get_double("gamma", cfg.gamma);
  cfg.layers = static_cast<int>(t.get_int("layers", cfg.layers));
  cfg.taps = static_cast<int>(t.get_int("taps", cfg.taps));
  if (t.has("widths")) cfg.widths = ints("widths");
  cfg.nonlinearity = t.get_string("nonlinearity", cfg.nonlinearity);
  cfg.lr = t.get_double("lr", cfg.lr);
  cfg.epochs = static_cast<int>(t.get_int("epochs", cfg.epochs));
  cfg.eval_points = static_cast<int>(t.get_int("eval_points", cfg.eval_points));
  cfg.filter_seed =
      static_cast<std::uint64_t>(t.get_int("filter_seed", cfg.filter_seed));
  cfg.spectrum_count =
      static_cast<int>(t.get_int("spectrum_count", cfg.spectrum_count));
  cfg.output_dir = t.get_string("output_dir", cfg.output_dir);
  cfg.threads = static_cast<int>(t.get_int("threads", cfg.threads));
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["n_values"] = cfg.n_values;
  j["sample_seeds"] = cfg.sample_seeds;
  j["noise_seeds"] = cfg.noise_seeds;
  j["tau_values"] = cfg.tau_values;
  j["epsilon"] = cfg.epsilon;
  j["epsilon_pca"] = cfg.epsilon_pca;
  j["gamma"] = cfg.gamma;
  j["layers"] = cfg.layers;
  j["taps"] = cfg.taps;
  j["widths"] = cfg.width_chain();
  j["nonlinearity"] = cfg.nonlinearity;
  j["lr"] = cfg.lr;
  j["epochs"] = cfg.epochs;
  j["eval_points"] = cfg.eval_points;
  j["filter_seed"] = cfg.filter_seed;
  j["spectrum_count"] = cfg.spectrum_count;
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  return j.dump(2);
}

static void apply_thread_limit(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
}

// model seed derived from both trial seeds so every trial trains a freshly
// initialized network, deterministically
static std::uint64_t model_seed(std::uint64_t sample, std::uint64_t noise,
                                int model_id) {
  return mix_seed(mix_seed(sample, noise), static_cast<std::uint64_t>(model_id));
}

Table1Output run_table1(const ExperimentConfig& cfg) {
  cfg.validate();
  apply_thread_limit(cfg);
  Nonlinearity nl = nonlinearity_from_string(cfg.nonlinearity);
  Table1Output out;

  for (int n : cfg.n_values) {
    for (std::uint64_t seed_sample : cfg.sample_seeds) {
      PointCloud cloud = sample_sphere(n, seed_sample);
      SheafOptions opts;
      opts.epsilon = cfg.epsilon;
      opts.epsilon_pca = cfg.epsilon_pca;
      opts.gamma = cfg.gamma;
      OrthogonalSheaf sheaf = build_sheaf(cloud, opts);
      ShiftOperator shift = shift_operator(sheaf);
      AmbientField clean_field = rotational_field(cloud);
      Eigen::MatrixXd clean_signal = sample_field(sheaf, clean_field);

      struct Trial {
        double tau;
        std::uint64_t seed_noise;
        int model_id;  // 0 ddtnn, 1 mnn
      };
      std::vector<Trial> trials;
      for (double tau : cfg.tau_values)
        for (std::uint64_t seed_noise : cfg.noise_seeds)
          for (int m = 0; m < 2; ++m) trials.push_back({tau, seed_noise, m});

      std::vector<ResultRow> rows(trials.size());
#pragma omp parallel for schedule(dynamic)
      for (int t = 0; t < static_cast<int>(trials.size()); ++t) {
        const Trial& trial = trials[t];
        ResultRow row;
        row.experiment_id = "table1";
        row.n = n;
        row.tau = trial.tau;
        row.seed_sample = seed_sample;
        row.seed_noise = trial.seed_noise;
        row.model = trial.model_id == 0 ? "ddtnn" : "mnn";
        auto t0 = clock_type::now();
        try {
          AmbientField noisy_field =
              add_awgn(clean_field, trial.tau, trial.seed_noise);
          // trials run inside a parallel region; inner kernels stay serial
          if (trial.model_id == 0) {
            Eigen::VectorXd noisy = sample_field(sheaf, noisy_field);
            TnnModel model = make_model(cfg.width_chain(), cfg.taps, nl,
                                        model_seed(seed_sample, trial.seed_noise, 0));
            TrainResult trace =
                train_denoiser(model, shift, noisy, cfg.epochs, cfg.lr,
                               model_seed(seed_sample, trial.seed_noise, 0),
                               &clean_signal, Exec::serial);
            Eigen::MatrixXd y =
                forward(model, shift, noisy, nullptr, nullptr, Exec::serial);
            row.eval_mse = evaluate_mse(y, clean_signal, n);
            row.train_mse_final =
                trace.train_mse.empty() ? 0.0 : trace.train_mse.back();
          } else {
            MnnResult mnn = mnn_baseline(
                cloud, noisy_field, cfg.taps, cfg.epochs, cfg.lr,
                model_seed(seed_sample, trial.seed_noise, 1), sheaf.epsilon, nl,
                Exec::serial);
            row.eval_mse = mnn.eval_mse;
            row.train_mse_final =
                mnn.trace.train_mse.empty() ? 0.0 : mnn.trace.train_mse.back();
          }
        } catch (const std::exception& e) {
          row.error = e.what();
          row.eval_mse = std::nan("");
          row.train_mse_final = std::nan("");
        }
        row.wallclock_s = seconds_since(t0);
        rows[t] = std::move(row);
      }
      for (auto& r : rows) out.rows.push_back(std::move(r));
    }
  }

  // deterministic (n, tau, seed, model) order
  std::sort(out.rows.begin(), out.rows.end(), [](const ResultRow& a,
                                                 const ResultRow& b) {
    return std::tie(a.n, a.tau, a.seed_sample, a.seed_noise, a.model) <
           std::tie(b.n, b.tau, b.seed_sample, b.seed_noise, b.model);
  });

  for (int n : cfg.n_values)
    for (double tau : cfg.tau_values)
      for (const char* model : {"ddtnn", "mnn"}) {
        std::vector<double> vals;
        for (const auto& r : out.rows)
          if (r.n == n && r.tau == tau && r.model == model && r.error.empty())
            vals.push_back(r.eval_mse);
        CellSummary cs;
        cs.n = n;
        cs.tau = tau;
        cs.model = model;
        cs.trials = static_cast<int>(vals.size());
        if (!vals.empty()) {
          double mean = 0;
          for (double v : vals) mean += v;
          mean /= vals.size();
          double var = 0;
          for (double v : vals) var += (v - mean) * (v - mean);
          cs.mean = mean;
          cs.stddev = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
        }
        out.summary.push_back(cs);
      }
  return out;
}

void write_table1(const std::filesystem::path& dir, const Table1Output& out,
                  const ExperimentConfig& cfg) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : out.rows)
    rows.push_back({r.experiment_id, std::to_string(r.n), format_double(r.tau),
                    std::to_string(r.seed_sample), std::to_string(r.seed_noise),
                    r.model, format_double(r.eval_mse),
                    format_double(r.train_mse_final),
                    format_double(r.wallclock_s), r.error});
  write_csv(dir / "results.csv",
            {"experiment_id", "n", "tau", "seed_sample", "seed_noise", "model",
             "eval_mse", "train_mse_final", "wallclock_s", "error"},
            rows);

  std::vector<std::vector<std::string>> srows;
  for (const auto& s : out.summary)
    srows.push_back({std::to_string(s.n), format_double(s.tau), s.model,
                     format_double(s.mean), format_double(s.stddev),
                     std::to_string(s.trials)});
  write_csv(dir / "summary.csv", {"n", "tau", "model", "mean", "std", "trials"},
            srows);
  write_meta_json(dir, cfg, "table1");
}

// Probe taps for the convergence study: random, then scaled so the response
// magnitude stays within 1 over the spectrum (non-amplifying).
static FirFilter probe_taps(int k, std::uint64_t seed, double lambda_max) {
  Rng rng(seed);
  FirFilter f;
  f.taps.resize(k);
  for (int i = 0; i < k; ++i) f.taps(i) = rng.uniform(-1.0, 1.0);
  FirFrequencyResponse resp{f.taps};
  ResponseAnalysis analysis = analyze_response(resp, lambda_max);
  if (analysis.max_abs > 0) f.taps /= analysis.max_abs;
  return f;
}

ConvergenceOutput run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  apply_thread_limit(cfg);
  Nonlinearity nl = nonlinearity_from_string(cfg.nonlinearity);
  std::vector<int> ns = cfg.n_values;
  std::sort(ns.begin(), ns.end());
  const int n_max = ns.back();
  const int m = cfg.eval_points;
  if (m > ns.front())
    throw ConfigError("eval_points must not exceed the smallest n");

  ConvergenceOutput out;
  for (std::uint64_t seed : cfg.sample_seeds) {
    PointCloud big = sample_sphere(n_max, seed);
    // one fixed filter bank; lambda_max bound 2/epsilon at the largest n
    double eps_ref = cfg.epsilon > 0 ? cfg.epsilon : default_epsilon(n_max, 2);
    FirFilter probe = probe_taps(cfg.taps, cfg.filter_seed, 2.0 / eps_ref);

    std::vector<Eigen::MatrixXd> lifted(ns.size());
    std::vector<std::string> errors(ns.size());
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < static_cast<int>(ns.size()); ++idx) {
      try {
        int n = ns[idx];
        PointCloud cloud = make_cloud(big.points.topRows(n),
                                      ManifoldTag::sphere2, seed);
        SheafOptions opts;
        opts.epsilon = cfg.epsilon;
        opts.epsilon_pca = cfg.epsilon_pca;
        opts.gamma = cfg.gamma;
        opts.exec = Exec::serial;
        OrthogonalSheaf sheaf = build_sheaf(cloud, opts);
        ShiftOperator shift = shift_operator(sheaf);
        Eigen::VectorXd f = sample_field(sheaf, rotational_field(cloud));

        TnnModel model = make_model(cfg.width_chain(), cfg.taps, nl, 0);
        for (auto& layer : model.layers)
          for (int k = 0; k < layer.num_taps(); ++k)
            layer.taps[k].setConstant(probe.taps(k));
        Eigen::MatrixXd y =
            forward(model, shift, f, nullptr, nullptr, Exec::serial);
        lifted[idx] = lift_signal(sheaf, y.col(0)).topRows(m);
      } catch (const std::exception& e) {
        errors[idx] = e.what();
      }
    }
    for (size_t idx = 0; idx < ns.size(); ++idx) {
      ConvergenceRow row;
      row.n = ns[idx];
      row.seed = seed;
      if (!errors[idx].empty() || !errors.back().empty()) {
        row.error = !errors[idx].empty() ? errors[idx] : errors.back();
        row.discrepancy = std::nan("");
      } else {
        row.discrepancy =
            (lifted[idx] - lifted.back()).squaredNorm() / m;
      }
      out.trials.push_back(std::move(row));
    }
  }

  for (int n : ns) {
    std::vector<double> vals;
    for (const auto& r : out.trials)
      if (r.n == n && r.error.empty()) vals.push_back(r.discrepancy);
    if (vals.empty()) continue;
    std::sort(vals.begin(), vals.end());
    double med = vals.size() % 2 ? vals[vals.size() / 2]
                                 : 0.5 * (vals[vals.size() / 2 - 1] +
                                          vals[vals.size() / 2]);
    out.medians.emplace_back(n, med);
  }
  return out;
}

void write_convergence(const std::filesystem::path& dir,
                       const ConvergenceOutput& out,
                       const ExperimentConfig& cfg) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : out.trials)
    rows.push_back({std::to_string(r.n), std::to_string(r.seed),
                    format_double(r.discrepancy), r.error});
  write_csv(dir / "convergence_trials.csv", {"n", "seed", "discrepancy", "error"},
            rows);
  std::vector<std::vector<std::string>> med;
  for (const auto& [n, d] : out.medians)
    med.push_back({std::to_string(n), format_double(d)});
  write_csv(dir / "convergence.csv", {"n", "discrepancy"}, med);
  write_meta_json(dir, cfg, "converge");
}

static double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::nan("");
  return v.size() % 2 ? v[v.size() / 2]
                      : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

SpectralOutput run_spectral_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  apply_thread_limit(cfg);
  SpectralOutput out;
  const int want = std::max(cfg.spectrum_count, 16);

  struct Job {
    int n;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int n : cfg.n_values)
    for (std::uint64_t seed : cfg.sample_seeds) jobs.push_back({n, seed});
  std::vector<SpectralRow> rows(jobs.size());

#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < static_cast<int>(jobs.size()); ++t) {
    SpectralRow row;
    row.n = jobs[t].n;
    row.seed = jobs[t].seed;
    try {
      PointCloud cloud = sample_sphere(jobs[t].n, jobs[t].seed);
      SheafOptions opts;
      opts.epsilon = cfg.epsilon;
      opts.epsilon_pca = cfg.epsilon_pca;
      opts.gamma = cfg.gamma;
      opts.exec = Exec::serial;
      OrthogonalSheaf sheaf = build_sheaf(cloud, opts);
      SheafSpectrum sp = eigendecompose(sheaf, want);
      row.eigenvalues.assign(sp.eigenvalues.data(),
                             sp.eigenvalues.data() + want);
      Eigen::VectorXd c6 = sp.eigenvalues.head(6);
      Eigen::VectorXd c10 = sp.eigenvalues.segment(6, 10);
      row.l1_spread = (c6.maxCoeff() - c6.minCoeff()) / c6.mean();
      row.cluster_ratio = c10.mean() / c6.mean();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows[t] = std::move(row);
  }
  out.trials = std::move(rows);

  for (int n : cfg.n_values) {
    std::vector<double> spreads, ratios, r21;
    for (const auto& r : out.trials)
      if (r.n == n && r.error.empty()) {
        spreads.push_back(r.l1_spread);
        ratios.push_back(r.cluster_ratio);
        r21.push_back(r.eigenvalues[1] / r.eigenvalues[0]);
      }
    if (spreads.empty()) continue;
    double mean21 = 0;
    for (double v : r21) mean21 += v;
    mean21 /= r21.size();
    double var21 = 0;
    for (double v : r21) var21 += (v - mean21) * (v - mean21);
    out.summary.push_back(
        {n, median_of(spreads), median_of(ratios),
         r21.size() > 1 ? std::sqrt(var21 / (r21.size() - 1)) : 0.0});
  }
  return out;
}

void write_spectral(const std::filesystem::path& dir, const SpectralOutput& out,
                    const ExperimentConfig& cfg) {
  std::vector<std::string> header = {"n", "seed"};
  const int want = std::max(cfg.spectrum_count, 16);
  for (int i = 1; i <= want; ++i) header.push_back("lambda_" + std::to_string(i));
  header.push_back("l1_spread");
  header.push_back("cluster_ratio");
  header.push_back("error");
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : out.trials) {
    std::vector<std::string> row = {std::to_string(r.n), std::to_string(r.seed)};
    for (int i = 0; i < want; ++i)
      row.push_back(r.error.empty() ? format_double(r.eigenvalues[i]) : "");
    row.push_back(r.error.empty() ? format_double(r.l1_spread) : "");
    row.push_back(r.error.empty() ? format_double(r.cluster_ratio) : "");
    row.push_back(r.error);
    rows.push_back(std::move(row));
  }
  write_csv(dir / "spectral_trials.csv", header, rows);

  std::vector<std::vector<std::string>> srows;
  for (const auto& s : out.summary)
    srows.push_back({std::to_string(s.n), format_double(s.median_l1_spread),
                     format_double(s.median_cluster_ratio),
                     format_double(s.ratio21_std)});
  write_csv(dir / "spectral_convergence.csv",
            {"n", "median_l1_spread", "median_cluster_ratio", "ratio21_std"},
            srows);
  write_meta_json(dir, cfg, "spectral");
}

static std::string git_revision() {
  FILE* pipe = popen("git rev-parse HEAD 2>/dev/null", "r");
  if (!pipe) return "unknown";
  char buf[128] = {0};
  std::string out;
  while (fgets(buf, sizeof(buf), pipe)) out += buf;
  pclose(pipe);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r'))
    out.pop_back();
  return out.empty() ? "unknown" : out;
}

void write_meta_json(const std::filesystem::path& dir,
                     const ExperimentConfig& cfg, const std::string& command) {
  std::filesystem::create_directories(dir);
  json j;
  j["command"] = command;
  j["git"] = git_revision();
  j["config"] = json::parse(config_to_json(cfg));
  std::ofstream out(dir / "meta.json");
  out << j.dump(2) << "\n";
}

}  // namespace tbnn
