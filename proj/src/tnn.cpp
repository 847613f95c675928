#include "tbnn/tnn.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tbnn/errors.hpp"
#include "tbnn/io.hpp"
#include "tbnn/rng.hpp"
namespace tbnn {

using json = nlohmann::json;

Nonlinearity nonlinearity_from_string(const std::string& s) {
  if (s == "tanh") return Nonlinearity::tanh;
  if (s == "relu") return Nonlinearity::relu;
  if (s == "identity") return Nonlinearity::identity;
  throw ConfigError("unknown nonlinearity '" + s + "'");
}

std::string to_string(Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::tanh: return "tanh";
    case Nonlinearity::relu: return "relu";
    case Nonlinearity::identity: return "identity";
  }
  return "?";
}

static Eigen::MatrixXd apply_sigma(const Eigen::MatrixXd& u, Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::tanh: return u.array().tanh();
    case Nonlinearity::relu: return u.cwiseMax(0.0);
    case Nonlinearity::identity: return u;
  }
  return u;
}

static Eigen::MatrixXd sigma_prime(const Eigen::MatrixXd& u, Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::tanh:
      return 1.0 - u.array().tanh().square();
    case Nonlinearity::relu:
      return (u.array() > 0.0).cast<double>();
    case Nonlinearity::identity:
      return Eigen::MatrixXd::Ones(u.rows(), u.cols());
  }
  return Eigen::MatrixXd::Ones(u.rows(), u.cols());
}

void TnnModel::validate() const {
  if (layers.empty()) throw ConfigError("model has no layers");
  int k = layers[0].num_taps();
  for (size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.taps.empty()) throw ConfigError("layer without taps");
    if (layer.num_taps() != k)
      throw ConfigError("inconsistent tap count across layers");
    for (const auto& h : layer.taps) {
      if (h.rows() != layer.f_in() || h.cols() != layer.f_out())
        throw ConfigError("ragged tap shapes within a layer");
      if (!h.allFinite()) throw NumericError("non-finite model parameters");
    }
    if (l > 0 && layers[l - 1].f_out() != layer.f_in())
      throw ConfigError("feature widths do not chain between layers");
  }
}

void init_params(TnnModel& model, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& layer : model.layers) {
    double a = 1.0 / std::sqrt(static_cast<double>(layer.f_in()) *
                               layer.num_taps());
    for (auto& h : layer.taps)
      for (Eigen::Index r = 0; r < h.rows(); ++r)
        for (Eigen::Index c = 0; c < h.cols(); ++c)
          h(r, c) = rng.uniform(-a, a);
  }
}

TnnModel make_model(const std::vector<int>& widths, int num_taps,
                    Nonlinearity nl, std::uint64_t seed) {
  if (widths.size() < 2) throw ConfigError("need at least widths {F0, F1}");
  if (num_taps < 1) throw ConfigError("num_taps must be >= 1");
  TnnModel model;
  model.nonlinearity = nl;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    TnnLayerParams layer;
    layer.taps.assign(num_taps,
                      Eigen::MatrixXd::Zero(widths[l], widths[l + 1]));
    model.layers.push_back(std::move(layer));
  }
  init_params(model, seed);
  return model;
}

std::vector<Eigen::MatrixXd> shift_stack(const ShiftOperator& shift,
                                         const Eigen::MatrixXd& x, int k,
                                         Exec exec) {
  std::vector<Eigen::MatrixXd> z;
  z.reserve(k);
  z.push_back(x);
  for (int i = 1; i < k; ++i) z.push_back(shift.apply(z.back(), exec));
  return z;
}

Eigen::MatrixXd forward(const TnnModel& model, const ShiftOperator& shift,
                        const Eigen::MatrixXd& x0, ForwardCache* cache,
                        const std::vector<Eigen::MatrixXd>* layer0_stack,
                        Exec exec) {
  model.validate();
  if (x0.cols() != model.layers[0].f_in())
    throw DimensionError("forward: input feature width mismatch");
  if (x0.rows() != shift.dim())
    throw DimensionError("forward: input rows mismatch");
  if (cache) {
    cache->shift_stack.clear();
    cache->preact.clear();
  }
  Eigen::MatrixXd x = x0;
  for (int l = 0; l < model.num_layers(); ++l) {
    const auto& layer = model.layers[l];
    std::vector<Eigen::MatrixXd> z;
    if (l == 0 && layer0_stack) {
      z = *layer0_stack;
    } else {
      z = shift_stack(shift, x, layer.num_taps(), exec);
    }
    Eigen::MatrixXd u = z[0] * layer.taps[0];
    for (int k = 1; k < layer.num_taps(); ++k)
      u.noalias() += z[k] * layer.taps[k];
    x = apply_sigma(u, model.nonlinearity);
    if (cache) {
      cache->shift_stack.push_back(std::move(z));
      cache->preact.push_back(std::move(u));
    }
  }
  return x;
}

std::vector<TnnLayerParams> backward(const TnnModel& model,
                                     const ShiftOperator& shift,
                                     const ForwardCache& cache,
                                     const Eigen::MatrixXd& grad_output,
                                     Exec exec) {
  const int num_layers = model.num_layers();
  if (static_cast<int>(cache.preact.size()) != num_layers)
    throw NumericError("backward: cache does not match the model");
  std::vector<TnnLayerParams> grads(num_layers);
  Eigen::MatrixXd g = grad_output;
  for (int l = num_layers - 1; l >= 0; --l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd gu =
        g.cwiseProduct(sigma_prime(cache.preact[l], model.nonlinearity));
    grads[l].taps.resize(layer.num_taps());
    for (int k = 0; k < layer.num_taps(); ++k)
      grads[l].taps[k] = cache.shift_stack[l][k].transpose() * gu;
    if (l > 0) {
      // dL/dX_l = sum_k (P^T)^k GU H_k^T
      Eigen::MatrixXd v = gu;
      Eigen::MatrixXd gx = v * layer.taps[0].transpose();
      for (int k = 1; k < layer.num_taps(); ++k) {
        v = shift.apply_transpose(v, exec);
        gx.noalias() += v * layer.taps[k].transpose();
      }
      g = std::move(gx);
    }
  }
  return grads;
}

AdamState make_adam(const TnnModel& model, double lr) {
  AdamState st;
  st.lr = lr;
  st.m.resize(model.num_layers());
  st.v.resize(model.num_layers());
  for (int l = 0; l < model.num_layers(); ++l) {
    const auto& layer = model.layers[l];
    st.m[l].assign(layer.num_taps(),
                   Eigen::MatrixXd::Zero(layer.f_in(), layer.f_out()));
    st.v[l] = st.m[l];
  }
  return st;
}

void adam_step(TnnModel& model, const std::vector<TnnLayerParams>& grads,
               AdamState& st) {
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (int l = 0; l < model.num_layers(); ++l) {
    for (int k = 0; k < model.layers[l].num_taps(); ++k) {
      const Eigen::MatrixXd& g = grads[l].taps[k];
      st.m[l][k] = st.beta1 * st.m[l][k] + (1.0 - st.beta1) * g;
      st.v[l][k] = st.beta2 * st.v[l][k] + (1.0 - st.beta2) * g.cwiseProduct(g);
      Eigen::ArrayXXd mhat = st.m[l][k].array() / bc1;
      Eigen::ArrayXXd vhat = st.v[l][k].array() / bc2;
      model.layers[l].taps[k].array() -=
          st.lr * mhat / (vhat.sqrt() + st.eps);
    }
  }
}

double evaluate_mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    int n_nodes) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("evaluate_mse: shape mismatch");
  return (a - b).squaredNorm() / n_nodes;
}

TrainResult train_denoiser(TnnModel& model, const ShiftOperator& shift,
                           const Eigen::MatrixXd& noisy, int epochs, double lr,
                           std::uint64_t seed, const Eigen::MatrixXd* clean,
                           Exec exec) {
  model.validate();
  if (noisy.cols() != model.layers.back().f_out() ||
      noisy.cols() != model.layers[0].f_in())
    throw DimensionError("train_denoiser: target width mismatch");
  init_params(model, seed);
  AdamState adam = make_adam(model, lr);
  const int n_nodes = shift.n_nodes;

  // the first layer's input never changes: its shift stack is loop-invariant
  const int k0 = model.layers[0].num_taps();
  std::vector<Eigen::MatrixXd> stack0 = shift_stack(shift, noisy, k0, exec);

  TrainResult trace;
  trace.train_mse.reserve(epochs);
  ForwardCache cache;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Eigen::MatrixXd out = forward(model, shift, noisy, &cache, &stack0, exec);
    double loss = evaluate_mse(out, noisy, n_nodes);
    if (!std::isfinite(loss))
      throw TrainingDivergedError(
          "training loss is not finite at epoch " + std::to_string(epoch) +
          "; try lowering lr");
    trace.train_mse.push_back(loss);
    if (clean) trace.eval_mse.push_back(evaluate_mse(out, *clean, n_nodes));
    if (lr == 0.0) continue;  // keep the trace semantics, skip the update
    Eigen::MatrixXd grad_out = 2.0 / n_nodes * (out - noisy);
    auto grads = backward(model, shift, cache, grad_out, exec);
    adam_step(model, grads, adam);
  }
  return trace;
}

MnnResult mnn_baseline(const PointCloud& cloud, const AmbientField& noisy,
                       int num_taps, int epochs, double lr, std::uint64_t seed,
                       double epsilon, Nonlinearity nl, Exec exec) {
  if (noisy.rows() != cloud.n() || noisy.cols() != cloud.p())
    throw DimensionError("mnn_baseline: field shape mismatch");
  auto w = kernel_weights(cloud, epsilon, exec);
  ScalarGraph graph = scalar_laplacian(w, epsilon);
  ShiftOperator shift = shift_operator_dense(graph.laplacian, graph.ndeg,
                                             cloud.n(), 1, ExpMethod::eig,
                                             std::max(4096, cloud.n()));
  MnnResult res;
  res.model = make_model({cloud.p(), cloud.p()}, num_taps, nl, seed);
  res.trace = train_denoiser(res.model, shift, noisy, epochs, lr, seed,
                             nullptr, exec);
  Eigen::MatrixXd out = forward(res.model, shift, noisy, nullptr, nullptr, exec);
  res.eval_mse = evaluate_mse(out, rotational_field(cloud), cloud.n());
  return res;
}

void save_checkpoint_json(const std::filesystem::path& path,
                          const TnnModel& model, std::uint64_t seed,
                          int epochs) {
  json j;
  j["nonlinearity"] = to_string(model.nonlinearity);
  j["seed"] = seed;
  j["epochs"] = epochs;
  j["layers"] = json::array();
  for (const auto& layer : model.layers) {
    json jl;
    jl["f_in"] = layer.f_in();
    jl["f_out"] = layer.f_out();
    jl["num_taps"] = layer.num_taps();
    json taps = json::array();
    for (const auto& h : layer.taps) {
      std::vector<double> flat;
      flat.reserve(h.size());
      for (Eigen::Index r = 0; r < h.rows(); ++r)
        for (Eigen::Index c = 0; c < h.cols(); ++c) flat.push_back(h(r, c));
      taps.push_back(flat);
    }
    jl["taps"] = std::move(taps);
    j["layers"].push_back(std::move(jl));
  }
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

TnnModel load_checkpoint_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json j = json::parse(in);
  TnnModel model;
  model.nonlinearity = nonlinearity_from_string(j.at("nonlinearity"));
  for (const auto& jl : j.at("layers")) {
    TnnLayerParams layer;
    int fi = jl.at("f_in"), fo = jl.at("f_out");
    for (const auto& flat : jl.at("taps")) {
      auto v = flat.get<std::vector<double>>();
      if (static_cast<int>(v.size()) != fi * fo)
        throw ConfigError("checkpoint tap size mismatch");
      Eigen::MatrixXd h(fi, fo);
      for (int r = 0; r < fi; ++r)
        for (int c = 0; c < fo; ++c) h(r, c) = v[r * fo + c];
      layer.taps.push_back(std::move(h));
    }
    model.layers.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

void save_loss_trace_csv(const std::filesystem::path& path,
                         const TrainResult& trace) {
  std::vector<std::vector<std::string>> rows;
  for (size_t e = 0; e < trace.train_mse.size(); ++e) {
    std::vector<std::string> row = {std::to_string(e),
                                    format_double(trace.train_mse[e])};
    row.push_back(e < trace.eval_mse.size() ? format_double(trace.eval_mse[e])
                                            : "");
    rows.push_back(std::move(row));
  }
  write_csv(path, {"epoch", "train_mse", "eval_mse"}, rows);
}

}  // namespace tbnn
