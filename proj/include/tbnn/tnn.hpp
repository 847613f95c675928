#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "tbnn/filter.hpp"
#include "tbnn/geometry.hpp"

namespace tbnn {

enum class Nonlinearity { tanh, relu, identity };
Nonlinearity nonlinearity_from_string(const std::string& s);
std::string to_string(Nonlinearity nl);

// One layer: K tap matrices H_k of size F_in x F_out. The layer computes
// sigma(sum_k P^k X H_k).
struct TnnLayerParams {
  std::vector<Eigen::MatrixXd> taps;

  int num_taps() const { return static_cast<int>(taps.size()); }
  int f_in() const { return static_cast<int>(taps.at(0).rows()); }
  int f_out() const { return static_cast<int>(taps.at(0).cols()); }
};

struct TnnModel {
  std::vector<TnnLayerParams> layers;
  Nonlinearity nonlinearity = Nonlinearity::tanh;

  int num_layers() const { return static_cast<int>(layers.size()); }
  void validate() const;  // widths chain, consistent K, finite entries
};

// widths = {F_0, ..., F_L}; parameters i.i.d. uniform in [-a, a] with
// a = 1/sqrt(F_in * K).
TnnModel make_model(const std::vector<int>& widths, int num_taps,
                    Nonlinearity nl, std::uint64_t seed);
void init_params(TnnModel& model, std::uint64_t seed);

struct ForwardCache {
  // per layer: the shift stack [Z_0 .. Z_{K-1}] with Z_k = P^k X_l
  std::vector<std::vector<Eigen::MatrixXd>> shift_stack;
  // per layer: pre-activation U_l
  std::vector<Eigen::MatrixXd> preact;
};

// Stack [X, PX, .., P^{K-1}X]; shared by forward and by training loops that
// reuse a constant first-layer input.
std::vector<Eigen::MatrixXd> shift_stack(const ShiftOperator& shift,
                                         const Eigen::MatrixXd& x, int k,
                                         Exec exec = Exec::parallel);

// X_{l+1} = sigma(sum_k P^k X_l H_{l,k}). If layer0_stack is provided it is
// used as the first layer's shift stack instead of recomputing it.
Eigen::MatrixXd forward(const TnnModel& model, const ShiftOperator& shift,
                        const Eigen::MatrixXd& x0,
                        ForwardCache* cache = nullptr,
                        const std::vector<Eigen::MatrixXd>* layer0_stack = nullptr,
                        Exec exec = Exec::parallel);

// Reverse mode through the cached forward pass; returns dL/dH per layer.
std::vector<TnnLayerParams> backward(const TnnModel& model,
                                     const ShiftOperator& shift,
                                     const ForwardCache& cache,
                                     const Eigen::MatrixXd& grad_output,
                                     Exec exec = Exec::parallel);

struct AdamState {
  std::vector<std::vector<Eigen::MatrixXd>> m, v;
  long step = 0;
  double lr = 1e-2, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};
AdamState make_adam(const TnnModel& model, double lr);
void adam_step(TnnModel& model, const std::vector<TnnLayerParams>& grads,
               AdamState& state);

// (1/n_nodes) |a - b|_F^2
double evaluate_mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    int n_nodes);

struct TrainResult {
  std::vector<double> train_mse;  // per epoch
  std::vector<double> eval_mse;   // per epoch; empty when no clean target
};

// Fits the model output to the noisy target itself (the architecture's
// low-pass bias does the denoising); re-initializes parameters from seed.
// When `clean` is given, an evaluation trace against it is recorded.
TrainResult train_denoiser(TnnModel& model, const ShiftOperator& shift,
                           const Eigen::MatrixXd& noisy, int epochs, double lr,
                           std::uint64_t seed,
                           const Eigen::MatrixXd* clean = nullptr,
                           Exec exec = Exec::parallel);

struct MnnResult {
  TnnModel model;
  TrainResult trace;
  double eval_mse = 0;
};

// Same machinery on the scalar graph built from the same kernel weights;
// the 3 ambient coordinates enter as features of a 1-layer, K-tap network
// trained against the noisy field (Frobenius MSE) and scored against the
// analytic clean field.
MnnResult mnn_baseline(const PointCloud& cloud, const AmbientField& noisy,
                       int num_taps, int epochs, double lr, std::uint64_t seed,
                       double epsilon, Nonlinearity nl = Nonlinearity::identity,
                       Exec exec = Exec::parallel);

void save_checkpoint_json(const std::filesystem::path& path,
                          const TnnModel& model, std::uint64_t seed,
                          int epochs);
TnnModel load_checkpoint_json(const std::filesystem::path& path);
void save_loss_trace_csv(const std::filesystem::path& path,
                         const TrainResult& trace);

}  // namespace tbnn
