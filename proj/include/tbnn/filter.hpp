#pragma once

#include <Eigen/Core>
#include <filesystem>

#include "tbnn/kernels.hpp"
#include "tbnn/sheaf.hpp"

namespace tbnn {

enum class ExpMethod { eig, scaling_squaring };

// P = exp(laplacian), the diffusion-step shift. The transpose is kept
// alongside so reverse-mode passes also stream contiguous rows.
struct ShiftOperator {
  RowMat p;
  RowMat p_transpose;
  ExpMethod provenance = ExpMethod::eig;
  int n_nodes = 0;
  int d_hat = 0;

  int dim() const { return static_cast<int>(p.rows()); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x,
                        Exec exec = Exec::parallel) const;
  Eigen::MatrixXd apply_transpose(const Eigen::MatrixXd& x,
                                  Exec exec = Exec::parallel) const;
};

struct FirFilter {
  Eigen::VectorXd taps;  // h_0 .. h_{K-1}
};

// eig: D^(-1/2) U diag(e^nu) U^T D^(1/2) from the symmetrized problem.
// scaling_squaring: Pade scaling-and-squaring on the dense Laplacian.
ShiftOperator shift_operator(const OrthogonalSheaf& sheaf,
                             ExpMethod method = ExpMethod::eig,
                             int dense_cap = 4096);
ShiftOperator shift_operator_dense(const Eigen::MatrixXd& laplacian,
                                   const Eigen::VectorXd& stalk_weights,
                                   int n_nodes, int d_hat,
                                   ExpMethod method = ExpMethod::eig,
                                   int dense_cap = 4096);

// sum_k h_k P^k x by iterated application; P^k is never formed.
Eigen::MatrixXd apply_fir(const ShiftOperator& shift, const FirFilter& filter,
                          const Eigen::MatrixXd& x,
                          Exec exec = Exec::parallel);

void save_filter_json(const std::filesystem::path& path,
                      const FirFilter& filter);
FirFilter load_filter_json(const std::filesystem::path& path);

}  // namespace tbnn
