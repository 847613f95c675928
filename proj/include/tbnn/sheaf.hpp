#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <filesystem>
#include <vector>

#include "tbnn/geometry.hpp"
#include "tbnn/kernels.hpp"

namespace tbnn {

// Undirected edge with its kernel weight and the transport operator
// O_ij (d_hat x d_hat, orthogonal) aligning the stalk at j to the stalk at i.
// Stored once with i < j; the reverse transport is the transpose.
struct SheafEdge {
  int i, j;
  double w;
  Eigen::MatrixXd transport;
};

// Orthogonal cellular sheaf over an epsilon-graph: per-node tangent bases
// from local PCA, per-edge transports from the nearest-orthogonal alignment,
// and the normalized block Laplacian
//
//   laplacian = (1/epsilon) * (D^-1 S - I),
//
// where S_ij = w_ij/(deg_i deg_j) O_ij and D_ii = ndeg_i I. Signals live in
// R^(n*d_hat); block i occupies rows [i*d_hat, (i+1)*d_hat).
struct OrthogonalSheaf {
  int n = 0;
  int p = 0;
  int d_hat = 0;
  double epsilon = 0;
  double epsilon_pca = 0;
  double gamma = 0;
  std::uint64_t seed = 0;  // provenance of the underlying cloud

  std::vector<Eigen::MatrixXd> bases;   // n matrices, p x d_hat, orthonormal
  Eigen::SparseMatrix<double> weights;  // n x n, symmetric, zero diagonal
  std::vector<SheafEdge> edges;         // sorted (i, j), i < j
  Eigen::VectorXd deg;                  // deg_i   = sum_j w_ij
  Eigen::VectorXd ndeg;                 // ndeg_i  = sum_j w_ij/(deg_i deg_j)
  Eigen::SparseMatrix<double> s_blocks; // n*d_hat x n*d_hat
  Eigen::MatrixXd laplacian;            // dense; empty above dense_cap

  int dim() const { return n * d_hat; }
  // ndeg repeated d_hat times per node; the diagonal of D on stalk coordinates
  Eigen::VectorXd stalk_weights() const;

  Eigen::MatrixXd dense_laplacian() const;  // materializes if not cached
};

struct SheafOptions {
  double epsilon = 0;      // 0: Theorem-style schedule n^(-2/(d_hat+4))
  double epsilon_pca = 0;  // 0: same as epsilon
  double gamma = 0.9;      // local PCA cumulative variance threshold
  int d_hat_hint = 2;      // seeds the auto-epsilon schedule before PCA
  int dense_cap = 4096;    // max n*d_hat for materializing dense operators
  Exec exec = Exec::parallel;
};

// ---- construction stages ----

double default_epsilon(int n, int d_hat);

// w_ij = exp(-|x_i-x_j|^2 / sqrt(eps)) on 0 < |x_i-x_j|^2 <= sqrt(eps).
// Throws IsolatedNodeError if a row has no support.
Eigen::SparseMatrix<double> kernel_weights(const PointCloud& cloud,
                                           double epsilon,
                                           Exec exec = Exec::parallel);

struct LocalPcaResult {
  std::vector<Eigen::MatrixXd> bases;  // p x d_hat each
  int d_hat = 0;
  std::vector<int> votes;  // per-node local dimension estimate
};

// Weighted PCA of centered neighbor differences; per-node dimension is the
// smallest k whose cumulative squared-singular-value fraction reaches gamma,
// d_hat is the majority vote (ties toward the smaller dimension).
LocalPcaResult local_pca(const PointCloud& cloud, double epsilon_pca,
                         double gamma, Exec exec = Exec::parallel);

// Nearest orthogonal matrix to O_i^T O_j via SVD, one per weighted edge.
std::vector<SheafEdge> transport_operators(
    const Eigen::SparseMatrix<double>& weights,
    const std::vector<Eigen::MatrixXd>& bases, Exec exec = Exec::parallel);

OrthogonalSheaf assemble_laplacian(const Eigen::SparseMatrix<double>& weights,
                                   std::vector<Eigen::MatrixXd> bases,
                                   std::vector<SheafEdge> edges, double epsilon,
                                   int dense_cap = 4096);

// Full pipeline: weights -> local PCA -> transports -> Laplacian.
OrthogonalSheaf build_sheaf(const PointCloud& cloud,
                            const SheafOptions& opts = {});

// ---- signals ----
// A sheaf signal is a vector in R^(n*d_hat) (or a matrix with one column per
// feature); no wrapper type, block layout as documented on OrthogonalSheaf.

// block i = O_i^T field_row(i)
Eigen::VectorXd sample_field(const OrthogonalSheaf& sheaf,
                             const AmbientField& field);
// row i = O_i * block(i)
AmbientField lift_signal(const OrthogonalSheaf& sheaf,
                         const Eigen::VectorXd& signal);

// Empirical inner product (1/n) sum_i a_i . b_i over stalks.
double inner_product(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     int n_nodes);
double signal_norm(const Eigen::VectorXd& a, int n_nodes);

// ---- trivial-bundle / scalar construction ----
// The same normalized Laplacian built on the plain weighted graph (stalk
// dimension 1, unit transports). Used by the MNN baseline and as the
// independent reference for block-structure tests.
struct ScalarGraph {
  Eigen::VectorXd deg, ndeg;
  Eigen::MatrixXd laplacian;  // n x n
};
ScalarGraph scalar_laplacian(const Eigen::SparseMatrix<double>& weights,
                             double epsilon);

// ---- serialization ----
// Directory layout: bases.csv (n*p x d_hat stacked), edges.csv
// (i, j, w, t11..t<d*d> row-major), meta.json. Loading re-runs the same
// assembly, so the Laplacian reproduces bit for bit.
void save_sheaf(const std::filesystem::path& dir, const OrthogonalSheaf& sheaf);
OrthogonalSheaf load_sheaf(const std::filesystem::path& dir);

}  // namespace tbnn
