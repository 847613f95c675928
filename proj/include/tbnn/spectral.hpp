#pragma once

#include <Eigen/Core>
#include <filesystem>

#include "tbnn/sheaf.hpp"

namespace tbnn {

// Eigenpairs of -laplacian. The Laplacian is similar to a symmetric matrix
// via D^(1/2); it is self-adjoint under the degree-weighted empirical inner
// product (1/n) a^T D b, and the stored eigenvectors are orthonormal in that
// product. All frequency-domain quantities (coefficients, Parseval,
// bandlimit residuals) use it; losses and signal comparisons elsewhere use
// the plain inner_product from sheaf.hpp.
struct SheafSpectrum {
  Eigen::VectorXd eigenvalues;   // ascending, >= -1e-8
  Eigen::MatrixXd eigenvectors;  // columns phi_i
  Eigen::VectorXd stalk_weights; // diagonal of D on stalk coordinates
  int n_nodes = 0;
  int d_hat = 0;

  int count() const { return static_cast<int>(eigenvalues.size()); }
  bool full() const { return count() == eigenvectors.rows(); }

  // (1/n) a^T D b
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double norm(const Eigen::VectorXd& a) const;
  // [f_hat]_i = <f, phi_i>
  Eigen::VectorXd coefficients(const Eigen::VectorXd& f) const;
};

// Solves the symmetrized problem D^(1/2) Lap D^(-1/2), back-transforms and
// normalizes eigenvectors, fixes signs (first nonzero coordinate positive).
// count < 0 keeps the whole spectrum, otherwise the lowest `count` pairs.
SheafSpectrum eigendecompose(const OrthogonalSheaf& sheaf, int count = -1);
// Same decomposition for any Laplacian with the given stalk weights (used by
// the scalar-graph path).
SheafSpectrum eigendecompose_dense(const Eigen::MatrixXd& laplacian,
                                   const Eigen::VectorXd& stalk_weights,
                                   int n_nodes, int d_hat, int count = -1);

// h_hat(lambda) = sum_k taps[k] e^(-k lambda)
struct FirFrequencyResponse {
  Eigen::VectorXd taps;
  double operator()(double lambda) const;
};

// g = sum_i h_hat(lambda_i) <f, phi_i> phi_i. A partial spectrum is accepted
// only when f is bandlimited to it (residual <= tol, relative energy).
Eigen::VectorXd spectral_filter(const SheafSpectrum& spectrum,
                                const FirFrequencyResponse& response,
                                const Eigen::VectorXd& f, double tol = 1e-10);

struct BandlimitCheck {
  bool bandlimited;
  double residual_fraction;  // energy above lambda_max over total energy
};
BandlimitCheck is_bandlimited(const SheafSpectrum& spectrum,
                              const Eigen::VectorXd& f, double lambda_max,
                              double tol);

struct ResponseAnalysis {
  double max_abs;        // max |h_hat| on the grid
  double lipschitz;      // max finite-difference slope
  bool non_amplifying;   // max_abs <= 1
};
ResponseAnalysis analyze_response(const FirFrequencyResponse& response,
                                  double lambda_max, int grid_points = 2001);

// eigenvalues.csv + eigenvectors.bin (little-endian float64, column-major)
// with a JSON sidecar carrying dimensions.
void save_spectrum(const std::filesystem::path& dir,
                   const SheafSpectrum& spectrum);
SheafSpectrum load_spectrum(const std::filesystem::path& dir);

}  // namespace tbnn
