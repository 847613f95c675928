#include "tbnn/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tbnn/errors.hpp"
#include "tbnn/io.hpp"

namespace tbnn {

using json = nlohmann::json;

double SheafSpectrum::inner(const Eigen::VectorXd& a,
                            const Eigen::VectorXd& b) const {
  if (a.size() != b.size() || a.size() != stalk_weights.size())
    throw DimensionError("spectrum inner: length mismatch");
  return (a.array() * stalk_weights.array() * b.array()).sum() / n_nodes;
}

double SheafSpectrum::norm(const Eigen::VectorXd& a) const {
  return std::sqrt(inner(a, a));
}

Eigen::VectorXd SheafSpectrum::coefficients(const Eigen::VectorXd& f) const {
  if (f.size() != eigenvectors.rows())
    throw DimensionError("coefficients: length mismatch");
  return eigenvectors.transpose() * (stalk_weights.asDiagonal() * f) / n_nodes;
}

SheafSpectrum eigendecompose_dense(const Eigen::MatrixXd& laplacian,
                                   const Eigen::VectorXd& stalk_weights,
                                   int n_nodes, int d_hat, int count) {
  const Eigen::Index dim = laplacian.rows();
  Eigen::VectorXd dsqrt = stalk_weights.cwiseSqrt();
  Eigen::MatrixXd sym = dsqrt.asDiagonal() * laplacian *
                        dsqrt.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailureError("symmetric eigensolver did not converge");

  // solver order is ascending in the (nonpositive) symmetrized spectrum;
  // reverse to get the stored lambda = -nu ascending from zero
  SheafSpectrum sp;
  sp.n_nodes = n_nodes;
  sp.d_hat = d_hat;
  sp.stalk_weights = stalk_weights;
  const int keep = count < 0 ? static_cast<int>(dim)
                             : std::min<int>(count, static_cast<int>(dim));
  sp.eigenvalues.resize(keep);
  sp.eigenvectors.resize(dim, keep);
  const double root_n = std::sqrt(static_cast<double>(n_nodes));
  for (int k = 0; k < keep; ++k) {
    Eigen::Index src = dim - 1 - k;
    sp.eigenvalues(k) = -solver.eigenvalues()(src);
    Eigen::VectorXd phi =
        root_n * (dsqrt.cwiseInverse().asDiagonal() * solver.eigenvectors().col(src));
    for (Eigen::Index r = 0; r < phi.size(); ++r) {
      if (phi(r) != 0.0) {
        if (phi(r) < 0) phi = -phi;
        break;
      }
    }
    sp.eigenvectors.col(k) = phi;
  }
  return sp;
}

SheafSpectrum eigendecompose(const OrthogonalSheaf& sheaf, int count) {
  return eigendecompose_dense(sheaf.dense_laplacian(), sheaf.stalk_weights(),
                              sheaf.n, sheaf.d_hat, count);
}

double FirFrequencyResponse::operator()(double lambda) const {
  double acc = 0;
  for (Eigen::Index k = 0; k < taps.size(); ++k)
    acc += taps(k) * std::exp(-static_cast<double>(k) * lambda);
  return acc;
}

Eigen::VectorXd spectral_filter(const SheafSpectrum& spectrum,
                                const FirFrequencyResponse& response,
                                const Eigen::VectorXd& f, double tol) {
  Eigen::VectorXd coeffs = spectrum.coefficients(f);
  if (!spectrum.full()) {
    double total = spectrum.inner(f, f);
    double captured = coeffs.squaredNorm();
    if (total > 0 && (total - captured) > tol * total)
      throw PartialSpectrumError(
          "signal is not bandlimited to the partial spectrum");
  }
  Eigen::VectorXd gains(spectrum.count());
  for (int i = 0; i < spectrum.count(); ++i)
    gains(i) = response(spectrum.eigenvalues(i));
  return spectrum.eigenvectors * (gains.array() * coeffs.array()).matrix();
}

BandlimitCheck is_bandlimited(const SheafSpectrum& spectrum,
                              const Eigen::VectorXd& f, double lambda_max,
                              double tol) {
  Eigen::VectorXd coeffs = spectrum.coefficients(f);
  double total = spectrum.inner(f, f);
  if (total == 0) return {true, 0.0};
  double above = 0;
  for (int i = 0; i < spectrum.count(); ++i)
    if (spectrum.eigenvalues(i) > lambda_max) above += coeffs(i) * coeffs(i);
  double frac = above / total;
  return {frac <= tol, frac};
}

ResponseAnalysis analyze_response(const FirFrequencyResponse& response,
                                  double lambda_max, int grid_points) {
  if (grid_points < 2) throw ConfigError("analyze_response: need >= 2 points");
  double max_abs = 0, lip = 0;
  double prev = 0;
  for (int g = 0; g < grid_points; ++g) {
    double lambda = lambda_max * g / (grid_points - 1);
    double v = response(lambda);
    max_abs = std::max(max_abs, std::abs(v));
    if (g > 0) {
      double slope = std::abs(v - prev) / (lambda_max / (grid_points - 1));
      lip = std::max(lip, slope);
    }
    prev = v;
  }
  return {max_abs, lip, max_abs <= 1.0};
}

void save_spectrum(const std::filesystem::path& dir,
                   const SheafSpectrum& spectrum) {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < spectrum.count(); ++i)
    rows.push_back({std::to_string(i), format_double(spectrum.eigenvalues(i))});
  write_csv(dir / "eigenvalues.csv", {"index", "lambda"}, rows);
  write_matrix_binary(dir / "eigenvectors.bin", spectrum.eigenvectors);
  json meta = {{"rows", spectrum.eigenvectors.rows()},
               {"cols", spectrum.eigenvectors.cols()},
               {"dtype", "float64"},
               {"order", "column-major"},
               {"n_nodes", spectrum.n_nodes},
               {"d_hat", spectrum.d_hat}};
  meta["stalk_weights"] = std::vector<double>(
      spectrum.stalk_weights.data(),
      spectrum.stalk_weights.data() + spectrum.stalk_weights.size());
  std::ofstream out(dir / "eigenvectors.json");
  out << meta.dump(2) << "\n";
}

SheafSpectrum load_spectrum(const std::filesystem::path& dir) {
  std::ifstream in(dir / "eigenvectors.json");
  if (!in) throw ConfigError("cannot open spectrum sidecar in " + dir.string());
  json meta = json::parse(in);
  SheafSpectrum sp;
  sp.n_nodes = meta.at("n_nodes");
  sp.d_hat = meta.at("d_hat");
  sp.eigenvectors =
      read_matrix_binary(dir / "eigenvectors.bin", meta.at("rows"), meta.at("cols"));
  CsvTable ev = read_csv(dir / "eigenvalues.csv");
  sp.eigenvalues.resize(ev.rows.size());
  for (size_t i = 0; i < ev.rows.size(); ++i)
    sp.eigenvalues(i) = parse_double(ev.rows[i].at(1));
  auto sw = meta.at("stalk_weights").get<std::vector<double>>();
  sp.stalk_weights = Eigen::Map<Eigen::VectorXd>(sw.data(), sw.size());
  return sp;
}

}  // namespace tbnn
