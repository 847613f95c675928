#include "tbnn/filter.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <unsupported/Eigen/MatrixFunctions>

#include <nlohmann/json.hpp>

#include "tbnn/errors.hpp"

namespace tbnn {

using json = nlohmann::json;

Eigen::MatrixXd ShiftOperator::apply(const Eigen::MatrixXd& x,
                                     Exec exec) const {
  return dense_apply(p, x, exec);
}

Eigen::MatrixXd ShiftOperator::apply_transpose(const Eigen::MatrixXd& x,
                                               Exec exec) const {
  return dense_apply(p_transpose, x, exec);
}

ShiftOperator shift_operator_dense(const Eigen::MatrixXd& laplacian,
                                   const Eigen::VectorXd& stalk_weights,
                                   int n_nodes, int d_hat, ExpMethod method,
                                   int dense_cap) {
  if (laplacian.rows() > dense_cap)
    throw DimensionError("shift operator: dimension exceeds dense cap");
  ShiftOperator op;
  op.provenance = method;
  op.n_nodes = n_nodes;
  op.d_hat = d_hat;
  if (method == ExpMethod::scaling_squaring) {
    Eigen::MatrixXd e = laplacian.exp();
    op.p = e;
    op.p_transpose = e.transpose();
    return op;
  }
  Eigen::VectorXd dsqrt = stalk_weights.cwiseSqrt();
  Eigen::MatrixXd sym = dsqrt.asDiagonal() * laplacian *
                        dsqrt.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailureError("shift operator eigensolver failed");
  Eigen::MatrixXd e = dsqrt.cwiseInverse().asDiagonal() *
                      (solver.eigenvectors() *
                       solver.eigenvalues().array().exp().matrix().asDiagonal() *
                       solver.eigenvectors().transpose()) *
                      dsqrt.asDiagonal();
  op.p = e;
  op.p_transpose = e.transpose();
  return op;
}

ShiftOperator shift_operator(const OrthogonalSheaf& sheaf, ExpMethod method,
                             int dense_cap) {
  return shift_operator_dense(sheaf.dense_laplacian(), sheaf.stalk_weights(),
                              sheaf.n, sheaf.d_hat, method, dense_cap);
}

Eigen::MatrixXd apply_fir(const ShiftOperator& shift, const FirFilter& filter,
                          const Eigen::MatrixXd& x, Exec exec) {
  if (filter.taps.size() < 1) throw ConfigError("FIR filter needs K >= 1");
  if (x.rows() != shift.dim()) throw DimensionError("apply_fir: size mismatch");
  Eigen::MatrixXd acc = filter.taps(0) * x;
  Eigen::MatrixXd z = x;
  for (Eigen::Index k = 1; k < filter.taps.size(); ++k) {
    z = shift.apply(z, exec);
    acc.noalias() += filter.taps(k) * z;
  }
  return acc;
}

void save_filter_json(const std::filesystem::path& path,
                      const FirFilter& filter) {
  json j;
  j["taps"] = std::vector<double>(filter.taps.data(),
                                  filter.taps.data() + filter.taps.size());
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

FirFilter load_filter_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json j = json::parse(in);
  auto taps = j.at("taps").get<std::vector<double>>();
  FirFilter f;
  f.taps = Eigen::Map<Eigen::VectorXd>(taps.data(), taps.size());
  return f;
}

}  // namespace tbnn
