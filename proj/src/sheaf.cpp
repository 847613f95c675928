#include "tbnn/sheaf.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "tbnn/errors.hpp"
#include "tbnn/io.hpp"

namespace tbnn {

using json = nlohmann::json;

Eigen::VectorXd OrthogonalSheaf::stalk_weights() const {
  Eigen::VectorXd d(dim());
  for (int i = 0; i < n; ++i)
    d.segment(i * d_hat, d_hat).setConstant(ndeg(i));
  return d;
}

double default_epsilon(int n, int d_hat) {
  if (n < 1 || d_hat < 1) throw ConfigError("default_epsilon: n, d_hat >= 1");
  return std::pow(static_cast<double>(n), -2.0 / (d_hat + 4));
}

Eigen::SparseMatrix<double> kernel_weights(const PointCloud& cloud,
                                           double epsilon, Exec exec) {
  if (epsilon <= 0) throw ConfigError("epsilon must be > 0");
  const int n = cloud.n();
  const double support = std::sqrt(epsilon);
  Eigen::MatrixXd d2 = pairwise_sqdist(cloud.points, exec);

  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double q = d2(i, j);
      if (q > 0 && q <= support) {
        double w = std::exp(-q / support);
        trips.emplace_back(i, j, w);
        trips.emplace_back(j, i, w);
      }
    }
  }
  Eigen::SparseMatrix<double> w(n, n);
  w.setFromTriplets(trips.begin(), trips.end());
  w.makeCompressed();

  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, i); it; ++it)
      if (it.value() > 0) any = true;
    if (!any) throw IsolatedNodeError(i);
  }
  return w;
}

LocalPcaResult local_pca(const PointCloud& cloud, double epsilon_pca,
                         double gamma, Exec exec) {
  if (epsilon_pca <= 0) throw ConfigError("epsilon_pca must be > 0");
  if (gamma <= 0 || gamma > 1) throw ConfigError("gamma must be in (0, 1]");
  const int n = cloud.n();
  const int p = cloud.p();
  const double support = std::sqrt(epsilon_pca);
  Eigen::MatrixXd d2 = pairwise_sqdist(cloud.points, exec);

  std::vector<Eigen::MatrixXd> full_u(n);
  std::vector<Eigen::VectorXd> svals(n);
  std::vector<int> votes(n, 0);
  std::vector<int> neighbor_count(n, 0);
  std::vector<int> failure(n, 0);  // 1 = degenerate spectrum

  auto node_pca = [&](int i) {
    std::vector<int> nb;
    for (int j = 0; j < n; ++j)
      if (d2(i, j) > 0 && d2(i, j) <= support) nb.push_back(j);
    neighbor_count[i] = static_cast<int>(nb.size());
    if (nb.empty()) return;
    Eigen::MatrixXd cols(p, nb.size());
    for (size_t c = 0; c < nb.size(); ++c) {
      double w = std::exp(-d2(i, nb[c]) / support);
      cols.col(c) =
          (cloud.points.row(nb[c]) - cloud.points.row(i)).transpose() *
          std::sqrt(w);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
    Eigen::VectorXd s = svd.singularValues();
    if (s.maxCoeff() < 1e-14) {
      failure[i] = 1;
      return;
    }
    double total = s.squaredNorm();
    double acc = 0;
    int k = static_cast<int>(s.size());
    for (int m = 0; m < s.size(); ++m) {
      acc += s(m) * s(m);
      if (acc / total >= gamma) {
        k = m + 1;
        break;
      }
    }
    votes[i] = k;
    full_u[i] = svd.matrixU();
    svals[i] = s;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) node_pca(i);
  } else {
    for (int i = 0; i < n; ++i) node_pca(i);
  }

  for (int i = 0; i < n; ++i) {
    if (neighbor_count[i] == 0) throw InsufficientNeighborsError(i, 0, 1);
    if (failure[i]) throw DegenerateSpectrumError(i);
  }

  // majority vote, ties toward the smaller dimension
  std::map<int, int> counts;
  for (int v : votes) counts[v]++;
  int d_hat = 0, best = -1;
  for (auto& [k, c] : counts)
    if (c > best) {
      best = c;
      d_hat = k;
    }

  LocalPcaResult res;
  res.d_hat = d_hat;
  res.votes = std::move(votes);
  res.bases.resize(n);
  for (int i = 0; i < n; ++i) {
    if (full_u[i].cols() < d_hat)
      throw InsufficientNeighborsError(i, neighbor_count[i], d_hat);
    res.bases[i] = full_u[i].leftCols(d_hat);
  }
  return res;
}

std::vector<SheafEdge> transport_operators(
    const Eigen::SparseMatrix<double>& weights,
    const std::vector<Eigen::MatrixXd>& bases, Exec exec) {
  std::vector<SheafEdge> edges;
  for (int j = 0; j < weights.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(weights, j); it; ++it)
      if (it.row() < it.col())
        edges.push_back({static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value(), {}});
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });

  const int m = static_cast<int>(edges.size());
  std::vector<int> deficient(m, 0);
  auto edge_svd = [&](int e) {
    Eigen::MatrixXd aligned = bases[edges[e].i].transpose() * bases[edges[e].j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        aligned, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() < 1e-12) {
      deficient[e] = 1;
      return;
    }
    edges[e].transport = svd.matrixU() * svd.matrixV().transpose();
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int e = 0; e < m; ++e) edge_svd(e);
  } else {
    for (int e = 0; e < m; ++e) edge_svd(e);
  }
  for (int e = 0; e < m; ++e)
    if (deficient[e])
      throw RankDeficientAlignmentError(edges[e].i, edges[e].j);
  return edges;
}

// deg/ndeg are accumulated per column in storage order so that a sheaf
// rebuilt from serialized edges reproduces the Laplacian bit for bit.
static void degrees(const Eigen::SparseMatrix<double>& w, Eigen::VectorXd& deg,
                    Eigen::VectorXd& ndeg) {
  const int n = static_cast<int>(w.rows());
  deg.setZero(n);
  for (int j = 0; j < w.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, j); it; ++it)
      deg(j) += it.value();
  for (int i = 0; i < n; ++i)
    if (deg(i) <= 0) throw ZeroDegreeError(i);
  ndeg.setZero(n);
  for (int j = 0; j < w.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, j); it; ++it)
      ndeg(j) += it.value() / (deg(j) * deg(it.row()));
}

OrthogonalSheaf assemble_laplacian(const Eigen::SparseMatrix<double>& weights,
                                   std::vector<Eigen::MatrixXd> bases,
                                   std::vector<SheafEdge> edges, double epsilon,
                                   int dense_cap) {
  if (epsilon <= 0) throw ConfigError("epsilon must be > 0");
  OrthogonalSheaf sh;
  sh.n = static_cast<int>(weights.rows());
  if (bases.size() != static_cast<size_t>(sh.n))
    throw DimensionError("bases/weights node count mismatch");
  sh.p = static_cast<int>(bases[0].rows());
  sh.d_hat = static_cast<int>(bases[0].cols());
  sh.epsilon = epsilon;
  sh.bases = std::move(bases);
  sh.weights = weights;
  sh.edges = std::move(edges);

  degrees(sh.weights, sh.deg, sh.ndeg);

  const int d = sh.d_hat;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sh.edges.size() * 2 * d * d);
  for (const auto& e : sh.edges) {
    if (e.transport.rows() != d || e.transport.cols() != d)
      throw DimensionError("transport block size mismatch");
    double c = e.w / (sh.deg(e.i) * sh.deg(e.j));
    for (int r = 0; r < d; ++r)
      for (int q = 0; q < d; ++q) {
        trips.emplace_back(e.i * d + r, e.j * d + q, c * e.transport(r, q));
        trips.emplace_back(e.j * d + q, e.i * d + r, c * e.transport(r, q));
      }
  }
  sh.s_blocks.resize(sh.dim(), sh.dim());
  sh.s_blocks.setFromTriplets(trips.begin(), trips.end());
  sh.s_blocks.makeCompressed();

  if (sh.dim() <= dense_cap) sh.laplacian = sh.dense_laplacian();
  return sh;
}

Eigen::MatrixXd OrthogonalSheaf::dense_laplacian() const {
  if (laplacian.size() > 0) return laplacian;
  Eigen::MatrixXd lap = Eigen::MatrixXd(s_blocks);
  for (int i = 0; i < n; ++i)
    lap.middleRows(i * d_hat, d_hat) /= ndeg(i);
  lap.diagonal().array() -= 1.0;
  lap /= epsilon;
  return lap;
}

OrthogonalSheaf build_sheaf(const PointCloud& cloud, const SheafOptions& opts) {
  int d_hint = opts.d_hat_hint;
  double eps = opts.epsilon > 0 ? opts.epsilon
                                : default_epsilon(cloud.n(), d_hint);
  double eps_pca = opts.epsilon_pca > 0 ? opts.epsilon_pca : eps;

  LocalPcaResult pca = local_pca(cloud, eps_pca, opts.gamma, opts.exec);
  // auto-epsilon depends on d_hat; redo once if the vote disagrees with the hint
  if (opts.epsilon <= 0 && pca.d_hat != d_hint) {
    eps = default_epsilon(cloud.n(), pca.d_hat);
    eps_pca = opts.epsilon_pca > 0 ? opts.epsilon_pca : eps;
    pca = local_pca(cloud, eps_pca, opts.gamma, opts.exec);
  }

  auto w = kernel_weights(cloud, eps, opts.exec);
  auto edges = transport_operators(w, pca.bases, opts.exec);
  OrthogonalSheaf sh = assemble_laplacian(w, std::move(pca.bases),
                                          std::move(edges), eps, opts.dense_cap);
  sh.epsilon_pca = eps_pca;
  sh.gamma = opts.gamma;
  sh.seed = cloud.seed;
  return sh;
}

Eigen::VectorXd sample_field(const OrthogonalSheaf& sheaf,
                             const AmbientField& field) {
  if (field.rows() != sheaf.n || field.cols() != sheaf.p)
    throw DimensionError("sample_field: field shape mismatch");
  Eigen::VectorXd f(sheaf.dim());
  for (int i = 0; i < sheaf.n; ++i)
    f.segment(i * sheaf.d_hat, sheaf.d_hat) =
        sheaf.bases[i].transpose() * field.row(i).transpose();
  return f;
}

AmbientField lift_signal(const OrthogonalSheaf& sheaf,
                         const Eigen::VectorXd& signal) {
  if (signal.size() != sheaf.dim())
    throw DimensionError("lift_signal: length mismatch");
  AmbientField out(sheaf.n, sheaf.p);
  for (int i = 0; i < sheaf.n; ++i)
    out.row(i) =
        (sheaf.bases[i] * signal.segment(i * sheaf.d_hat, sheaf.d_hat))
            .transpose();
  return out;
}

double inner_product(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     int n_nodes) {
  if (a.size() != b.size()) throw DimensionError("inner_product: mismatch");
  return a.dot(b) / n_nodes;
}

double signal_norm(const Eigen::VectorXd& a, int n_nodes) {
  return std::sqrt(inner_product(a, a, n_nodes));
}

ScalarGraph scalar_laplacian(const Eigen::SparseMatrix<double>& weights,
                             double epsilon) {
  if (epsilon <= 0) throw ConfigError("epsilon must be > 0");
  ScalarGraph g;
  degrees(weights, g.deg, g.ndeg);
  const int n = static_cast<int>(weights.rows());
  // same op ordering as the block assembly so the trivial bundle reduces
  // to this matrix exactly
  g.laplacian.setZero(n, n);
  for (int j = 0; j < weights.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(weights, j); it; ++it)
      g.laplacian(it.row(), j) = it.value() / (g.deg(it.row()) * g.deg(j));
  for (int i = 0; i < n; ++i)
    g.laplacian.row(i) /= g.ndeg(i);
  g.laplacian.diagonal().array() -= 1.0;
  g.laplacian /= epsilon;
  return g;
}

void save_sheaf(const std::filesystem::path& dir,
                const OrthogonalSheaf& sheaf) {
  std::filesystem::create_directories(dir);
  Eigen::MatrixXd stacked(sheaf.n * sheaf.p, sheaf.d_hat);
  for (int i = 0; i < sheaf.n; ++i)
    stacked.middleRows(i * sheaf.p, sheaf.p) = sheaf.bases[i];
  std::vector<std::string> bcols;
  for (int c = 1; c <= sheaf.d_hat; ++c) bcols.push_back("b" + std::to_string(c));
  write_matrix_csv(dir / "bases.csv", stacked, bcols);

  std::vector<std::string> header = {"i", "j", "w"};
  for (int r = 0; r < sheaf.d_hat; ++r)
    for (int c = 0; c < sheaf.d_hat; ++c)
      header.push_back("t" + std::to_string(r + 1) + std::to_string(c + 1));
  std::vector<std::vector<std::string>> rows;
  rows.reserve(sheaf.edges.size());
  for (const auto& e : sheaf.edges) {
    std::vector<std::string> row = {std::to_string(e.i), std::to_string(e.j),
                                    format_double(e.w)};
    for (int r = 0; r < sheaf.d_hat; ++r)
      for (int c = 0; c < sheaf.d_hat; ++c)
        row.push_back(format_double(e.transport(r, c)));
    rows.push_back(std::move(row));
  }
  write_csv(dir / "edges.csv", header, rows);

  json meta = {{"n", sheaf.n},
               {"p", sheaf.p},
               {"d_hat", sheaf.d_hat},
               {"epsilon", sheaf.epsilon},
               {"epsilon_pca", sheaf.epsilon_pca},
               {"gamma", sheaf.gamma},
               {"seed", sheaf.seed}};
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << "\n";
}

OrthogonalSheaf load_sheaf(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw ConfigError("cannot open " + (dir / "meta.json").string());
  json meta = json::parse(in);
  const int n = meta.at("n"), p = meta.at("p"), d = meta.at("d_hat");

  Eigen::MatrixXd stacked = read_matrix_csv(dir / "bases.csv");
  if (stacked.rows() != n * p || stacked.cols() != d)
    throw ConfigError("bases.csv shape mismatch");
  std::vector<Eigen::MatrixXd> bases(n);
  for (int i = 0; i < n; ++i) bases[i] = stacked.middleRows(i * p, p);

  CsvTable et = read_csv(dir / "edges.csv");
  std::vector<SheafEdge> edges;
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& row : et.rows) {
    SheafEdge e;
    e.i = static_cast<int>(parse_int(row.at(0)));
    e.j = static_cast<int>(parse_int(row.at(1)));
    e.w = parse_double(row.at(2));
    e.transport.resize(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        e.transport(r, c) = parse_double(row.at(3 + r * d + c));
    trips.emplace_back(e.i, e.j, e.w);
    trips.emplace_back(e.j, e.i, e.w);
    edges.push_back(std::move(e));
  }
  Eigen::SparseMatrix<double> w(n, n);
  w.setFromTriplets(trips.begin(), trips.end());
  w.makeCompressed();

  OrthogonalSheaf sh = assemble_laplacian(w, std::move(bases), std::move(edges),
                                          meta.at("epsilon"));
  sh.epsilon_pca = meta.at("epsilon_pca");
  sh.gamma = meta.at("gamma");
  sh.seed = meta.at("seed");
  return sh;
}

}  // namespace tbnn
