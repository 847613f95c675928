#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>

#include "tbnn/errors.hpp"
#include "tbnn/sheaf.hpp"

using namespace tbnn;

namespace {

Eigen::SparseMatrix<double> weights_from_dense(const Eigen::MatrixXd& w) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < w.rows(); ++i)
    for (int j = i + 1; j < w.cols(); ++j)
      if (w(i, j) != 0) {
        trips.emplace_back(i, j, w(i, j));
        trips.emplace_back(j, i, w(i, j));
      }
  Eigen::SparseMatrix<double> s(w.rows(), w.cols());
  s.setFromTriplets(trips.begin(), trips.end());
  s.makeCompressed();
  return s;
}

}  // namespace

TEST_CASE("default_epsilon matches the n^(-2/(d+4)) schedule") {
  CHECK(default_epsilon(200, 2) == doctest::Approx(0.17099759466766973).epsilon(1e-14));
  CHECK(default_epsilon(800, 2) == doctest::Approx(0.1077217345015942).epsilon(1e-14));
  CHECK(default_epsilon(1, 5) == 1.0);
}

TEST_CASE("kernel weights: value, support, diagonal") {
  // two points at squared distance 0.25 with epsilon 0.25 (support 0.5)
  Eigen::MatrixXd pts(3, 3);
  pts << 0, 0, 0,
         0.5, 0, 0,
         0.45, 0.1, 0;
  PointCloud cloud = make_cloud(pts, ManifoldTag::custom);
  auto w = kernel_weights(cloud, 0.25);
  CHECK(w.coeff(0, 1) == doctest::Approx(0.6065306597126334).epsilon(1e-15));
  CHECK(w.coeff(1, 0) == w.coeff(0, 1));
  CHECK(w.coeff(0, 0) == 0.0);

  // out-of-support pair contributes nothing
  Eigen::MatrixXd line(3, 3);
  line << 0, 0, 0,
          0.5, 0, 0,
          1.0, 0, 0;
  auto wf = kernel_weights(make_cloud(line, ManifoldTag::custom), 0.25);
  CHECK(wf.coeff(0, 2) == 0.0);  // squared distance 1 > support 0.5
  CHECK(wf.coeff(1, 2) > 0.0);

  // an isolated node is an error, not a silent drop
  Eigen::MatrixXd iso(3, 3);
  iso << 0, 0, 0,
         0.1, 0, 0,
         50, 0, 0;
  CHECK_THROWS_AS(kernel_weights(make_cloud(iso, ManifoldTag::custom), 0.25),
                  IsolatedNodeError);
}

TEST_CASE("local PCA recovers the plane of a flat cloud") {
  const int n = 80;
  Eigen::MatrixXd pts(n, 3);
  // deterministic scattered grid in the z=0 plane
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = 0.13 * (i % 10) + 0.007 * ((i * 7) % 13);
    pts(i, 1) = 0.11 * (i / 10) + 0.005 * ((i * 5) % 11);
    pts(i, 2) = 0.0;
  }
  PointCloud cloud = make_cloud(pts, ManifoldTag::custom);
  LocalPcaResult pca = local_pca(cloud, 0.25, 0.9);
  CHECK(pca.d_hat == 2);
  for (const auto& basis : pca.bases) {
    CHECK((basis.transpose() * basis - Eigen::Matrix2d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    // span must be the xy-plane: z-row of the basis vanishes
    CHECK(basis.row(2).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("local PCA on the sphere votes d_hat = 2") {
  PointCloud cloud = sample_sphere(200, 7);
  double eps = default_epsilon(200, 2);
  LocalPcaResult pca = local_pca(cloud, eps, 0.9);
  CHECK(pca.d_hat == 2);
  for (const auto& basis : pca.bases)
    CHECK((basis.transpose() * basis - Eigen::Matrix2d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-10);
}

TEST_CASE("transport operators") {
  const double c = 0.8660254037844387, s = 0.49999999999999994;  // 30 degrees
  std::vector<Eigen::MatrixXd> bases(2);
  bases[0] = Eigen::MatrixXd::Identity(3, 2);
  bases[1].resize(3, 2);
  bases[1] << c, -s,
              s,  c,
              0,  0;
  Eigen::MatrixXd wd = Eigen::MatrixXd::Zero(2, 2);
  wd(0, 1) = 0.5;
  auto edges = transport_operators(weights_from_dense(wd), bases);
  REQUIRE(edges.size() == 1);
  Eigen::Matrix2d expected;
  expected << c, -s,
              s,  c;
  CHECK((edges[0].transport - expected).cwiseAbs().maxCoeff() < 1e-10);

  // identical bases produce the identity transport
  bases[1] = bases[0];
  auto same = transport_operators(weights_from_dense(wd), bases);
  CHECK((same[0].transport - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <
        1e-12);

  // nearly orthogonal tangent spaces cannot be aligned
  bases[1].setZero();
  bases[1](2, 0) = 1;  // spans {e3, e2}; the overlap with {e1, e2} is singular
  bases[1](1, 1) = 1;
  CHECK_THROWS_AS(transport_operators(weights_from_dense(wd), bases),
                  RankDeficientAlignmentError);
}

TEST_CASE("path graph degrees and Laplacian kernel") {
  std::vector<Eigen::MatrixXd> bases(3, Eigen::MatrixXd::Identity(3, 1));
  Eigen::MatrixXd wd = Eigen::MatrixXd::Zero(3, 3);
  wd(0, 1) = wd(1, 2) = 1.0;
  auto w = weights_from_dense(wd);
  auto edges = transport_operators(w, bases);
  OrthogonalSheaf sh = assemble_laplacian(w, bases, edges, 1.0);

  CHECK(sh.deg(0) == 1.0);
  CHECK(sh.deg(1) == 2.0);
  CHECK(sh.deg(2) == 1.0);
  CHECK(sh.ndeg(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sh.ndeg(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sh.ndeg(2) == doctest::Approx(0.5).epsilon(1e-15));

  // D^-1 S is row-stochastic, so the constant vector is in the kernel
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK((sh.laplacian * ones).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sheaf structure invariants at n=200") {
  PointCloud cloud = sample_sphere(200, 3);
  OrthogonalSheaf sh = build_sheaf(cloud);
  CHECK(sh.d_hat == 2);

  for (const auto& basis : sh.bases)
    CHECK((basis.transpose() * basis -
           Eigen::MatrixXd::Identity(sh.d_hat, sh.d_hat))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  for (const auto& e : sh.edges) {
    CHECK((e.transport * e.transport.transpose() -
           Eigen::MatrixXd::Identity(sh.d_hat, sh.d_hat))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
  // S block symmetry via the sparse matrix directly
  Eigen::MatrixXd s = Eigen::MatrixXd(sh.s_blocks);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((sh.ndeg.array() > 0).all());

  // similarity symmetry of the Laplacian
  Eigen::VectorXd dsqrt = sh.stalk_weights().cwiseSqrt();
  Eigen::MatrixXd sym = dsqrt.asDiagonal() * sh.laplacian *
                        dsqrt.cwiseInverse().asDiagonal();
  CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() < 1e-8);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (sym + sym.transpose()));
  CHECK(es.eigenvalues().maxCoeff() <= 1e-8);
  CHECK(es.eigenvalues().minCoeff() >= -2.0 / sh.epsilon - 1e-6);
}

TEST_CASE("sample, lift, inner product") {
  PointCloud cloud = sample_sphere(100, 5);
  OrthogonalSheaf sh = build_sheaf(cloud);
  AmbientField field = rotational_field(cloud);
  Eigen::VectorXd f = sample_field(sh, field);

  // sample . lift = identity on signals
  AmbientField lifted = lift_signal(sh, f);
  Eigen::VectorXd back = sample_field(sh, lifted);
  CHECK((back - f).cwiseAbs().maxCoeff() < 1e-12);

  // Parseval on stalks: per-block norms equal projected-field norms
  for (int i = 0; i < sh.n; ++i) {
    Eigen::VectorXd proj =
        sh.bases[i] * (sh.bases[i].transpose() * field.row(i).transpose());
    CHECK(f.segment(i * sh.d_hat, sh.d_hat).squaredNorm() ==
          doctest::Approx(proj.squaredNorm()).epsilon(1e-12));
  }

  // sampling is non-expansive row-wise
  for (int i = 0; i < sh.n; ++i)
    CHECK(f.segment(i * sh.d_hat, sh.d_hat).norm() <=
          field.row(i).norm() + 1e-12);

  // plain empirical inner product agrees with the ambient one after lifting
  Eigen::VectorXd g = sample_field(sh, add_awgn(field, 0.1, 9));
  double stalk = inner_product(f, g, sh.n);
  double ambient = 0;
  AmbientField lf = lift_signal(sh, f), lg = lift_signal(sh, g);
  for (int i = 0; i < sh.n; ++i) ambient += lf.row(i).dot(lg.row(i));
  ambient /= sh.n;
  CHECK(stalk == doctest::Approx(ambient).epsilon(1e-12));

  // hand value: n=2, d=1, a=(1,2), b=(3,4) -> 5.5
  Eigen::VectorXd a(2), b(2);
  a << 1, 2;
  b << 3, 4;
  CHECK(inner_product(a, b, 2) == 5.5);

  // zero field samples to zero
  Eigen::VectorXd zero = sample_field(sh, AmbientField::Zero(sh.n, 3));
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lift of sampled analytic field approximates it at n=800") {
  PointCloud cloud = sample_sphere(800, 12);
  OrthogonalSheaf sh = build_sheaf(cloud);
  AmbientField field = rotational_field(cloud);
  AmbientField roundtrip = lift_signal(sh, sample_field(sh, field));
  double rel = (roundtrip - field).norm() / field.norm();
  CHECK(rel < 0.05);
}

TEST_CASE("trivial bundle reduces to the scalar graph construction") {
  PointCloud cloud = sample_sphere(60, 2);
  double eps = 0.5;
  auto w = kernel_weights(cloud, eps);
  std::vector<Eigen::MatrixXd> bases(60, Eigen::MatrixXd::Identity(3, 1));
  auto edges = transport_operators(w, bases);
  for (const auto& e : edges)
    CHECK(e.transport(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  OrthogonalSheaf sh = assemble_laplacian(w, bases, edges, eps);
  ScalarGraph scalar = scalar_laplacian(w, eps);
  CHECK((sh.laplacian - scalar.laplacian).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sheaf serialization reproduces the Laplacian bit for bit") {
  PointCloud cloud = sample_sphere(100, 13);
  OrthogonalSheaf sh = build_sheaf(cloud);
  auto dir = std::filesystem::temp_directory_path() / "tbnn_sheaf_test";
  save_sheaf(dir, sh);
  OrthogonalSheaf back = load_sheaf(dir);
  CHECK(back.n == sh.n);
  CHECK(back.d_hat == sh.d_hat);
  CHECK(back.epsilon == sh.epsilon);
  CHECK((back.laplacian - sh.laplacian).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}
