#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>

#include "tbnn/errors.hpp"
#include "tbnn/rng.hpp"
#include "tbnn/spectral.hpp"

using namespace tbnn;

namespace {

OrthogonalSheaf path3_sheaf() {
  std::vector<Eigen::MatrixXd> bases(3, Eigen::MatrixXd::Identity(3, 1));
  std::vector<Eigen::Triplet<double>> trips = {
      {0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}};
  Eigen::SparseMatrix<double> w(3, 3);
  w.setFromTriplets(trips.begin(), trips.end());
  w.makeCompressed();
  auto edges = transport_operators(w, bases);
  return assemble_laplacian(w, bases, edges, 1.0);
}

Eigen::VectorXd random_signal(int size, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("path graph spectrum: {0, 1, 2} with constant kernel vector") {
  OrthogonalSheaf sh = path3_sheaf();
  SheafSpectrum sp = eigendecompose(sh);
  CHECK(sp.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sp.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sp.eigenvalues(2) == doctest::Approx(2.0).epsilon(1e-12));
  // kernel vector is constant up to normalization
  Eigen::VectorXd phi0 = sp.eigenvectors.col(0);
  CHECK((phi0 / phi0(0) - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("eigenpairs: orthonormality, residual, determinism") {
  PointCloud cloud = sample_sphere(150, 21);
  OrthogonalSheaf sh = build_sheaf(cloud);
  SheafSpectrum sp = eigendecompose(sh);

  CHECK(sp.eigenvalues.minCoeff() >= -1e-8);
  for (int i = 1; i < sp.count(); ++i)
    CHECK(sp.eigenvalues(i) >= sp.eigenvalues(i - 1));

  // orthonormal under the weighted inner product
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      double g = sp.inner(sp.eigenvectors.col(i), sp.eigenvectors.col(j));
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-8);
    }

  double scale = sh.laplacian.cwiseAbs().maxCoeff();
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd resid = sh.laplacian * sp.eigenvectors.col(i) +
                            sp.eigenvalues(i) * sp.eigenvectors.col(i);
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-7 * scale);
  }

  SheafSpectrum again = eigendecompose(sh);
  CHECK((again.eigenvectors - sp.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
  // sign convention: first nonzero coordinate positive
  for (int i = 0; i < sp.count(); ++i) {
    for (int r = 0; r < sp.eigenvectors.rows(); ++r) {
      if (sp.eigenvectors(r, i) != 0.0) {
        CHECK(sp.eigenvectors(r, i) > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("frequency coefficients: unit vectors, linearity, Parseval") {
  PointCloud cloud = sample_sphere(100, 31);
  OrthogonalSheaf sh = build_sheaf(cloud);
  SheafSpectrum sp = eigendecompose(sh);

  Eigen::VectorXd c3 = sp.coefficients(sp.eigenvectors.col(3));
  for (int i = 0; i < sp.count(); ++i)
    CHECK(std::abs(c3(i) - (i == 3 ? 1.0 : 0.0)) < 1e-8);

  Eigen::VectorXd f = random_signal(sp.count(), 1);
  Eigen::VectorXd g = random_signal(sp.count(), 2);
  Eigen::VectorXd lin =
      sp.coefficients(2.5 * f - 0.5 * g) -
      (2.5 * sp.coefficients(f) - 0.5 * sp.coefficients(g));
  CHECK(lin.cwiseAbs().maxCoeff() < 1e-12);

  CHECK(sp.coefficients(f).squaredNorm() ==
        doctest::Approx(sp.inner(f, f)).epsilon(1e-10));
}

TEST_CASE("spectral filter: identity, annihilator, partial spectrum") {
  PointCloud cloud = sample_sphere(100, 41);
  OrthogonalSheaf sh = build_sheaf(cloud);
  SheafSpectrum sp = eigendecompose(sh);
  Eigen::VectorXd f = random_signal(sp.count(), 3);

  Eigen::VectorXd one_taps(1);
  one_taps << 1.0;
  Eigen::VectorXd id = spectral_filter(sp, {one_taps}, f);
  CHECK((id - f).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::VectorXd zero_taps(1);
  zero_taps << 0.0;
  CHECK(spectral_filter(sp, {zero_taps}, f).cwiseAbs().maxCoeff() == 0.0);

  SheafSpectrum partial = eigendecompose(sh, 10);
  CHECK_THROWS_AS(spectral_filter(partial, {one_taps}, f),
                  PartialSpectrumError);
  // a signal inside the kept band passes through
  Eigen::VectorXd banded = partial.eigenvectors.col(4);
  CHECK((spectral_filter(partial, {one_taps}, banded) - banded)
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("pointwise frequency action of FIR filtering") {
  PointCloud cloud = sample_sphere(120, 43);
  OrthogonalSheaf sh = build_sheaf(cloud);
  SheafSpectrum sp = eigendecompose(sh);
  Rng rng(7);
  Eigen::VectorXd taps(4);
  for (int i = 0; i < 4; ++i) taps(i) = rng.uniform(-1, 1);
  FirFrequencyResponse resp{taps};
  Eigen::VectorXd f = random_signal(sp.count(), 5);
  Eigen::VectorXd g = spectral_filter(sp, resp, f);
  for (int i = 0; i < sp.count(); i += 17) {
    double lhs = sp.inner(g, sp.eigenvectors.col(i));
    double rhs = resp(sp.eigenvalues(i)) * sp.inner(f, sp.eigenvectors.col(i));
    CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("bandlimitedness checks and diffusion decay") {
  PointCloud cloud = sample_sphere(100, 47);
  OrthogonalSheaf sh = build_sheaf(cloud);
  SheafSpectrum sp = eigendecompose(sh);

  auto low =
      is_bandlimited(sp, sp.eigenvectors.col(0), sp.eigenvalues(0), 1e-12);
  CHECK(low.bandlimited);
  CHECK(low.residual_fraction < 1e-12);

  int last = sp.count() - 1;
  auto high = is_bandlimited(sp, sp.eigenvectors.col(last),
                             sp.eigenvalues(last) - 1e-6, 1e-6);
  CHECK_FALSE(high.bandlimited);
  CHECK(high.residual_fraction == doctest::Approx(1.0).epsilon(1e-8));

  // repeated diffusion steps push energy below any fixed cutoff
  Eigen::VectorXd eta = random_signal(sp.count(), 9);
  double lambda_mid = sp.eigenvalues(sp.count() / 2);
  Eigen::VectorXd smooth_taps(2);
  smooth_taps << 0.0, 1.0;  // gain e^-lambda
  double prev = is_bandlimited(sp, eta, lambda_mid, 0.0).residual_fraction;
  Eigen::VectorXd cur = eta;
  for (int step = 0; step < 3; ++step) {
    cur = spectral_filter(sp, {smooth_taps}, cur);
    double frac = is_bandlimited(sp, cur, lambda_mid, 0.0).residual_fraction;
    CHECK(frac < prev);
    prev = frac;
  }
}

TEST_CASE("frequency response analysis") {
  Eigen::VectorXd delta(2);
  delta << 1.0, 0.0;
  auto a = analyze_response({delta}, 10.0);
  CHECK(a.max_abs == doctest::Approx(1.0));
  CHECK(a.lipschitz == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a.non_amplifying);

  Eigen::VectorXd heat(2);
  heat << 0.0, 1.0;
  auto b = analyze_response({heat}, 10.0);
  CHECK(b.max_abs == doctest::Approx(1.0));  // e^0
  CHECK(b.lipschitz <= 1.0 + 1e-9);
  CHECK(b.non_amplifying);

  Eigen::VectorXd loud(2);
  loud << 2.0, 0.0;
  auto c = analyze_response({loud}, 10.0);
  CHECK(c.max_abs == doctest::Approx(2.0));
  CHECK_FALSE(c.non_amplifying);
}

TEST_CASE("spectrum serialization round trip") {
  PointCloud cloud = sample_sphere(100, 53);
  OrthogonalSheaf sh = build_sheaf(cloud);
  SheafSpectrum sp = eigendecompose(sh, 12);
  auto dir = std::filesystem::temp_directory_path() / "tbnn_spec_test";
  save_spectrum(dir, sp);
  SheafSpectrum back = load_spectrum(dir);
  CHECK(back.count() == 12);
  CHECK((back.eigenvalues - sp.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.eigenvectors - sp.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.stalk_weights - sp.stalk_weights).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}
