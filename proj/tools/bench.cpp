// Timing comparison of the serial reference kernels against their OpenMP
// versions on representative workloads.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "tbnn/filter.hpp"
#include "tbnn/rng.hpp"
#include "tbnn/sheaf.hpp"

using namespace tbnn;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
             .count() /
         reps;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %9.4f ms   parallel %9.4f ms   speedup %5.2fx\n",
              name, serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 800;
  int reps = argc > 2 ? std::atoi(argv[2]) : 5;
  std::printf("n = %d points, %d reps, %d threads\n", n, reps,
              omp_get_max_threads());

  PointCloud cloud = sample_sphere(n, 7);
  double eps = default_epsilon(n, 2);

  report("pairwise_sqdist",
         time_of([&] { pairwise_sqdist(cloud.points, Exec::serial); }, reps),
         time_of([&] { pairwise_sqdist(cloud.points, Exec::parallel); }, reps));

  report("local_pca",
         time_of([&] { local_pca(cloud, eps, 0.9, Exec::serial); }, reps),
         time_of([&] { local_pca(cloud, eps, 0.9, Exec::parallel); }, reps));

  auto w = kernel_weights(cloud, eps);
  auto pca = local_pca(cloud, eps, 0.9);
  report("transport_operators",
         time_of([&] { transport_operators(w, pca.bases, Exec::serial); }, reps),
         time_of([&] { transport_operators(w, pca.bases, Exec::parallel); },
                 reps));

  OrthogonalSheaf sheaf = build_sheaf(cloud);
  ShiftOperator shift = shift_operator(sheaf);
  Rng rng(3);
  Eigen::MatrixXd x(shift.dim(), 4);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();

  report("shift apply (4 features)",
         time_of([&] { shift.apply(x, Exec::serial); }, reps * 4),
         time_of([&] { shift.apply(x, Exec::parallel); }, reps * 4));

  FirFilter fir;
  fir.taps.resize(5);
  for (int k = 0; k < 5; ++k) fir.taps(k) = 0.2;
  report("apply_fir (K=5)",
         time_of([&] { apply_fir(shift, fir, x, Exec::serial); }, reps),
         time_of([&] { apply_fir(shift, fir, x, Exec::parallel); }, reps));

  // sanity: both modes agree bitwise
  Eigen::MatrixXd a = apply_fir(shift, fir, x, Exec::serial);
  Eigen::MatrixXd b = apply_fir(shift, fir, x, Exec::parallel);
  std::printf("serial/parallel max abs gap: %g\n",
              (a - b).cwiseAbs().maxCoeff());
  return 0;
}
