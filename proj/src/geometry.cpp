#include "tbnn/geometry.hpp"

#include <string>

#include "tbnn/errors.hpp"
#include "tbnn/io.hpp"
#include "tbnn/rng.hpp"

namespace tbnn {

static void check_no_duplicates(const Eigen::MatrixXd& pts) {
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j)
      if ((pts.row(i) - pts.row(j)).squaredNorm() == 0.0)
        throw ConfigError("duplicate points at rows " + std::to_string(i) +
                          " and " + std::to_string(j));
}

PointCloud sample_sphere(int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_sphere: n must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXd pts(n, 3);
  for (int i = 0; i < n; ++i) {
    // resample on (measure-zero) degenerate draws
    while (true) {
      Eigen::Vector3d g(rng.normal(), rng.normal(), rng.normal());
      double norm = g.norm();
      if (norm > 0) {
        pts.row(i) = g.transpose() / norm;
        bool dup = false;
        for (int j = 0; j < i; ++j)
          if ((pts.row(i) - pts.row(j)).squaredNorm() == 0.0) dup = true;
        if (!dup) break;
      }
    }
  }
  return PointCloud{std::move(pts), seed, ManifoldTag::sphere2};
}

PointCloud make_cloud(Eigen::MatrixXd points, ManifoldTag tag,
                      std::uint64_t seed) {
  if (points.rows() < 1 || points.cols() < 1)
    throw ConfigError("point cloud must be at least 1x1");
  check_no_duplicates(points);
  if (tag == ManifoldTag::sphere2) {
    if (points.cols() != 3)
      throw ConfigError("sphere2 cloud must have ambient dimension 3");
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      if (std::abs(points.row(i).norm() - 1.0) > 1e-12)
        throw ConfigError("sphere2 point " + std::to_string(i) +
                          " is not unit norm");
  }
  return PointCloud{std::move(points), seed, tag};
}

AmbientField rotational_field(const PointCloud& cloud) {
  if (cloud.p() != 3)
    throw DimensionError("rotational_field needs ambient dimension 3");
  AmbientField f(cloud.n(), 3);
  for (int i = 0; i < cloud.n(); ++i) {
    f(i, 0) = -cloud.points(i, 1);
    f(i, 1) = cloud.points(i, 0);
    f(i, 2) = 0.0;
  }
  return f;
}

AmbientField add_awgn(const AmbientField& field, double tau,
                      std::uint64_t seed) {
  if (tau < 0) throw ConfigError("noise stddev must be >= 0");
  AmbientField out = field;
  if (tau == 0.0) return out;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) += tau * rng.normal();
  return out;
}

static std::vector<std::string> coord_names(const char* prefix, int p) {
  std::vector<std::string> names;
  for (int j = 1; j <= p; ++j) names.push_back(prefix + std::to_string(j));
  return names;
}

void save_cloud_csv(const std::filesystem::path& path,
                    const PointCloud& cloud) {
  write_matrix_csv(path, cloud.points, coord_names("x", cloud.p()));
}

PointCloud load_cloud_csv(const std::filesystem::path& path, ManifoldTag tag) {
  return make_cloud(read_matrix_csv(path), tag);
}

void save_field_csv(const std::filesystem::path& path, const PointCloud& cloud,
                    const AmbientField& field) {
  if (field.rows() != cloud.points.rows() ||
      field.cols() != cloud.points.cols())
    throw DimensionError("field/cloud shape mismatch");
  Eigen::MatrixXd joined(field.rows(), 2 * field.cols());
  joined << cloud.points, field;
  auto names = coord_names("x", cloud.p());
  auto vnames = coord_names("v", cloud.p());
  names.insert(names.end(), vnames.begin(), vnames.end());
  write_matrix_csv(path, joined, names);
}

AmbientField load_field_csv(const std::filesystem::path& path) {
  Eigen::MatrixXd joined = read_matrix_csv(path);
  if (joined.cols() % 2 != 0)
    throw ConfigError("field csv must have columns x1..xp,v1..vp");
  return joined.rightCols(joined.cols() / 2);
}

}  // namespace tbnn
