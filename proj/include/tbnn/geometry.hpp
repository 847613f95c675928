#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>

namespace tbnn {

enum class ManifoldTag { sphere2, custom };

// n points in ambient R^p, one per row. Construction rejects duplicate
// points: the kernel support excludes zero distance and local PCA degenerates
// on repeated samples.
struct PointCloud {
  Eigen::MatrixXd points;  // n x p
  std::uint64_t seed = 0;
  ManifoldTag tag = ManifoldTag::custom;

  int n() const { return static_cast<int>(points.rows()); }
  int p() const { return static_cast<int>(points.cols()); }
};

// Embedded vector field: row i is the ambient vector attached to point i.
using AmbientField = Eigen::MatrixXd;

// i.i.d. uniform points on the unit 2-sphere (normalized gaussian triples);
// deterministic given seed.
PointCloud sample_sphere(int n, std::uint64_t seed);

// Validates invariants (no duplicates; unit rows when tag is sphere2).
PointCloud make_cloud(Eigen::MatrixXd points, ManifoldTag tag,
                      std::uint64_t seed = 0);

// iF(x,y,z) = (-y, x, 0); rows are tangent to the sphere at their base point.
AmbientField rotational_field(const PointCloud& cloud);

// Entrywise additive N(0, tau^2) noise in ambient coordinates.
AmbientField add_awgn(const AmbientField& field, double tau,
                      std::uint64_t seed);

void save_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud load_cloud_csv(const std::filesystem::path& path, ManifoldTag tag);

// Field rows are stored next to their base points: columns x1..xp,v1..vp.
void save_field_csv(const std::filesystem::path& path, const PointCloud& cloud,
                    const AmbientField& field);
AmbientField load_field_csv(const std::filesystem::path& path);

}  // namespace tbnn
