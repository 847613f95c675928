#pragma once

#include <stdexcept>
#include <string>

namespace tbnn {

// Base for failures of the numerical pipeline (CLI maps these to exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: config files, CLI arguments, malformed CSV (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IsolatedNodeError : NumericError {
  int node;
  explicit IsolatedNodeError(int i)
      : NumericError("node " + std::to_string(i) +
                     " has no neighbors; increase epsilon"),
        node(i) {}
};

struct InsufficientNeighborsError : NumericError {
  int node;
  InsufficientNeighborsError(int i, int have, int need)
      : NumericError("node " + std::to_string(i) + " has " +
                     std::to_string(have) + " neighbors, local PCA needs " +
                     std::to_string(need) + "; increase epsilon_pca"),
        node(i) {}
};

struct DegenerateSpectrumError : NumericError {
  int node;
  explicit DegenerateSpectrumError(int i)
      : NumericError("local PCA at node " + std::to_string(i) +
                     " has all singular values below 1e-14"),
        node(i) {}
};

struct RankDeficientAlignmentError : NumericError {
  int i, j;
  RankDeficientAlignmentError(int a, int b)
      : NumericError("tangent bases at nodes " + std::to_string(a) + " and " +
                     std::to_string(b) +
                     " are nearly orthogonal; decrease epsilon"),
        i(a), j(b) {}
};

struct ZeroDegreeError : NumericError {
  int node;
  explicit ZeroDegreeError(int i)
      : NumericError("node " + std::to_string(i) + " has zero degree"), node(i) {}
};

struct ConvergenceFailureError : NumericError {
  using NumericError::NumericError;
};

struct PartialSpectrumError : NumericError {
  using NumericError::NumericError;
};

struct TrainingDivergedError : NumericError {
  using NumericError::NumericError;
};

struct DimensionError : NumericError {
  using NumericError::NumericError;
};

}  // namespace tbnn
