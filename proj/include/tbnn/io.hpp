#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

namespace tbnn {

// Shortest decimal that round-trips a double (%.17g).
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Matrix <-> CSV with named columns; values written with format_double so the
// round trip is bit-exact.
void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& m,
                      const std::vector<std::string>& colnames);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// Raw little-endian float64 buffer, column-major.
void write_matrix_binary(const std::filesystem::path& path,
                         const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path, int rows,
                                   int cols);

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

}  // namespace tbnn
