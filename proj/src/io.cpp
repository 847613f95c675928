#include "tbnn/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tbnn/errors.hpp"

namespace tbnn {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int CsvTable::col(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

static std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty csv: " + path.string());
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_line(line));
  }
  return t;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& r : rows)
    for (size_t i = 0; i < r.size(); ++i)
      out << r[i] << (i + 1 < r.size() ? "," : "\n");
}

void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& m,
                      const std::vector<std::string>& colnames) {
  std::vector<std::vector<std::string>> rows(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows[i].reserve(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      rows[i].push_back(format_double(m(i, j)));
  }
  write_csv(path, colnames, rows);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  Eigen::MatrixXd m(t.rows.size(), t.header.size());
  for (size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != t.header.size())
      throw ConfigError("ragged csv row in " + path.string());
    for (size_t j = 0; j < t.rows[i].size(); ++j)
      m(i, j) = parse_double(t.rows[i][j]);
  }
  return m;
}

void write_matrix_binary(const std::filesystem::path& path,
                         const Eigen::MatrixXd& m) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path, int rows,
                                   int cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  Eigen::MatrixXd m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw ConfigError("short read from " + path.string());
  return m;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("not an integer: '" + s + "'");
  return v;
}

}  // namespace tbnn
