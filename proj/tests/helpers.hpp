#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "seqloc/difference_matrix.hpp"
#include "seqloc/diagnostics.hpp"
#include "seqloc/rng.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("seqloc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Counts warnings while alive and keeps them off stderr.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = seqloc::set_warning_handler([this](std::string_view msg) {
      ++count;
      last = std::string(msg);
    });
  }
  ~WarningCapture() { seqloc::set_warning_handler(previous_); }

  int count = 0;
  std::string last;

 private:
  seqloc::WarningHandler previous_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

inline std::vector<double> normals(std::size_t n, std::uint64_t seed, double mu = 0.0, double sigma = 1.0) {
  seqloc::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = mu + sigma * rng.normal();
  return v;
}

// Builds a matrix whose rows are exactly the given values (no standardization).
inline seqloc::DifferenceMatrix raw_matrix(const std::vector<std::vector<double>>& rows) {
  seqloc::DifferenceMatrix m(rows.front().size());
  for (const auto& r : rows) m.push_row({r, {}});
  return m;
}

inline seqloc::DifferenceMatrix random_matrix(std::size_t nq, std::size_t nr, std::uint64_t seed) {
  seqloc::Rng rng(seed);
  std::vector<std::vector<double>> rows(nq, std::vector<double>(nr));
  for (auto& r : rows) {
    for (auto& x : r) x = rng.normal();
  }
  return raw_matrix(rows);
}

// Mean of d[i-k][j-k] for k in [0, L), by direct summation.
inline double naive_window(const seqloc::DifferenceMatrix& m, std::size_t i, std::size_t j, std::size_t L) {
  double s = 0.0;
  for (std::size_t k = 0; k < L; ++k) s += m.at(i - k, j - k);
  return s / static_cast<double>(L);
}

inline double pop_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double pop_sd(const std::vector<double>& v) {
  const double mu = pop_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace testing
