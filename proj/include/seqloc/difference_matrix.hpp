#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "seqloc/descriptor.hpp"

namespace seqloc {

/// Mean and population standard deviation of one query's raw differences.
struct RowStats {
  double mean = 0.0;
  double sigma = 0.0;

  friend bool operator==(const RowStats&, const RowStats&) = default;
};

struct DifferenceRow {
  std::vector<double> values;
  RowStats stats;
};

/// Standardizes `raw` in place by its own mean and population sigma. A row whose
/// entries are all equal becomes all zeros. Reduction order is fixed (ascending j).
RowStats standardize_row(std::span<double> raw);

/// Raw differences of q against every reference, standardized per query.
DifferenceRow build_row(const Descriptor& q, std::span<const Descriptor> refs, DifferenceOp op);

/// Row-major n_query x n_ref matrix of per-query standardized differences.
class DifferenceMatrix {
 public:
  DifferenceMatrix() = default;
  explicit DifferenceMatrix(std::size_t n_ref) : n_ref_(n_ref) {}

  std::size_t n_query() const noexcept { return stats_.size(); }
  std::size_t n_ref() const noexcept { return n_ref_; }
  bool empty() const noexcept { return stats_.empty(); }

  double at(std::size_t i, std::size_t j) const { return values_[i * n_ref_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_ref_, n_ref_}; }
  const RowStats& row_stats(std::size_t i) const { return stats_[i]; }
  std::span<const double> data() const { return values_; }

  /// Appends an already-built row; its length must equal n_ref.
  void push_row(const DifferenceRow& row);

  friend bool operator==(const DifferenceMatrix&, const DifferenceMatrix&) = default;

 private:
  std::size_t n_ref_ = 0;
  std::vector<double> values_;
  std::vector<RowStats> stats_;
};

/// Rows are computed independently (optionally in parallel) and are identical
/// for every thread count.
DifferenceMatrix build(std::span<const Descriptor> queries, std::span<const Descriptor> refs,
                       DifferenceOp op, std::size_t threads = 1);

/// Returns `m` with one more row; `refs` must be the set used to build `m`.
DifferenceMatrix append_row(DifferenceMatrix m, const Descriptor& q, std::span<const Descriptor> refs,
                            DifferenceOp op);

/// Caches a matrix as an f32 envelope with row statistics in the manifest.
void save_matrix(const std::filesystem::path& manifest_path, const DifferenceMatrix& m);
DifferenceMatrix load_matrix(const std::filesystem::path& manifest_path);

}  // namespace seqloc
