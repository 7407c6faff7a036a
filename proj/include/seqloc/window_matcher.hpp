#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqloc/difference_matrix.hpp"

namespace seqloc {

/// Diagonal prefix sums of a difference matrix: c[i][j] = d[i][j] + c[i-1][j-1],
/// with out-of-range entries taken as 0. Rows can be appended as queries arrive.
class PrefixField {
 public:
  PrefixField() = default;
  explicit PrefixField(std::size_t n_ref) : n_ref_(n_ref) {}

  static PrefixField build(const DifferenceMatrix& m);

  void append_row(std::span<const double> d_row);

  std::size_t n_query() const noexcept { return n_ref_ == 0 ? 0 : c_.size() / n_ref_; }
  std::size_t n_ref() const noexcept { return n_ref_; }
  double at(std::size_t i, std::size_t j) const { return c_[i * n_ref_ + j]; }

 private:
  std::size_t n_ref_ = 0;
  std::vector<double> c_;
};

/// Mean of the L diagonal entries ending at (i, j).
double window_score(const PrefixField& p, std::size_t i, std::size_t j, std::size_t L);

/// window_score(i, j, L) for j = L-1 .. n_ref-1, written into `out`.
void score_row_into(const PrefixField& p, std::size_t i, std::size_t L, std::vector<double>& out);
std::vector<double> score_row(const PrefixField& p, std::size_t i, std::size_t L);

enum class MatchStatus { hypothesis, no_hypothesis };

std::string_view to_string(MatchStatus s);

struct LocalizationResult {
  std::size_t query_index = 0;
  std::size_t best_ref = 0;
  std::size_t window_len = 0;
  double score = 0.0;
  double significance = 1.0;
  /// ln(significance), kept separately because deep-tail significances
  /// underflow a double long before their logarithm does.
  double log_significance = 0.0;
  MatchStatus status = MatchStatus::no_hypothesis;

  bool has_hypothesis() const noexcept { return status == MatchStatus::hypothesis; }
  friend bool operator==(const LocalizationResult&, const LocalizationResult&) = default;
};

/// Fixed window length baseline: argmin_j s_ij(L) per query (ties to the
/// smallest j). Queries with i < L-1 get no hypothesis.
std::vector<LocalizationResult> fixed_localize(const PrefixField& p, std::size_t L, std::size_t threads = 1);
std::vector<LocalizationResult> fixed_localize(const DifferenceMatrix& m, std::size_t L,
                                               std::size_t threads = 1);

/// `query_index,best_ref,window_len,score,significance,status`
std::string match_csv(std::span<const LocalizationResult> results);

/// The window lengths compared by the fixed-length sweep.
inline constexpr std::size_t kSweepWindowLengths[] = {10, 25, 50, 100, 200, 350, 500};

}  // namespace seqloc
