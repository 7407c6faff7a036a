#include "seqloc/window_matcher.hpp"

#include <string>

#include "seqloc/csv.hpp"
#include "seqloc/diagnostics.hpp"
#include "seqloc/error.hpp"
#include "seqloc/parallel.hpp"

namespace seqloc {

PrefixField PrefixField::build(const DifferenceMatrix& m) {
  if (m.empty()) throw ArgumentError("build_prefix: empty difference matrix");
  PrefixField p(m.n_ref());
  p.c_.reserve(m.n_query() * m.n_ref());
  for (std::size_t i = 0; i < m.n_query(); ++i) p.append_row(m.row(i));
  return p;
}

void PrefixField::append_row(std::span<const double> d_row) {
  if (n_ref_ == 0) n_ref_ = d_row.size();
  if (d_row.size() != n_ref_ || n_ref_ == 0) throw ArgumentError("prefix field: row length mismatch");
  const std::size_t i = n_query();
  c_.resize(c_.size() + n_ref_);
  double* row = c_.data() + i * n_ref_;
  const double* prev = i > 0 ? c_.data() + (i - 1) * n_ref_ : nullptr;
  row[0] = d_row[0];
  for (std::size_t j = 1; j < n_ref_; ++j) row[j] = d_row[j] + (prev ? prev[j - 1] : 0.0);
}

namespace {

inline double diag_before(const PrefixField& p, std::size_t i, std::size_t j, std::size_t L) {
  return (i >= L && j >= L) ? p.at(i - L, j - L) : 0.0;
}

}  // namespace

double window_score(const PrefixField& p, std::size_t i, std::size_t j, std::size_t L) {
  if (L == 0) throw ArgumentError("window_score: L must be >= 1");
  if (i >= p.n_query() || j >= p.n_ref()) throw ArgumentError("window_score: index out of range");
  if (i + 1 < L || j + 1 < L) throw ArgumentError("window_score: window extends before the first frame");
  return (p.at(i, j) - diag_before(p, i, j, L)) / static_cast<double>(L);
}

void score_row_into(const PrefixField& p, std::size_t i, std::size_t L, std::vector<double>& out) {
  if (L == 0) throw ArgumentError("score_row: L must be >= 1");
  if (i >= p.n_query()) throw ArgumentError("score_row: query index out of range");
  if (i + 1 < L) throw ArgumentError("score_row: insufficient history for window length");
  if (L > p.n_ref()) throw ArgumentError("score_row: window longer than the reference traverse");
  const std::size_t n = p.n_ref() - L + 1;
  out.resize(n);
  const double inv = 1.0 / static_cast<double>(L);
  if (i >= L) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = k + L - 1;
      const double before = j >= L ? p.at(i - L, j - L) : 0.0;
      out[k] = (p.at(i, j) - before) * inv;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) out[k] = p.at(i, k + L - 1) * inv;
  }
}

std::vector<double> score_row(const PrefixField& p, std::size_t i, std::size_t L) {
  std::vector<double> out;
  score_row_into(p, i, L, out);
  return out;
}

std::string_view to_string(MatchStatus s) {
  return s == MatchStatus::hypothesis ? "hypothesis" : "no_hypothesis";
}

std::vector<LocalizationResult> fixed_localize(const PrefixField& p, std::size_t L, std::size_t threads) {
  if (L == 0) throw ArgumentError("fixed_localize: L must be >= 1");
  std::vector<LocalizationResult> out(p.n_query());
  if (L > p.n_ref()) {
    warn("fixed window length " + std::to_string(L) + " exceeds the reference length " +
         std::to_string(p.n_ref()) + "; no hypotheses produced");
  }
  parallel_blocks(p.n_query(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores;
    for (std::size_t i = begin; i < end; ++i) {
      auto& r = out[i];
      r.query_index = i;
      r.window_len = L;
      if (L > p.n_ref() || i + 1 < L) continue;
      score_row_into(p, i, L, scores);
      std::size_t best = 0;
      for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] < scores[best]) best = k;
      }
      r.best_ref = best + L - 1;
      r.score = scores[best];
      r.status = MatchStatus::hypothesis;
    }
  });
  return out;
}

std::vector<LocalizationResult> fixed_localize(const DifferenceMatrix& m, std::size_t L, std::size_t threads) {
  return fixed_localize(PrefixField::build(m), L, threads);
}

std::string match_csv(std::span<const LocalizationResult> results) {
  std::string out = "query_index,best_ref,window_len,score,significance,status\n";
  for (const auto& r : results) {
    out += std::to_string(r.query_index) + ',';
    if (r.has_hypothesis()) {
      out += std::to_string(r.best_ref) + ',' + std::to_string(r.window_len) + ',' + format_real(r.score) +
             ',' + format_real(r.significance);
    } else {
      out += ",,,";
    }
    out += ',';
    out += to_string(r.status);
    out += '\n';
  }
  return out;
}

}  // namespace seqloc
