#include "seqloc/difference_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqloc/descriptor_io.hpp"
#include "seqloc/error.hpp"
#include "seqloc/parallel.hpp"

namespace seqloc {

RowStats standardize_row(std::span<double> raw) {
  if (raw.empty()) throw ArgumentError("standardize_row: empty row");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  double sum = 0.0;
  for (double v : raw) sum += v;
  const double n = static_cast<double>(raw.size());
  RowStats stats;
  stats.mean = sum / n;
  if (*lo == *hi) {
    stats.mean = *lo;
    std::fill(raw.begin(), raw.end(), 0.0);
    return stats;
  }
  double ss = 0.0;
  for (double v : raw) ss += (v - stats.mean) * (v - stats.mean);
  stats.sigma = std::sqrt(ss / n);
  for (double& v : raw) v = (v - stats.mean) / stats.sigma;
  return stats;
}

DifferenceRow build_row(const Descriptor& q, std::span<const Descriptor> refs, DifferenceOp op) {
  if (refs.empty()) throw ArgumentError("build_row: no reference frames");
  DifferenceRow row;
  row.values.resize(refs.size());
  for (std::size_t j = 0; j < refs.size(); ++j) row.values[j] = raw_difference(q, refs[j], op);
  row.stats = standardize_row(row.values);
  return row;
}

void DifferenceMatrix::push_row(const DifferenceRow& row) {
  if (n_ref_ == 0) n_ref_ = row.values.size();
  if (row.values.size() != n_ref_) throw ArgumentError("difference matrix: row length mismatch");
  values_.insert(values_.end(), row.values.begin(), row.values.end());
  stats_.push_back(row.stats);
}

namespace {

void check_dims(const Descriptor& q, std::span<const Descriptor> refs) {
  for (const auto& r : refs) {
    if (r.dim() != q.dim()) {
      throw ArgumentError("difference matrix: descriptor dimension mismatch (" + std::to_string(q.dim()) +
                          " vs " + std::to_string(r.dim()) + ")");
    }
  }
}

}  // namespace

DifferenceMatrix build(std::span<const Descriptor> queries, std::span<const Descriptor> refs,
                       DifferenceOp op, std::size_t threads) {
  if (queries.empty()) throw ArgumentError("build: no query frames");
  if (refs.empty()) throw ArgumentError("build: no reference frames");
  check_dims(refs.front(), refs);
  for (const auto& q : queries) {
    if (q.dim() != refs.front().dim()) throw ArgumentError("build: query/reference dimension mismatch");
  }
  std::vector<DifferenceRow> rows(queries.size());
  parallel_blocks(queries.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) rows[i] = build_row(queries[i], refs, op);
  });
  DifferenceMatrix m(refs.size());
  for (const auto& r : rows) m.push_row(r);
  return m;
}

DifferenceMatrix append_row(DifferenceMatrix m, const Descriptor& q, std::span<const Descriptor> refs,
                            DifferenceOp op) {
  if (!m.empty() && refs.size() != m.n_ref()) {
    throw ArgumentError("append_row: reference count differs from the matrix");
  }
  check_dims(q, refs);
  m.push_row(build_row(q, refs, op));
  return m;
}

void save_matrix(const std::filesystem::path& manifest_path, const DifferenceMatrix& m) {
  F32Envelope env;
  env.count = m.n_query();
  env.dim = m.n_ref();
  env.values.assign(m.data().begin(), m.data().end());
  std::vector<double> means;
  std::vector<double> sigmas;
  for (std::size_t i = 0; i < m.n_query(); ++i) {
    means.push_back(m.row_stats(i).mean);
    sigmas.push_back(m.row_stats(i).sigma);
  }
  env.extra["kind"] = "difference-matrix";
  env.extra["row_mean"] = means;
  env.extra["row_sigma"] = sigmas;
  write_envelope(manifest_path, env);
}

DifferenceMatrix load_matrix(const std::filesystem::path& manifest_path) {
  const auto env = read_envelope(manifest_path);
  if (env.extra.value("kind", std::string()) != "difference-matrix") {
    throw ParseError(ParseErrorKind::unsupported_format, manifest_path.string() + ": not a difference matrix");
  }
  std::vector<double> means;
  std::vector<double> sigmas;
  try {
    means = env.extra.at("row_mean").get<std::vector<double>>();
    sigmas = env.extra.at("row_sigma").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::malformed_header, manifest_path.string() + ": " + e.what());
  }
  if (means.size() != env.count || sigmas.size() != env.count) {
    throw ParseError(ParseErrorKind::malformed_header, manifest_path.string() + ": row statistics size");
  }
  DifferenceMatrix m(env.dim);
  for (std::size_t i = 0; i < env.count; ++i) {
    DifferenceRow row;
    row.values.assign(env.values.begin() + static_cast<std::ptrdiff_t>(i * env.dim),
                      env.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * env.dim));
    row.stats = {means[i], sigmas[i]};
    m.push_row(row);
  }
  return m;
}

}  // namespace seqloc
