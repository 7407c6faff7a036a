#include "seqloc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "seqloc/csv.hpp"
#include "seqloc/error.hpp"
#include "seqloc/rng.hpp"

namespace seqloc {

std::size_t GroundTruth::count_known() const {
  return static_cast<std::size_t>(std::count_if(ref_index.begin(), ref_index.end(),
                                                [](const auto& r) { return r.has_value(); }));
}

GroundTruth load_ground_truth(const std::filesystem::path& path, std::size_t n_query,
                              std::optional<std::size_t> n_ref, std::size_t tolerance) {
  const auto rows = read_csv(path, "query_index,ref_index");
  GroundTruth gt;
  gt.tolerance = tolerance;
  gt.ref_index.assign(n_query, std::nullopt);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string ctx = path.string() + " row " + std::to_string(r + 2);
    const long long q = parse_int_field(rows[r][0], ctx);
    const long long ref = parse_int_field(rows[r][1], ctx);
    if (q < 0 || static_cast<std::size_t>(q) >= n_query) {
      throw DataError(ctx + ": query_index " + std::to_string(q) + " out of range");
    }
    if (ref < 0 || (n_ref && static_cast<std::size_t>(ref) >= *n_ref)) {
      throw DataError(ctx + ": ref_index " + std::to_string(ref) + " out of range");
    }
    if (gt.ref_index[static_cast<std::size_t>(q)]) {
      throw DataError(ctx + ": duplicate query_index " + std::to_string(q));
    }
    gt.ref_index[static_cast<std::size_t>(q)] = static_cast<std::size_t>(ref);
  }
  return gt;
}

std::string ground_truth_csv(const GroundTruth& gt) {
  std::string out = "query_index,ref_index\n";
  for (std::size_t i = 0; i < gt.ref_index.size(); ++i) {
    if (gt.ref_index[i]) out += std::to_string(i) + ',' + std::to_string(*gt.ref_index[i]) + '\n';
  }
  return out;
}

bool correctness(const LocalizationResult& result, const GroundTruth& gt) {
  if (!result.has_hypothesis()) return false;
  if (result.query_index >= gt.size()) throw ArgumentError("correctness: query index outside ground truth");
  const auto& truth = gt.ref_index[result.query_index];
  if (!truth) return false;
  const std::size_t diff = result.best_ref > *truth ? result.best_ref - *truth : *truth - result.best_ref;
  return diff <= gt.tolerance;
}

std::size_t mtl(std::span<const LocalizationResult> results, const GroundTruth& gt) {
  if (results.empty()) throw ArgumentError("mtl: no results");
  std::size_t run = 0;
  std::size_t longest = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    if (r.query_index != k) throw ArgumentError("mtl: results must cover every frame in order");
    if (k >= gt.size()) throw ArgumentError("mtl: results extend past ground truth");
    if (!gt.ref_index[k]) continue;
    if (correctness(r, gt)) {
      run = 0;
    } else {
      longest = std::max(longest, ++run);
    }
  }
  return longest;
}

std::string_view to_string(ThresholdMode m) { return m == ThresholdMode::score ? "score" : "significance"; }

std::vector<PRPoint> pr_curve(std::span<const LocalizationResult> results, const GroundTruth& gt,
                              ThresholdMode mode) {
  struct Entry {
    double value;
    bool correct;
  };
  std::vector<Entry> accepted;
  std::size_t with_gt = 0;
  for (const auto& r : results) {
    if (r.query_index >= gt.size() || !gt.ref_index[r.query_index]) continue;
    ++with_gt;
    if (!r.has_hypothesis()) continue;
    const double v = mode == ThresholdMode::score ? r.score : r.log_significance;
    if (std::isnan(v)) throw InvariantError("pr_curve: NaN match value");
    accepted.push_back({v, correctness(r, gt)});
  }
  std::stable_sort(accepted.begin(), accepted.end(),
                   [](const Entry& a, const Entry& b) { return a.value < b.value; });

  std::vector<PRPoint> points;
  points.push_back({-std::numeric_limits<double>::infinity(), 1.0, 0.0, 0, 0});
  std::size_t n_correct = 0;
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    if (accepted[k].correct) ++n_correct;
    if (k + 1 < accepted.size() && accepted[k + 1].value == accepted[k].value) continue;
    PRPoint pt;
    pt.threshold = accepted[k].value;
    pt.n_accepted = k + 1;
    pt.n_correct = n_correct;
    pt.precision = static_cast<double>(n_correct) / static_cast<double>(k + 1);
    pt.recall = with_gt == 0 ? 0.0 : static_cast<double>(n_correct) / static_cast<double>(with_gt);
    points.push_back(pt);
  }
  return points;
}

double auc(std::span<const PRPoint> points) {
  if (points.empty()) throw ArgumentError("auc: no points");
  std::vector<std::pair<double, double>> rp;
  rp.reserve(points.size() + 1);
  for (const auto& p : points) rp.emplace_back(p.recall, p.precision);
  std::sort(rp.begin(), rp.end(), [](const auto& a, const auto& b) {
    return a.first < b.first || (a.first == b.first && a.second > b.second);
  });
  rp.erase(std::unique(rp.begin(), rp.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
           rp.end());
  if (rp.front().first > 0.0) rp.insert(rp.begin(), {0.0, rp.front().second});
  double area = 0.0;
  for (std::size_t k = 1; k < rp.size(); ++k) {
    area += (rp[k].first - rp[k - 1].first) * 0.5 * (rp[k].second + rp[k - 1].second);
  }
  return std::clamp(area, 0.0, 1.0);
}

std::string pr_csv(std::span<const PRPoint> points) {
  std::string out = "threshold,precision,recall,n_accepted,n_correct\n";
  for (const auto& p : points) {
    out += format_real(p.threshold) + ',' + format_real(p.precision) + ',' + format_real(p.recall) + ',' +
           std::to_string(p.n_accepted) + ',' + std::to_string(p.n_correct) + '\n';
  }
  return out;
}

EvalSummary evaluate(std::span<const LocalizationResult> results, const GroundTruth& gt, ThresholdMode mode) {
  EvalSummary s;
  s.mtl = mtl(results, gt);
  s.pr = pr_curve(results, gt, mode);
  s.auc = auc(s.pr);
  s.n_frames = results.size();
  for (const auto& r : results) s.n_correct += correctness(r, gt) ? 1 : 0;
  return s;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string report_json(const EvalSummary& s, std::size_t tolerance, std::string_view mode,
                        std::string_view config_digest) {
  nlohmann::ordered_json j;
  j["mtl"] = s.mtl;
  // Round-trip through the CSV format so reports match the CSVs digit for digit.
  j["auc"] = std::stod(format_real(s.auc));
  j["n_frames"] = s.n_frames;
  j["tolerance"] = tolerance;
  j["mode"] = std::string(mode);
  j["config_digest"] = std::string(config_digest);
  return j.dump(2) + "\n";
}

Shuffle shuffle_traverse(std::size_t n, double min_frac, double max_frac, std::uint64_t seed) {
  if (!(min_frac > 0.0 && min_frac <= max_frac && max_frac < 1.0)) {
    throw ArgumentError("shuffle: fractions must satisfy 0 < min_frac <= max_frac < 1");
  }
  const double nd = static_cast<double>(n);
  if (nd * min_frac < 1.0) throw ArgumentError("shuffle: min_frac * n must be at least 1");
  const auto lo = static_cast<std::size_t>(std::ceil(min_frac * nd));
  const auto hi = static_cast<std::size_t>(std::floor(max_frac * nd));
  if (hi < lo) throw ArgumentError("shuffle: no integer segment length between the fraction bounds");

  Rng rng(seed);
  Shuffle s;
  for (std::size_t start = 0; start < n;) {
    const auto len = static_cast<std::size_t>(rng.between(lo, hi));
    s.segments.push_back({start, std::min(len, n - start)});
    start += len;
  }
  std::vector<std::size_t> order(s.segments.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = order.size(); k > 1; --k) {
    std::swap(order[k - 1], order[rng.below(k)]);
  }
  s.perm.reserve(n);
  for (std::size_t k : order) {
    for (std::size_t t = 0; t < s.segments[k].length; ++t) s.perm.push_back(s.segments[k].start + t);
  }
  return s;
}

void check_permutation(std::span<const std::size_t> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t old : perm) {
    if (old >= perm.size() || seen[old]) throw InvariantError("not a permutation");
    seen[old] = true;
  }
}

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm) {
  check_permutation(perm);
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
  return inv;
}

GroundTruth permute_ground_truth(const GroundTruth& gt, std::span<const std::size_t> perm) {
  if (perm.size() != gt.size()) throw ArgumentError("permutation length differs from ground truth length");
  GroundTruth out;
  out.tolerance = gt.tolerance;
  out.ref_index = apply_permutation<std::optional<std::size_t>>(gt.ref_index, perm);
  return out;
}

std::string manifest_csv(std::span<const std::size_t> perm) {
  std::string out = "new_index,old_index\n";
  for (std::size_t k = 0; k < perm.size(); ++k) out += std::to_string(k) + ',' + std::to_string(perm[k]) + '\n';
  return out;
}

std::vector<std::size_t> load_manifest(const std::filesystem::path& path) {
  const auto rows = read_csv(path, "new_index,old_index");
  std::vector<std::size_t> perm(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string ctx = path.string() + " row " + std::to_string(r + 2);
    const long long nw = parse_int_field(rows[r][0], ctx);
    const long long old = parse_int_field(rows[r][1], ctx);
    if (nw != static_cast<long long>(r)) throw DataError(ctx + ": new_index must count up from 0");
    if (old < 0) throw DataError(ctx + ": negative old_index");
    perm[r] = static_cast<std::size_t>(old);
  }
  try {
    check_permutation(perm);
  } catch (const InvariantError&) {
    throw DataError(path.string() + ": old_index column is not a permutation");
  }
  return perm;
}

}  // namespace seqloc
