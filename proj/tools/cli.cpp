#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqloc/adaptive.hpp"
#include "seqloc/csv.hpp"
#include "seqloc/descriptor.hpp"
#include "seqloc/descriptor_io.hpp"
#include "seqloc/difference_matrix.hpp"
#include "seqloc/distributions.hpp"
#include "seqloc/error.hpp"
#include "seqloc/evaluation.hpp"
#include "seqloc/synth.hpp"
#include "seqloc/window_matcher.hpp"

namespace fs = std::filesystem;

namespace seqloc::cli {
namespace {

constexpr const char* kFormats = R"(File formats:
  descriptor file   JSON manifest {count, dim, dtype:"f32", layout:"row-major", blob, kind}
                    plus a little-endian float32 blob (same name, .bin) of count*dim values.
                    Sparse (Wi-Fi) sets are stored densely; zeros mean "not observed".
  matrix cache      same envelope with kind "difference-matrix", row_mean, row_sigma.
  Wi-Fi CSV         frame_index,ap_id,rssi
  ground truth      query_index,ref_index (frames without a row have no ground truth)
  shuffle manifest  new_index,old_index
  match CSV         query_index,best_ref,window_len,score,significance,status
  trace CSV         query_index,chosen_L,best_ref,score,significance,status
  p(L) curve CSV    query_index,L,p
  PR CSV            threshold,precision,recall,n_accepted,n_correct
                    (adaptive significance thresholds are ln p)
  report JSON       {mtl, auc, n_frames, tolerance, mode, config_digest}
All reals are printed with 9 significant digits.
Exit codes: 0 ok, 1 usage/config error, 2 data/format error, 3 internal error.)";

// Everything a command writes, collected first so a failure leaves no partial output.
class Outputs {
 public:
  void add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }
  void commit() const {
    for (const auto& [path, content] : files_) write_file(path, content);
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + std::to_string(v[k]);
  return out;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string images;
  std::string wifi;
  std::string downsample;
  std::size_t patch = 4;
  std::size_t ap_count = 0;
  std::size_t frames = 0;
  std::string out;
};

std::pair<std::size_t, std::size_t> parse_size_pair(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw ArgumentError("--downsample expects WxH, got '" + text + "'");
  try {
    std::size_t used = 0;
    const auto w = std::stoull(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const auto h = std::stoull(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::logic_error&) {
    throw ArgumentError("--downsample expects WxH, got '" + text + "'");
  }
}

void cmd_ingest(const IngestArgs& a) {
  if (a.images.empty() == a.wifi.empty()) throw ArgumentError("ingest: give exactly one of --images or --wifi");
  std::optional<std::pair<std::size_t, std::size_t>> size;
  if (!a.downsample.empty()) size = parse_size_pair(a.downsample);

  std::vector<Descriptor> set;
  if (!a.images.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.images)) {
      if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("ingest: no .pgm files in " + a.images);
    for (const auto& f : files) {
      auto img = load_pgm(f);
      if (size) img = downsample(img, size->first, size->second);
      if (a.patch > 0) {
        set.push_back(patch_normalize(img, a.patch));
      } else {
        set.push_back(Descriptor::dense(img.pixels));
      }
      if (set.back().dim() != set.front().dim()) {
        throw DataError("ingest: " + f.string() + " has a different size from the first image");
      }
    }
  } else {
    const auto records = read_wifi_csv(a.wifi);
    if (records.empty()) throw DataError("ingest: no records in " + a.wifi);
    std::size_t max_ap = 0;
    std::size_t max_frame = 0;
    for (const auto& r : records) {
      max_ap = std::max(max_ap, r.ap_id);
      max_frame = std::max(max_frame, r.frame_index);
    }
    const std::size_t aps = a.ap_count ? a.ap_count : max_ap + 1;
    const std::size_t frames = a.frames ? a.frames : max_frame + 1;
    set = wifi_vectorize_all(records, frames, aps);
  }
  save_descriptors(a.out, set);
  std::cerr << "ingested " << set.size() << " frames, dim " << set.front().dim() << " -> " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  SynthSpec spec;
  bool shuffle = false;
  double min_frac = kShuffleMinFrac;
  double max_frac = kShuffleMaxFrac;
  std::string modality = "image";
  std::string out;
};

void cmd_synth(SynthArgs a) {
  a.spec.modality = parse_modality(a.modality);
  if (a.shuffle) a.spec.shuffle = ShuffleSpec{a.min_frac, a.max_frac, derived_seed(a.spec.seed, 1)};
  a.spec.validate();
  const auto data = synth_generate(a.spec);
  const fs::path dir = a.out;
  save_descriptors(dir / "reference.json", data.refs);
  save_descriptors(dir / "query.json", data.queries);
  Outputs out;
  out.add(dir / "ground_truth.csv", ground_truth_csv(data.gt));
  if (!data.perm.empty()) out.add(dir / "shuffle_manifest.csv", manifest_csv(data.perm));
  out.commit();
  std::cerr << "synthesized " << data.refs.size() << " reference and " << data.queries.size() << " query frames -> "
            << dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// shuffle

struct ShuffleArgs {
  std::string in;
  std::string gt;
  std::string out;
  std::string gt_out;
  std::string manifest_out;
  std::string inverse;
  double min_frac = kShuffleMinFrac;
  double max_frac = kShuffleMaxFrac;
  std::uint64_t seed = 1;
};

void cmd_shuffle(const ShuffleArgs& a) {
  if (!a.gt.empty() && a.gt_out.empty()) throw ArgumentError("shuffle: --gt needs --gt-out");
  if (a.inverse.empty() && a.manifest_out.empty()) throw ArgumentError("shuffle: --manifest-out is required");
  if (fs::path(a.out) == fs::path(a.in)) throw ArgumentError("shuffle: --out must differ from --in");

  const auto frames = load_descriptors(a.in);
  std::vector<std::size_t> perm;
  if (!a.inverse.empty()) {
    perm = inverse_permutation(load_manifest(a.inverse));
  } else {
    perm = shuffle_traverse(frames.size(), a.min_frac, a.max_frac, a.seed).perm;
  }
  if (perm.size() != frames.size()) {
    throw DataError("shuffle: manifest has " + std::to_string(perm.size()) + " rows but the descriptor file has " +
                    std::to_string(frames.size()) + " frames");
  }
  Outputs out;
  if (!a.gt.empty()) {
    const auto gt = load_ground_truth(a.gt, frames.size());
    out.add(a.gt_out, ground_truth_csv(permute_ground_truth(gt, perm)));
  }
  if (a.inverse.empty()) out.add(a.manifest_out, manifest_csv(perm));
  save_descriptors(a.out, apply_permutation<Descriptor>(frames, perm));
  out.commit();
}

// ---------------------------------------------------------------------------
// Shared matrix source for localize and diag

struct MatrixSource {
  std::string ref;
  std::string query;
  std::string matrix;
  std::string op = "sad";
  std::size_t threads = 0;

  void check() const {
    const bool pair = !ref.empty() || !query.empty();
    if (pair && !matrix.empty()) throw ArgumentError("give either --ref/--query or --matrix, not both");
    if (!matrix.empty()) return;
    if (ref.empty() || query.empty()) throw ArgumentError("--ref and --query are both required (or --matrix)");
    parse_difference_op(op);
  }

  DifferenceMatrix load() const {
    if (!matrix.empty()) return load_matrix(matrix);
    const auto refs = load_descriptors(ref);
    const auto queries = load_descriptors(query);
    if (refs.front().dim() != queries.front().dim()) {
      throw DataError("reference dim " + std::to_string(refs.front().dim()) + " differs from query dim " +
                      std::to_string(queries.front().dim()));
    }
    return build(queries, refs, parse_difference_op(op), threads);
  }
};

void add_source_options(CLI::App* cmd, MatrixSource& s) {
  cmd->add_option("--ref", s.ref, "Reference descriptor file")->check(CLI::ExistingFile);
  cmd->add_option("--query", s.query, "Query descriptor file")->check(CLI::ExistingFile);
  cmd->add_option("--matrix", s.matrix, "Cached difference matrix (instead of --ref/--query)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--op", s.op, "Difference operator")->check(CLI::IsMember({"sad", "cosine"}))->capture_default_str();
  cmd->add_option("--threads", s.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

struct GridArgs {
  std::size_t l_min = 10;
  std::size_t l_max = 500;
  std::size_t l_stride = 5;
  std::string approx = "gaussian";
  bool exclude_best = false;

  AdaptiveConfig config(const std::string& op) const {
    AdaptiveConfig c;
    c.l_min = l_min;
    c.l_max = l_max;
    c.l_stride = l_stride;
    c.method = parse_fit_method(approx);
    c.op = parse_difference_op(op);
    c.exclude_best = exclude_best;
    c.validate();
    return c;
  }
};

void add_grid_options(CLI::App* cmd, GridArgs& g) {
  cmd->add_option("--l-min", g.l_min, "Shortest window length searched")->capture_default_str();
  cmd->add_option("--l-max", g.l_max, "Longest window length searched (always included)")->capture_default_str();
  cmd->add_option("--l-stride", g.l_stride, "Step between searched window lengths")->capture_default_str();
  cmd->add_option("--approx", g.approx, "Score distribution approximation: gaussian, robust, gmm2, gmm3")
      ->check(CLI::IsMember({"gaussian", "robust", "robust_gaussian", "gmm2", "gmm3"}))
      ->capture_default_str();
  cmd->add_flag("--exclude-best", g.exclude_best, "Fit the distribution without the best score");
}

// ---------------------------------------------------------------------------
// localize

struct LocalizeArgs {
  MatrixSource src;
  GridArgs grid;
  std::string mode = "fixed";
  std::size_t L = 100;
  std::string gt;
  bool eval = false;
  std::size_t tolerance = kDefaultTolerance;
  std::string threshold_on;
  bool curves = false;
  std::string save_matrix;
  std::string out;
};

std::string config_text(const LocalizeArgs& a, const DifferenceMatrix& m) {
  std::ostringstream s;
  s << "mode=" << a.mode << ";n_query=" << m.n_query() << ";n_ref=" << m.n_ref() << ";op=" << a.src.op
    << ";tolerance=" << a.tolerance;
  if (a.mode == "fixed") s << ";L=" << a.L;
  if (a.mode != "fixed") {
    s << ";l_min=" << a.grid.l_min << ";l_max=" << a.grid.l_max << ";l_stride=" << a.grid.l_stride
      << ";exclude_best=" << a.grid.exclude_best;
  }
  if (a.mode == "adaptive") s << ";approx=" << to_string(parse_fit_method(a.grid.approx)) << ";threshold_on=" << a.threshold_on;
  if (a.mode == "sweep") s << ";fixed=" << join_sizes({std::begin(kSweepWindowLengths), std::end(kSweepWindowLengths)});
  return s.str();
}

ThresholdMode parse_threshold(const std::string& s) {
  if (s == "score") return ThresholdMode::score;
  if (s == "significance" || s == "p") return ThresholdMode::significance;
  throw ArgumentError("--threshold-on must be score or significance");
}

void cmd_localize(LocalizeArgs a) {
  a.src.check();
  if (a.mode == "sweep") a.eval = true;
  if (a.eval && a.gt.empty()) throw ArgumentError("localize: evaluation needs --gt");
  if (a.mode == "fixed" && a.L == 0) throw ArgumentError("localize: --L must be at least 1");
  if (a.threshold_on.empty()) a.threshold_on = a.mode == "fixed" ? "score" : "significance";
  const ThresholdMode threshold = parse_threshold(a.threshold_on);
  const AdaptiveConfig cfg = a.grid.config(a.src.op);

  const auto m = a.src.load();
  std::optional<GroundTruth> gt;
  if (a.eval) gt = load_ground_truth(a.gt, m.n_query(), m.n_ref(), a.tolerance);
  const auto prefix = PrefixField::build(m);
  const fs::path dir = a.out;
  const std::string digest = fnv1a_hex(config_text(a, m));

  Outputs out;

  if (a.mode == "fixed") {
    const auto r = fixed_localize(prefix, a.L, a.src.threads);
    out.add(dir / "matches.csv", match_csv(r));
    if (gt) {
      const auto s = evaluate(r, *gt, threshold);
      out.add(dir / ("pr_" + std::string(to_string(threshold)) + ".csv"), pr_csv(s.pr));
      out.add(dir / "report.json", report_json(s, a.tolerance, "fixed", digest));
      std::cout << "fixed L=" << a.L << "  mtl " << s.mtl << "  auc " << format_real(s.auc) << "\n";
    }
  } else if (a.mode == "adaptive") {
    const auto trace = run_adaptive(prefix, cfg, a.src.threads, a.curves);
    out.add(dir / "trace.csv", trace_csv(trace.frames));
    if (a.curves) out.add(dir / "curves.csv", curve_csv(trace));
    if (gt) {
      const auto by_sig = evaluate(trace.frames, *gt, ThresholdMode::significance);
      const auto by_score = evaluate(trace.frames, *gt, ThresholdMode::score);
      out.add(dir / "pr_significance.csv", pr_csv(by_sig.pr));
      out.add(dir / "pr_score.csv", pr_csv(by_score.pr));
      const auto& s = threshold == ThresholdMode::significance ? by_sig : by_score;
      out.add(dir / "report.json", report_json(s, a.tolerance, "adaptive", digest));
      std::cout << "adaptive " << to_string(cfg.method) << "  mtl " << s.mtl << "  auc " << format_real(s.auc)
                << "\n";
    }
  } else {
    std::string summary = "run,L,approx,mtl,auc,n_correct,n_frames\n";
    std::ostringstream table;
    table << "run        L  approx     mtl      auc\n";
    auto row = [&](const char* run, const std::string& L, const std::string& approx, const EvalSummary& s) {
      summary += std::string(run) + ',' + L + ',' + approx + ',' + std::to_string(s.mtl) + ',' + format_real(s.auc) +
                 ',' + std::to_string(s.n_correct) + ',' + std::to_string(s.n_frames) + '\n';
      char line[128];
      std::snprintf(line, sizeof line, "%-8s %4s  %-8s %6zu  %.4f\n", run, L.c_str(), approx.c_str(), s.mtl, s.auc);
      table << line;
    };
    for (std::size_t L : kSweepWindowLengths) {
      const auto r = fixed_localize(prefix, L, a.src.threads);
      const auto s = evaluate(r, *gt, ThresholdMode::score);
      const std::string tag = "fixed_L" + std::to_string(L);
      out.add(dir / (tag + ".csv"), match_csv(r));
      out.add(dir / ("pr_" + tag + ".csv"), pr_csv(s.pr));
      row("fixed", std::to_string(L), "", s);
    }
    for (FitMethod method : kAllFitMethods) {
      AdaptiveConfig c = cfg;
      c.method = method;
      const auto trace = run_adaptive(prefix, c, a.src.threads);
      const auto s = evaluate(trace.frames, *gt, ThresholdMode::significance);
      const std::string tag = "adaptive_" + std::string(to_string(method));
      out.add(dir / (tag + ".csv"), trace_csv(trace.frames));
      out.add(dir / ("pr_" + tag + ".csv"), pr_csv(s.pr));
      row("adaptive", "", std::string(to_string(method)), s);
    }
    out.add(dir / "summary.csv", summary);
    std::cout << table.str();
  }
  if (!a.save_matrix.empty()) save_matrix(a.save_matrix, m);
  out.commit();
}

// ---------------------------------------------------------------------------
// diag

struct DiagArgs {
  MatrixSource src;
  GridArgs grid;
  std::vector<std::size_t> frames;
  std::size_t every = 100;
  std::string trace;
  std::string out;
};

std::vector<std::optional<std::size_t>> read_chosen_lengths(const fs::path& path, std::size_t n_query) {
  const auto rows = read_csv(path, "query_index,chosen_L,best_ref,score,significance,status");
  if (rows.size() != n_query) {
    throw DataError(path.string() + ": " + std::to_string(rows.size()) + " rows for " + std::to_string(n_query) +
                    " query frames");
  }
  std::vector<std::optional<std::size_t>> out(n_query);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string ctx = path.string() + " row " + std::to_string(r + 2);
    if (parse_int_field(rows[r][0], ctx) != static_cast<long long>(r)) throw DataError(ctx + ": rows out of order");
    if (!rows[r][1].empty()) {
      const long long L = parse_int_field(rows[r][1], ctx);
      if (L < 1) throw DataError(ctx + ": chosen_L must be positive");
      out[r] = static_cast<std::size_t>(L);
    }
  }
  return out;
}

void cmd_diag(const DiagArgs& a) {
  a.src.check();
  if (a.frames.empty() && a.every == 0) throw ArgumentError("diag: --every must be positive");
  const AdaptiveConfig cfg = a.grid.config(a.src.op);
  const auto m = a.src.load();
  const auto prefix = PrefixField::build(m);
  const fs::path dir = a.out;

  std::vector<std::size_t> frames = a.frames;
  if (frames.empty()) {
    for (std::size_t i = 0; i < m.n_query(); i += a.every) frames.push_back(i);
  }
  for (std::size_t i : frames) {
    if (i >= m.n_query()) throw ArgumentError("diag: frame " + std::to_string(i) + " out of range");
  }

  Outputs out;
  AdaptiveScratch scratch;
  const auto grid = cfg.grid();
  for (std::size_t i : frames) {
    std::string stats = "L,mean,std,min,p_gaussian,p_robust,p_gmm2,p_gmm3\n";
    for (std::size_t L : grid) {
      if (L > i + 1 || L > m.n_ref()) break;
      score_row_into(prefix, i, L, scratch.scores);
      const std::vector<double> scores = scratch.scores;
      double mean = 0.0;
      for (double s : scores) mean += s;
      mean /= static_cast<double>(scores.size());
      double ss = 0.0;
      for (double s : scores) ss += (s - mean) * (s - mean);
      stats += std::to_string(L) + ',' + format_real(mean) + ',' +
               format_real(std::sqrt(ss / static_cast<double>(scores.size()))) + ',' +
               format_real(*std::min_element(scores.begin(), scores.end()));
      for (FitMethod method : kAllFitMethods) {
        const double p = scores.size() < 2 ? 1.0 : significance(scores, method, scratch.fit, cfg.exclude_best).p;
        stats += ',' + format_real(p);
      }
      stats += '\n';
    }
    out.add(dir / ("score_stats_q" + std::to_string(i) + ".csv"), stats);

    std::string curves = "method,L,p,log_p,global_min\n";
    for (FitMethod method : kAllFitMethods) {
      AdaptiveConfig c = cfg;
      c.method = method;
      std::vector<CurvePoint> curve;
      const auto r = adapt_frame(prefix, i, c, scratch, &curve);
      for (const auto& pt : curve) {
        const bool best = r.has_hypothesis() && pt.L == r.window_len;
        curves += std::string(to_string(method)) + ',' + std::to_string(pt.L) + ',' + format_real(pt.p) + ',' +
                  format_real(pt.log_p) + ',' + (best ? "1" : "0") + '\n';
      }
    }
    out.add(dir / ("pcurve_q" + std::to_string(i) + ".csv"), curves);
  }

  std::vector<std::optional<std::size_t>> chosen;
  if (!a.trace.empty()) {
    chosen = read_chosen_lengths(a.trace, m.n_query());
  } else {
    for (const auto& r : run_adaptive(prefix, cfg, a.src.threads).frames) {
      chosen.push_back(r.has_hypothesis() ? std::optional<std::size_t>(r.window_len) : std::nullopt);
    }
  }
  std::string series = "query_index,chosen_L\n";
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    series += std::to_string(i) + ',' + (chosen[i] ? std::to_string(*chosen[i]) : std::string()) + '\n';
  }
  out.add(dir / "chosen_L.csv", series);
  out.commit();
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Sequence-based localization with adaptive window lengths.", "seqloc"};
  app.footer(kFormats);
  app.set_config("--config", "", "Config file of key=value lines ([subcommand] sections); command-line flags win");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Convert PGM images or a Wi-Fi CSV into a descriptor file");
  c_ingest->add_option("--images", ingest.images, "Directory of .pgm frames (sorted by file name)")
      ->check(CLI::ExistingDirectory);
  c_ingest->add_option("--wifi", ingest.wifi, "Wi-Fi CSV: frame_index,ap_id,rssi")->check(CLI::ExistingFile);
  c_ingest->add_option("--downsample", ingest.downsample, "Area-average images to WxH first, e.g. 32x16");
  c_ingest->add_option("--patch-norm", ingest.patch, "Patch size for patch normalization (0 = raw pixels)")
      ->capture_default_str();
  c_ingest->add_option("--ap-count", ingest.ap_count, "Wi-Fi descriptor length (default: max ap_id + 1)");
  c_ingest->add_option("--frames", ingest.frames, "Wi-Fi frame count (default: max frame_index + 1)");
  c_ingest->add_option("--out", ingest.out, "Output descriptor manifest (.json)")->required();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a seeded synthetic reference/query/ground-truth set");
  c_synth->add_option("--n", synth.spec.n_ref, "Reference frames")->capture_default_str();
  c_synth->add_option("--n-query", synth.spec.n_query, "Query frames (0 = same as --n)")->capture_default_str();
  c_synth->add_option("--modality", synth.modality, "image or wifi")
      ->check(CLI::IsMember({"image", "wifi", "image_like", "wifi_like", "image-like", "wifi-like"}))
      ->capture_default_str();
  c_synth->add_option("--dim", synth.spec.descriptor_dim, "Image-like descriptor length")->capture_default_str();
  c_synth->add_option("--noise", synth.spec.noise_sigma, "Query noise sigma")->capture_default_str();
  c_synth->add_option("--drift", synth.spec.speed_drift, "Speed variation (log-scale amplitude)")->capture_default_str();
  c_synth->add_option("--slow-amplitude", synth.spec.slow_amplitude,
                      "Weight of the slowly varying part of the image-like reference walk")
      ->capture_default_str();
  c_synth->add_option("--speed-corr", synth.spec.speed_corr, "Frame-to-frame speed correlation")->capture_default_str();
  c_synth->add_option("--ap-count", synth.spec.ap_count, "Wi-Fi access points")->capture_default_str();
  c_synth->add_option("--mean-active", synth.spec.mean_active, "Mean access points seen per Wi-Fi frame")
      ->capture_default_str();
  c_synth->add_flag("--shuffle", synth.shuffle, "Reorder contiguous query segments and write shuffle_manifest.csv");
  c_synth->add_option("--min-frac", synth.min_frac, "Shortest shuffle segment, as a fraction of the query length")
      ->capture_default_str();
  c_synth->add_option("--max-frac", synth.max_frac, "Longest shuffle segment, as a fraction of the query length")
      ->capture_default_str();
  c_synth->add_option("--seed", synth.spec.seed, "Seed for all generated data (the shuffle uses a derived stream)")
      ->capture_default_str();
  c_synth->add_option("--out", synth.out,
                      "Output directory (reference.json, query.json, ground_truth.csv[, shuffle_manifest.csv])")
      ->required();

  ShuffleArgs shuffle;
  auto* c_shuffle = app.add_subcommand("shuffle", "Reorder contiguous segments of a descriptor file");
  c_shuffle->add_option("--in", shuffle.in, "Input descriptor file")->required()->check(CLI::ExistingFile);
  c_shuffle->add_option("--out", shuffle.out, "Output descriptor file")->required();
  c_shuffle->add_option("--gt", shuffle.gt, "Ground truth to remap alongside")->check(CLI::ExistingFile);
  c_shuffle->add_option("--gt-out", shuffle.gt_out, "Remapped ground truth output");
  c_shuffle->add_option("--manifest-out", shuffle.manifest_out, "Shuffle manifest output (new_index,old_index)");
  c_shuffle->add_option("--inverse", shuffle.inverse, "Undo the shuffle recorded in this manifest instead")
      ->check(CLI::ExistingFile);
  c_shuffle->add_option("--min-frac", shuffle.min_frac, "Shortest segment fraction")->capture_default_str();
  c_shuffle->add_option("--max-frac", shuffle.max_frac, "Longest segment fraction")->capture_default_str();
  c_shuffle->add_option("--seed", shuffle.seed, "Shuffle seed")->capture_default_str();

  LocalizeArgs loc;
  auto* c_loc = app.add_subcommand("localize", "Localize query frames against the reference");
  add_source_options(c_loc, loc.src);
  add_grid_options(c_loc, loc.grid);
  c_loc->add_option("--mode", loc.mode,
                    "fixed (one L), adaptive (one approximation), or sweep (L in {10,25,50,100,200,350,500} "
                    "plus adaptive with every approximation; needs --gt)")
      ->check(CLI::IsMember({"fixed", "adaptive", "sweep"}))
      ->capture_default_str();
  c_loc->add_option("--L", loc.L, "Window length for --mode fixed")->capture_default_str();
  c_loc->add_option("--gt", loc.gt, "Ground truth CSV")->check(CLI::ExistingFile);
  c_loc->add_flag("--eval", loc.eval, "Write report.json and PR curves (needs --gt)");
  c_loc->add_option("--tolerance", loc.tolerance, "Correctness radius in reference frames")->capture_default_str();
  c_loc->add_option("--threshold-on", loc.threshold_on,
                    "Value thresholded for the reported PR curve: score or significance "
                    "(default: score for fixed, significance for adaptive)")
      ->check(CLI::IsMember({"score", "significance", "p"}));
  c_loc->add_flag("--curves", loc.curves, "Adaptive mode: also write curves.csv with p for every evaluated L");
  c_loc->add_option("--save-matrix", loc.save_matrix, "Cache the difference matrix at this manifest path");
  c_loc->add_option("--out", loc.out, "Output directory")->required();

  DiagArgs diag;
  auto* c_diag = app.add_subcommand("diag", "Write plot-ready diagnostics for sampled query frames");
  add_source_options(c_diag, diag.src);
  add_grid_options(c_diag, diag.grid);
  c_diag->add_option("--frames", diag.frames, "Query frames to sample")->delimiter(',');
  c_diag->add_option("--every", diag.every, "Sample every Nth query frame when --frames is not given")
      ->capture_default_str();
  c_diag->add_option("--trace", diag.trace, "Adaptive trace CSV for the chosen-L series (else computed with --approx)")
      ->check(CLI::ExistingFile);
  c_diag->add_option("--out", diag.out,
                     "Output directory (score_stats_q<i>.csv, pcurve_q<i>.csv, chosen_L.csv)")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_ingest->parsed()) cmd_ingest(ingest);
    if (c_synth->parsed()) cmd_synth(synth);
    if (c_shuffle->parsed()) cmd_shuffle(shuffle);
    if (c_loc->parsed()) cmd_localize(loc);
    if (c_diag->parsed()) cmd_diag(diag);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace seqloc::cli
