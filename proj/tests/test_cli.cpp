#include <doctest.h>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "helpers.hpp"
#include "seqloc/csv.hpp"
#include "seqloc/descriptor_io.hpp"
#include "seqloc/evaluation.hpp"

using namespace seqloc;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  testing::WarningCapture quiet;
  return cli::run(args);
}

std::string s(const fs::path& p) { return p.string(); }

void write_pgm(const fs::path& p, std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  std::string bytes = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (std::size_t k = 0; k < w * h; ++k) bytes.push_back(static_cast<char>(rng.below(256)));
  testing::spit(p, bytes);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Every regular file under `dir`, relative path -> contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = testing::slurp(e.path());
  }
  return out;
}

std::vector<std::string> synth_args(const fs::path& out, std::size_t n) {
  return {"synth", "--n", std::to_string(n), "--seed", "7", "--out", s(out)};
}

}  // namespace

TEST_CASE("ingest images") {
  testing::TempDir tmp;
  for (int k = 0; k < 10; ++k) write_pgm(tmp / ("frames/f" + std::to_string(k) + ".pgm"), 64, 32, k);
  testing::spit(tmp / "frames/notes.txt", "ignored");
  REQUIRE(run({"ingest", "--images", s(tmp / "frames"), "--downsample", "32x16", "--patch-norm", "4", "--out",
               s(tmp / "img.json")}) == cli::kExitOk);
  const auto set = load_descriptors(tmp / "img.json");
  CHECK(set.size() == 10);
  CHECK(set[0].dim() == 512);

  fs::create_directories(tmp / "empty");
  CHECK(run({"ingest", "--images", s(tmp / "empty"), "--out", s(tmp / "e.json")}) == cli::kExitData);
  CHECK_FALSE(fs::exists(tmp / "e.json"));

  write_pgm(tmp / "odd/a.pgm", 30, 16, 1);
  CHECK(run({"ingest", "--images", s(tmp / "odd"), "--patch-norm", "4", "--out", s(tmp / "o.json")}) ==
        cli::kExitUsage);
  CHECK(run({"ingest", "--images", s(tmp / "frames"), "--downsample", "32by16", "--out", s(tmp / "x.json")}) ==
        cli::kExitUsage);
  testing::spit(tmp / "bad/a.pgm", "P2\n1 1\n255\n0\n");
  CHECK(run({"ingest", "--images", s(tmp / "bad"), "--out", s(tmp / "b.json")}) == cli::kExitData);
}

TEST_CASE("ingest Wi-Fi") {
  testing::TempDir tmp;
  testing::spit(tmp / "w.csv", "frame_index,ap_id,rssi\n0,2,-70\n0,7,-40\n2,1,-55\n");
  REQUIRE(run({"ingest", "--wifi", s(tmp / "w.csv"), "--ap-count", "10", "--out", s(tmp / "w.json")}) ==
          cli::kExitOk);
  const auto set = load_descriptors(tmp / "w.json");
  REQUIRE(set.size() == 3);
  CHECK(set[0].dim() == 10);
  CHECK(set[0].kind() == DescriptorKind::sparse);
  CHECK(set[0].value_at(7) == -40.0);
  CHECK(set[1].nonzero_count() == 0);

  REQUIRE(run({"ingest", "--wifi", s(tmp / "w.csv"), "--out", s(tmp / "w2.json")}) == cli::kExitOk);
  CHECK(load_descriptors(tmp / "w2.json")[0].dim() == 8);
  CHECK(run({"ingest", "--out", s(tmp / "n.json")}) == cli::kExitUsage);
}

TEST_CASE("synth writes a dataset") {
  testing::TempDir tmp;
  REQUIRE(run(synth_args(tmp / "d", 200)) == cli::kExitOk);
  CHECK(load_descriptors(tmp / "d/reference.json").size() == 200);
  CHECK(load_descriptors(tmp / "d/query.json").size() == 200);
  CHECK(load_ground_truth(tmp / "d/ground_truth.csv", 200).count_known() == 200);
  CHECK_FALSE(fs::exists(tmp / "d/shuffle_manifest.csv"));

  REQUIRE(run(synth_args(tmp / "again", 200)) == cli::kExitOk);
  CHECK(snapshot(tmp / "d") == snapshot(tmp / "again"));

  auto shuffled = synth_args(tmp / "s", 200);
  shuffled.push_back("--shuffle");
  REQUIRE(run(shuffled) == cli::kExitOk);
  CHECK(load_manifest(tmp / "s/shuffle_manifest.csv").size() == 200);

  REQUIRE(run({"synth", "--modality", "wifi", "--n", "300", "--out", s(tmp / "w")}) == cli::kExitOk);
  const auto refs = load_descriptors(tmp / "w/reference.json");
  CHECK(refs[0].dim() == 709);
  CHECK(refs[0].kind() == DescriptorKind::sparse);

  CHECK(run({"synth", "--n", "200", "--shuffle", "--min-frac", "0.001", "--out", s(tmp / "bad")}) == cli::kExitUsage);
  CHECK_FALSE(fs::exists(tmp / "bad"));
}

TEST_CASE("shuffle and its inverse") {
  testing::TempDir tmp;
  REQUIRE(run(synth_args(tmp / "d", 300)) == cli::kExitOk);
  REQUIRE(run({"shuffle", "--in", s(tmp / "d/query.json"), "--out", s(tmp / "s/query.json"), "--gt",
               s(tmp / "d/ground_truth.csv"), "--gt-out", s(tmp / "s/gt.csv"), "--manifest-out",
               s(tmp / "s/manifest.csv"), "--seed", "11"}) == cli::kExitOk);
  const auto perm = load_manifest(tmp / "s/manifest.csv");
  CHECK(perm == shuffle_traverse(300, kShuffleMinFrac, kShuffleMaxFrac, 11).perm);

  const auto orig = load_descriptors(tmp / "d/query.json");
  const auto moved = load_descriptors(tmp / "s/query.json");
  const auto gt = load_ground_truth(tmp / "d/ground_truth.csv", 300);
  const auto gt_moved = load_ground_truth(tmp / "s/gt.csv", 300);
  for (std::size_t k = 0; k < 300; ++k) {
    CHECK(moved[k] == orig[perm[k]]);
    CHECK(gt_moved.ref_index[k] == gt.ref_index[perm[k]]);
  }

  REQUIRE(run({"shuffle", "--in", s(tmp / "s/query.json"), "--out", s(tmp / "r/query.json"), "--inverse",
               s(tmp / "s/manifest.csv")}) == cli::kExitOk);
  for (const auto& [name, bytes] : snapshot(tmp / "r")) CHECK(bytes == testing::slurp(tmp / "d" / name));

  CHECK(run({"shuffle", "--in", s(tmp / "d/query.json"), "--out", s(tmp / "x/q.json")}) == cli::kExitUsage);
  CHECK_FALSE(fs::exists(tmp / "x"));
  testing::spit(tmp / "short.csv", "new_index,old_index\n0,1\n1,0\n");
  CHECK(run({"shuffle", "--in", s(tmp / "d/query.json"), "--out", s(tmp / "y/q.json"), "--inverse",
             s(tmp / "short.csv")}) == cli::kExitData);
}

TEST_CASE("localize modes") {
  testing::TempDir tmp;
  REQUIRE(run(synth_args(tmp / "d", 300)) == cli::kExitOk);
  const std::vector<std::string> src{"--ref", s(tmp / "d/reference.json"), "--query", s(tmp / "d/query.json")};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"localize"};
    args.insert(args.end(), src.begin(), src.end());
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };

  SUBCASE("fixed") {
    REQUIRE(run(with({"--mode", "fixed", "--L", "25", "--gt", s(tmp / "d/ground_truth.csv"), "--eval", "--out",
                      s(tmp / "f")})) == cli::kExitOk);
    CHECK(lines(testing::slurp(tmp / "f/matches.csv")).size() == 301);
    const auto report = nlohmann::json::parse(testing::slurp(tmp / "f/report.json"));
    CHECK(report["mode"] == "fixed");
    CHECK(report["n_frames"] == 300);
    CHECK(fs::exists(tmp / "f/pr_score.csv"));
  }
  SUBCASE("adaptive with curves and a cached matrix") {
    REQUIRE(run(with({"--mode", "adaptive", "--approx", "robust", "--l-max", "100", "--curves", "--save-matrix",
                      s(tmp / "m/matrix.json"), "--out", s(tmp / "a")})) == cli::kExitOk);
    const auto trace = testing::slurp(tmp / "a/trace.csv");
    CHECK(lines(trace).size() == 301);
    CHECK(fs::exists(tmp / "a/curves.csv"));
    REQUIRE(run({"localize", "--matrix", s(tmp / "m/matrix.json"), "--mode", "adaptive", "--approx", "robust",
                 "--l-max", "100", "--out", s(tmp / "b")}) == cli::kExitOk);
    CHECK(lines(testing::slurp(tmp / "b/trace.csv")).size() == 301);
  }
  SUBCASE("sweep emits seven fixed and four adaptive rows") {
    REQUIRE(run(with({"--mode", "sweep", "--l-max", "120", "--gt", s(tmp / "d/ground_truth.csv"), "--out",
                      s(tmp / "w1")})) == cli::kExitOk);
    const auto rows = lines(testing::slurp(tmp / "w1/summary.csv"));
    REQUIRE(rows.size() == 12);
    CHECK(rows[0] == "run,L,approx,mtl,auc,n_correct,n_frames");
    for (std::size_t k = 1; k <= 7; ++k) CHECK(rows[k].rfind("fixed,", 0) == 0);
    for (std::size_t k = 8; k <= 11; ++k) CHECK(rows[k].rfind("adaptive,,", 0) == 0);

    REQUIRE(run(with({"--mode", "sweep", "--l-max", "120", "--gt", s(tmp / "d/ground_truth.csv"), "--threads", "3",
                      "--out", s(tmp / "w2")})) == cli::kExitOk);
    CHECK(snapshot(tmp / "w1") == snapshot(tmp / "w2"));
  }
  SUBCASE("argument errors write nothing") {
    CHECK(run(with({"--mode", "sweep", "--out", s(tmp / "e1")})) == cli::kExitUsage);
    CHECK(run(with({"--mode", "fixed", "--L", "0", "--out", s(tmp / "e2")})) == cli::kExitUsage);
    CHECK(run(with({"--mode", "adaptive", "--l-min", "50", "--l-max", "20", "--out", s(tmp / "e3")})) ==
          cli::kExitUsage);
    CHECK(run(with({"--mode", "adaptive", "--approx", "cauchy", "--out", s(tmp / "e4")})) == cli::kExitUsage);
    CHECK(run(with({"--mode", "teleport", "--out", s(tmp / "e5")})) == cli::kExitUsage);
    CHECK(run({"localize", "--ref", s(tmp / "d/reference.json"), "--out", s(tmp / "e6")}) == cli::kExitUsage);
    for (const char* d : {"e1", "e2", "e3", "e4", "e5", "e6"}) CHECK_FALSE(fs::exists(tmp / d));
  }
  SUBCASE("dimension mismatch is a data error") {
    REQUIRE(run({"synth", "--n", "50", "--dim", "16", "--out", s(tmp / "small")}) == cli::kExitOk);
    CHECK(run({"localize", "--ref", s(tmp / "d/reference.json"), "--query", s(tmp / "small/query.json"), "--mode",
               "fixed", "--out", s(tmp / "mm")}) != cli::kExitOk);
    CHECK_FALSE(fs::exists(tmp / "mm"));
  }
}

TEST_CASE("config file with command-line precedence") {
  testing::TempDir tmp;
  REQUIRE(run(synth_args(tmp / "d", 150)) == cli::kExitOk);
  testing::spit(tmp / "run.ini", "[localize]\nmode=fixed\nL=40\n");
  REQUIRE(run({"--config", s(tmp / "run.ini"), "localize", "--ref", s(tmp / "d/reference.json"), "--query",
               s(tmp / "d/query.json"), "--L", "30", "--out", s(tmp / "o")}) == cli::kExitOk);
  const auto rows = lines(testing::slurp(tmp / "o/matches.csv"));
  CHECK(rows[30].find(",30,") != std::string::npos);
  CHECK(rows[29].find("no_hypothesis") != std::string::npos);
}

TEST_CASE("diag") {
  testing::TempDir tmp;
  REQUIRE(run({"synth", "--n", "800", "--seed", "5", "--out", s(tmp / "d")}) == cli::kExitOk);
  REQUIRE(run({"diag", "--ref", s(tmp / "d/reference.json"), "--query", s(tmp / "d/query.json"), "--l-max", "150",
               "--every", "25", "--out", s(tmp / "g")}) == cli::kExitOk);
  CHECK(lines(testing::slurp(tmp / "g/chosen_L.csv")).size() == 801);

  std::size_t sampled = 0, decreasing = 0;
  for (std::size_t i = 0; i < 800; i += 25) {
    const auto curve = lines(testing::slurp(tmp / ("g/pcurve_q" + std::to_string(i) + ".csv")));
    std::map<std::string, int> flagged;
    for (std::size_t k = 1; k < curve.size(); ++k) {
      const auto method = curve[k].substr(0, curve[k].find(','));
      flagged[method];
      if (curve[k].back() == '1') ++flagged[method];
    }
    if (i >= 9) {
      CHECK(flagged.size() == 4);
      for (const auto& [method, count] : flagged) CHECK(count == 1);
    }
    if (i < 150) continue;

    // Least-squares slope of std against L.
    const auto stats = read_csv(tmp / ("g/score_stats_q" + std::to_string(i) + ".csv"),
                                "L,mean,std,min,p_gaussian,p_robust,p_gmm2,p_gmm3");
    double sx = 0, sy = 0, sxy = 0;
    for (const auto& r : stats) {
      const double x = std::stod(r[0]), y = std::stod(r[2]);
      sx += x;
      sy += y;
      sxy += x * y;
    }
    const double n = static_cast<double>(stats.size());
    ++sampled;
    decreasing += n * sxy - sx * sy <= 0.0;
  }
  CHECK(static_cast<double>(decreasing) >= 0.95 * static_cast<double>(sampled));

  CHECK(run({"diag", "--ref", s(tmp / "d/reference.json"), "--query", s(tmp / "d/query.json"), "--frames", "900",
             "--out", s(tmp / "h")}) == cli::kExitUsage);
  CHECK_FALSE(fs::exists(tmp / "h"));
  testing::spit(tmp / "short_trace.csv", "query_index,chosen_L,best_ref,score,significance,status\n0,,,,,no_hypothesis\n");
  CHECK(run({"diag", "--ref", s(tmp / "d/reference.json"), "--query", s(tmp / "d/query.json"), "--frames", "10",
             "--trace", s(tmp / "short_trace.csv"), "--out", s(tmp / "k")}) == cli::kExitData);
  CHECK_FALSE(fs::exists(tmp / "k"));
}

TEST_CASE("help and unknown commands") {
  CHECK(run({"--help"}) == cli::kExitOk);
  CHECK(run({"localize", "--help"}) == cli::kExitOk);
  CHECK(run({"frobnicate"}) == cli::kExitUsage);
  CHECK(run({}) == cli::kExitUsage);
}
