#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "seqloc/difference_matrix.hpp"
#include "seqloc/error.hpp"
#include "seqloc/window_matcher.hpp"

using namespace seqloc;

namespace {

std::vector<Descriptor> random_dense(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Descriptor> out;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    out.push_back(Descriptor::dense(v));
  }
  return out;
}

}  // namespace

TEST_CASE("build_row standardizes by the population statistics") {
  std::vector<double> raw{2, 4, 6};
  const auto st = standardize_row(raw);
  CHECK(st.mean == doctest::Approx(4.0));
  CHECK(st.sigma == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(raw[0] == doctest::Approx(-1.224744871391589));
  CHECK(raw[1] == doctest::Approx(0.0));
  CHECK(raw[2] == doctest::Approx(1.224744871391589));
}

TEST_CASE("degenerate rows become zeros") {
  const auto q = Descriptor::dense({1, 2, 3});
  std::vector<Descriptor> same(4, q);
  const auto row = build_row(q, same, DifferenceOp::sad);
  CHECK(row.stats.sigma == 0.0);
  for (double v : row.values) CHECK(v == 0.0);

  std::vector<Descriptor> one{Descriptor::dense({5, 5, 5})};
  const auto single = build_row(q, one, DifferenceOp::sad);
  CHECK(single.values == std::vector<double>{0.0});
}

TEST_CASE("build_row rejects empty references and dimension mismatches") {
  const auto q = Descriptor::dense({1, 2});
  CHECK_THROWS_AS(build_row(q, std::vector<Descriptor>{}, DifferenceOp::sad), ArgumentError);
  std::vector<Descriptor> refs{Descriptor::dense({1, 2, 3})};
  CHECK_THROWS_AS(build_row(q, refs, DifferenceOp::sad), ArgumentError);
}

TEST_CASE("build matches a naive double loop") {
  const auto refs = random_dense(80, 6, 1);
  const auto queries = random_dense(50, 6, 2);
  const auto m = build(queries, refs, DifferenceOp::sad);
  REQUIRE(m.n_query() == 50);
  REQUIRE(m.n_ref() == 80);
  for (std::size_t i = 0; i < 50; ++i) {
    std::vector<double> raw(80);
    for (std::size_t j = 0; j < 80; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 6; ++k) s += std::abs(queries[i].values()[k] - refs[j].values()[k]);
      raw[j] = s;
    }
    const double mu = testing::pop_mean(raw);
    const double sd = testing::pop_sd(raw);
    for (std::size_t j = 0; j < 80; ++j) CHECK(std::abs(m.at(i, j) - (raw[j] - mu) / sd) <= 1e-9);
  }
}

TEST_CASE("self-match puts each row minimum on the diagonal") {
  const auto frames = random_dense(30, 8, 3);
  const auto m = build(frames, frames, DifferenceOp::sad);
  for (std::size_t i = 0; i < 30; ++i) {
    const auto row = m.row(i);
    CHECK(*std::min_element(row.begin(), row.end()) == m.at(i, i));
  }
}

TEST_CASE("rows are standardized and build equals the append fold") {
  const auto refs = random_dense(40, 5, 4);
  const auto queries = random_dense(25, 5, 5);
  const auto m = build(queries, refs, DifferenceOp::cosine, 3);
  DifferenceMatrix folded;
  for (const auto& q : queries) folded = append_row(std::move(folded), q, refs, DifferenceOp::cosine);
  CHECK(folded == m);
  CHECK(build(queries, refs, DifferenceOp::cosine, 1) == m);

  for (std::size_t i = 0; i < m.n_query(); ++i) {
    const std::vector<double> row(m.row(i).begin(), m.row(i).end());
    CHECK(std::abs(testing::pop_mean(row)) <= 1e-6);
    CHECK(std::abs(testing::pop_sd(row) - 1.0) <= 1e-6);
  }

  std::vector<Descriptor> one{queries[0]};
  CHECK(build(one, refs, DifferenceOp::cosine).row(0)[0] == build_row(queries[0], refs, DifferenceOp::cosine).values[0]);
  const auto dup = append_row(m, queries.back(), refs, DifferenceOp::cosine);
  CHECK(std::equal(dup.row(25).begin(), dup.row(25).end(), m.row(24).begin()));
}

TEST_CASE("permuting the references permutes each row") {
  const auto refs = random_dense(20, 4, 6);
  const auto queries = random_dense(5, 4, 7);
  std::vector<std::size_t> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::vector<Descriptor> shuffled;
  for (auto k : perm) shuffled.push_back(refs[k]);
  const auto a = build(queries, refs, DifferenceOp::sad);
  const auto b = build(queries, shuffled, DifferenceOp::sad);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.row_stats(i).mean == doctest::Approx(b.row_stats(i).mean).epsilon(1e-12));
    CHECK(a.row_stats(i).sigma == doctest::Approx(b.row_stats(i).sigma).epsilon(1e-12));
    for (std::size_t j = 0; j < 20; ++j) CHECK(b.at(i, j) == doctest::Approx(a.at(i, perm[j])).epsilon(1e-12));
  }
}

TEST_CASE("matrix cache round-trips through float32") {
  testing::TempDir tmp;
  const auto m = build(random_dense(6, 3, 8), random_dense(9, 3, 9), DifferenceOp::sad);
  save_matrix(tmp / "m.json", m);
  const auto back = load_matrix(tmp / "m.json");
  REQUIRE(back.n_query() == 6);
  REQUIRE(back.n_ref() == 9);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(back.row_stats(i).mean == m.row_stats(i).mean);
    for (std::size_t j = 0; j < 9; ++j) CHECK(back.at(i, j) == static_cast<double>(static_cast<float>(m.at(i, j))));
  }
}

TEST_CASE("prefix field examples") {
  const auto one = PrefixField::build(testing::raw_matrix({{3.5}}));
  CHECK(one.at(0, 0) == 3.5);
  const auto p = PrefixField::build(testing::raw_matrix({{1, 2}, {3, 4}}));
  CHECK(p.at(0, 0) == 1);
  CHECK(p.at(0, 1) == 2);
  CHECK(p.at(1, 0) == 3);
  CHECK(p.at(1, 1) == 5);
}

TEST_CASE("window scores equal naive sums on random matrices") {
  const auto m = testing::random_matrix(30, 30, 10);
  const auto p = PrefixField::build(m);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 30; ++j) {
      for (std::size_t L = 1; L <= std::min(i, j) + 1; ++L) {
        CHECK(std::abs(window_score(p, i, j, L) - testing::naive_window(m, i, j, L)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("window_score examples and errors") {
  const auto m = testing::raw_matrix({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  const auto p = PrefixField::build(m);
  CHECK(window_score(p, 2, 2, 3) == doctest::Approx(5.0));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(window_score(p, i, j, 1) == m.at(i, j));
  }
  CHECK_THROWS_AS(window_score(p, 1, 2, 3), ArgumentError);
  CHECK_THROWS_AS(window_score(p, 2, 1, 3), ArgumentError);
  CHECK_THROWS_AS(window_score(p, 2, 2, 0), ArgumentError);
  CHECK_THROWS_AS(window_score(p, 3, 2, 1), ArgumentError);

  const auto c = PrefixField::build(testing::raw_matrix(std::vector<std::vector<double>>(6, std::vector<double>(6, 0.75))));
  for (std::size_t L = 1; L <= 6; ++L) CHECK(window_score(c, 5, 5, L) == doctest::Approx(0.75));
}

TEST_CASE("score_row covers j = L-1 .. n_ref-1") {
  const auto m = testing::random_matrix(12, 15, 11);
  const auto p = PrefixField::build(m);
  const auto row = score_row(p, 9, 4);
  REQUIRE(row.size() == 12);
  for (std::size_t k = 0; k < row.size(); ++k) CHECK(row[k] == window_score(p, 9, k + 3, 4));
  CHECK(score_row(p, 11, 12).size() == 4);
  const auto p2 = PrefixField::build(testing::random_matrix(20, 15, 12));
  CHECK(score_row(p2, 19, 15).size() == 1);
  CHECK_THROWS_AS(score_row(p, 2, 4), ArgumentError);
}

TEST_CASE("a planted zero diagonal gives the row minimum") {
  auto m0 = testing::random_matrix(40, 60, 13);
  std::vector<std::vector<double>> rows(40, std::vector<double>(60));
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 60; ++j) rows[i][j] = std::abs(m0.at(i, j)) + 0.1;
  }
  for (std::size_t k = 0; k < 12; ++k) rows[35 - k][47 - k] = 0.0;
  const auto p = PrefixField::build(testing::raw_matrix(rows));
  for (std::size_t L : {1, 5, 12}) {
    const auto row = score_row(p, 35, L);
    const auto best = static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin()) + L - 1;
    CHECK(best == 47);
  }
}

TEST_CASE("incremental prefix field equals batch") {
  const auto m = testing::random_matrix(15, 10, 14);
  PrefixField inc(10);
  for (std::size_t i = 0; i < 15; ++i) inc.append_row(m.row(i));
  const auto batch = PrefixField::build(m);
  for (std::size_t i = 0; i < 15; ++i) {
    for (std::size_t j = 0; j < 10; ++j) CHECK(inc.at(i, j) == batch.at(i, j));
  }
}

TEST_CASE("fixed_localize") {
  const auto frames = random_dense(40, 8, 15);
  const auto m = build(frames, frames, DifferenceOp::sad);

  SUBCASE("L=1 on a self-match is the identity") {
    for (const auto& r : fixed_localize(m, 1)) {
      CHECK(r.has_hypothesis());
      CHECK(r.best_ref == r.query_index);
    }
  }
  SUBCASE("first L-1 frames have no hypothesis") {
    const auto res = fixed_localize(m, 10, 2);
    for (std::size_t i = 0; i < 40; ++i) CHECK(res[i].has_hypothesis() == (i >= 9));
    CHECK(res[20].window_len == 10);
    CHECK(res[20].significance == 1.0);
    CHECK(res == fixed_localize(m, 10, 1));
  }
  SUBCASE("L beyond n_ref warns and yields nothing") {
    testing::WarningCapture w;
    for (const auto& r : fixed_localize(m, 41)) CHECK_FALSE(r.has_hypothesis());
    CHECK(w.count >= 1);
  }
  SUBCASE("ties go to the smallest j") {
    const auto flat = testing::raw_matrix(std::vector<std::vector<double>>(5, std::vector<double>(7, 0.0)));
    for (const auto& r : fixed_localize(flat, 2)) {
      if (r.has_hypothesis()) CHECK(r.best_ref == 1);
    }
  }
  SUBCASE("hypotheses respect the window bounds") {
    for (std::size_t L : kSweepWindowLengths) {
      for (const auto& r : fixed_localize(m, L)) {
        if (!r.has_hypothesis()) continue;
        CHECK(r.best_ref >= r.window_len - 1);
        CHECK(r.best_ref <= m.n_ref() - 1);
        CHECK(r.query_index >= r.window_len - 1);
      }
    }
  }
}

TEST_CASE("the sweep set") {
  CHECK(std::vector<std::size_t>(std::begin(kSweepWindowLengths), std::end(kSweepWindowLengths)) ==
        std::vector<std::size_t>{10, 25, 50, 100, 200, 350, 500});
}

TEST_CASE("match_csv layout") {
  LocalizationResult a;
  a.query_index = 0;
  LocalizationResult b;
  b.query_index = 1;
  b.best_ref = 7;
  b.window_len = 2;
  b.score = -0.125;
  b.status = MatchStatus::hypothesis;
  std::vector<LocalizationResult> rs{a, b};
  CHECK(match_csv(rs) ==
        "query_index,best_ref,window_len,score,significance,status\n"
        "0,,,,,no_hypothesis\n"
        "1,7,2,-0.125,1,hypothesis\n");
}
