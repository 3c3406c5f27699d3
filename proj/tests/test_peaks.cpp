// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "attnslice/peaks.hpp"

using namespace attnslice;

namespace {

// Brute-force DBSCAN used as an oracle: quadratic neighbor counts, core
// unions by transitive closure, border points to the nearest core (ties to
// the smaller value). No sorting tricks shared with the production code.
struct NaiveDb {
  std::vector<std::set<int>> clusters;
  std::set<int> noise;
};

NaiveDb naive_dbscan(const std::vector<int>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(pts[i] - pts[j]) <= eps) ++count;
    core[i] = count >= min_pts;
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (core[i] && core[j] && std::abs(pts[i] - pts[j]) <= eps) parent[find(i)] = find(j);

  std::vector<int> owner(n, -1);
  int next_id = 0;
  std::vector<int> root_id(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const std::size_t r = find(i);
    if (root_id[r] < 0) root_id[r] = next_id++;
    owner[i] = root_id[r];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = 0.0;
    int best_value = 0, chosen = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (!core[j]) continue;
      const double d = std::abs(pts[i] - pts[j]);
      if (d > eps) continue;
      if (chosen < 0 || d < best || (d == best && pts[j] < best_value)) {
        best = d;
        best_value = pts[j];
        chosen = owner[j];
      }
    }
    owner[i] = chosen;
  }

  NaiveDb out;
  out.clusters.assign(static_cast<std::size_t>(next_id), {});
  for (std::size_t i = 0; i < n; ++i) {
    if (owner[i] >= 0)
      out.clusters[static_cast<std::size_t>(owner[i])].insert(pts[i]);
    else
      out.noise.insert(pts[i]);
  }
  return out;
}

// Canonical form for comparing partitions: clusters as value sets sorted by
// their minimum.
std::vector<std::set<int>> canon(std::vector<std::set<int>> cs) {
  cs.erase(std::remove_if(cs.begin(), cs.end(), [](const auto& c) { return c.empty(); }),
           cs.end());
  std::sort(cs.begin(), cs.end(),
            [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
  return cs;
}

std::vector<std::set<int>> as_sets(const std::vector<std::vector<int>>& cs) {
  std::vector<std::set<int>> out;
  for (const auto& c : cs) out.emplace_back(c.begin(), c.end());
  return out;
}

// Sharp peak: mass `peak_mass` spread over [p0, p0+2], remainder uniform on
// [bg0, bg1].
Vec peaked_curve(std::size_t T, std::size_t p0, double peak_mass, std::size_t bg0,
                 std::size_t bg1) {
  Vec curve(T, 0.0);
  for (std::size_t i = 0; i < 3; ++i) curve[p0 + i] = peak_mass / 3.0;
  const double rest = (1.0 - peak_mass) / static_cast<double>(bg1 - bg0 + 1);
  for (std::size_t i = bg0; i <= bg1; ++i) curve[i] += rest;
  return curve;
}

}  // namespace

TEST_CASE("timestep sampling follows the curve") {
  SECTION("degenerate distribution puts every draw on one index") {
    const Vec curve = {1.0, 0.0, 0.0};
    Rng rng(1);
    for (int v : sample_timesteps(curve, 500, rng)) CHECK(v == 0);
  }

  SECTION("uniform curve gives binomial per-index frequencies") {
    const std::size_t T = 50;
    const Vec curve(T, 1.0 / static_cast<double>(T));
    const auto draws = sample_timesteps(curve, 100000, std::uint64_t{7});
    std::vector<int> count(T, 0);
    for (int v : draws) {
      REQUIRE(v >= 0);
      REQUIRE(v < static_cast<int>(T));
      ++count[static_cast<std::size_t>(v)];
    }
    const double expect = 100000.0 / static_cast<double>(T);
    const double sigma = std::sqrt(100000.0 * (1.0 / 50.0) * (49.0 / 50.0));
    for (std::size_t i = 0; i < T; ++i)
      CHECK(std::abs(count[i] - expect) <= 3.0 * sigma);
  }

  SECTION("two equal atoms split the draws evenly") {
    const Vec curve = {0.5, 0.5};
    const auto draws = sample_timesteps(curve, 10000, std::uint64_t{3});
    const auto zeros = std::count(draws.begin(), draws.end(), 0);
    const double sigma = std::sqrt(10000.0 * 0.25);
    CHECK(std::abs(static_cast<double>(zeros) - 5000.0) <= 3.0 * sigma);
  }

  SECTION("draws are sorted and deterministic in the seed") {
    const Vec curve = {0.2, 0.3, 0.1, 0.4};
    const auto a = sample_timesteps(curve, 1000, std::uint64_t{4});
    const auto b = sample_timesteps(curve, 1000, std::uint64_t{4});
    CHECK(a == b);
    CHECK(std::is_sorted(a.begin(), a.end()));
    const auto c = sample_timesteps(curve, 1000, std::uint64_t{5});
    CHECK(a != c);
  }

  SECTION("invalid curves are rejected") {
    Rng rng(6);
    CHECK_THROWS_AS(sample_timesteps(Vec{}, 100, rng), DataError);
    CHECK_THROWS_AS(sample_timesteps(Vec{0.5, -0.1}, 100, rng), DataError);
    CHECK_THROWS_AS(sample_timesteps(Vec{0.0, 0.0}, 100, rng), DataError);
  }
}

TEST_CASE("dbscan handles the textbook cases") {
  SECTION("one atom of 50 copies forms a single cluster") {
    const std::vector<int> pts(50, 10);
    const auto res = dbscan_1d(pts, 2.0, 5);
    REQUIRE(res.clusters.size() == 1);
    CHECK(res.clusters[0] == std::vector<int>{10});
    CHECK(res.noise.empty());
  }

  SECTION("isolated points are all noise") {
    std::vector<int> pts;
    for (int i = 0; i <= 100; i += 10) pts.push_back(i);
    const auto res = dbscan_1d(pts, 2.0, 2);
    CHECK(res.clusters.empty());
    CHECK(res.noise.size() == pts.size());
  }

  SECTION("multiplicity counts toward the core threshold") {
    // Three draws at 3 plus one at 4: both values see 4 neighbors.
    const std::vector<int> pts = {3, 3, 3, 4, 10};
    const auto res = dbscan_1d(pts, 1.0, 4);
    REQUIRE(res.clusters.size() == 1);
    CHECK(res.clusters[0] == std::vector<int>{3, 4});
    CHECK(res.noise == std::vector<int>{10});
  }

  SECTION("empty input") {
    const auto res = dbscan_1d({}, 2.0, 3);
    CHECK(res.clusters.empty());
    CHECK(res.noise.empty());
  }
}

TEST_CASE("dbscan matches the brute-force reference on random inputs") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.uniform_int(std::uint64_t{196});
    std::vector<int> pts(n);
    for (auto& p : pts) p = static_cast<int>(rng.uniform_int(std::uint64_t{101}));
    std::sort(pts.begin(), pts.end());
    const double eps = static_cast<double>(1 + rng.uniform_int(std::uint64_t{3}));
    const int min_pts = static_cast<int>(1 + rng.uniform_int(std::uint64_t{8}));

    const auto got = dbscan_1d(pts, eps, min_pts);
    const auto want = naive_dbscan(pts, eps, min_pts);

    INFO("trial " << trial << " n=" << n << " eps=" << eps << " min_pts=" << min_pts);
    CHECK(canon(as_sets(got.clusters)) == canon(want.clusters));
    CHECK(std::set<int>(got.noise.begin(), got.noise.end()) == want.noise);
  }
}

TEST_CASE("flat curves yield no slices") {
  PeakConfig cfg;
  int empty = 0;
  for (int s = 0; s < 100; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    const Vec uniform(100, 0.01);
    if (extract_slices(uniform, cfg).empty()) ++empty;
  }
  CHECK(empty >= 95);
}

TEST_CASE("a sharp peak becomes exactly one tight slice") {
  PeakConfig cfg;
  const Vec curve = peaked_curve(100, 30, 0.9, 60, 99);
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    cfg.seed = seed;
    const auto slices = extract_slices(curve, cfg);
    REQUIRE(slices.size() == 1);
    CHECK(slices[0].start_idx >= 30);
    CHECK(slices[0].end_idx <= 34);
    CHECK(slices[0].start_idx <= slices[0].end_idx);
    CHECK_THAT(slices[0].amplitude, Catch::Matchers::WithinAbs(0.3, 1e-12));
  }
}

TEST_CASE("two separated peaks give two disjoint slices") {
  PeakConfig cfg;
  cfg.seed = 11;
  Vec curve(100, 0.0);
  for (std::size_t i = 20; i <= 22; ++i) curve[i] = 0.15;
  for (std::size_t i = 70; i <= 72; ++i) curve[i] = 0.15;
  for (std::size_t i = 90; i <= 99; ++i) curve[i] = 0.01;
  const auto slices = extract_slices(curve, cfg);
  REQUIRE(slices.size() == 2);
  CHECK(slices[0].end_idx < slices[1].start_idx);
  CHECK(slices[0].start_idx >= 18);
  CHECK(slices[0].end_idx <= 24);
  CHECK(slices[1].start_idx >= 68);
  CHECK(slices[1].end_idx <= 74);
}

TEST_CASE("slices shorter than the minimum are dropped") {
  PeakConfig cfg;
  cfg.seed = 13;
  Vec curve(80, 0.0);
  curve[40] = 1.0;  // single-index cluster, extent length 1
  CHECK(extract_slices(curve, cfg).empty());

  cfg.min_slice_len = 1;
  const auto slices = extract_slices(curve, cfg);
  REQUIRE(slices.size() == 1);
  CHECK(slices[0].start_idx == 40);
  CHECK(slices[0].end_idx == 40);
}

TEST_CASE("extraction is deterministic and slices stay disjoint and in order") {
  PeakConfig cfg;
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t T = 60 + rng.uniform_int(std::uint64_t{200});
    Vec curve(T);
    for (auto& v : curve) v = rng.uniform();
    // Sprinkle a couple of strong peaks.
    for (int p = 0; p < 2; ++p) {
      const std::size_t at = rng.uniform_int(static_cast<std::uint64_t>(T - 3));
      for (std::size_t i = 0; i < 3; ++i) curve[at + i] += static_cast<double>(T) * 0.2;
    }
    double total = std::accumulate(curve.begin(), curve.end(), 0.0);
    for (auto& v : curve) v /= total;

    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto a = extract_slices(curve, cfg);
    const auto b = extract_slices(curve, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].start_idx == b[i].start_idx);
      CHECK(a[i].end_idx == b[i].end_idx);
      CHECK(a[i].amplitude == b[i].amplitude);
      CHECK(a[i].start_idx >= 0);
      CHECK(a[i].end_idx < static_cast<int>(T));
      CHECK(a[i].length() >= cfg.min_slice_len);
      CHECK(a[i].amplitude > 0.0);
      CHECK(a[i].amplitude <= 1.0);
      if (i > 0) CHECK(a[i].start_idx > a[i - 1].end_idx);
      double peak = 0.0;
      for (int t = a[i].start_idx; t <= a[i].end_idx; ++t)
        peak = std::max(peak, curve[static_cast<std::size_t>(t)]);
      CHECK(a[i].amplitude == peak);
    }
  }
}

TEST_CASE("boosting a detected peak never removes it") {
  PeakConfig cfg;
  Vec base(100, 0.0);
  for (std::size_t i = 20; i <= 22; ++i) base[i] = 0.15;
  for (std::size_t i = 70; i <= 72; ++i) base[i] = 0.15;
  for (std::size_t i = 90; i <= 99; ++i) base[i] = 0.01;

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto before = extract_slices(base, cfg);
    const auto covers_first_peak = [](const std::vector<Slice>& slices) {
      for (const auto& s : slices)
        if (s.start_idx <= 22 && s.end_idx >= 20) return true;
      return false;
    };
    REQUIRE(covers_first_peak(before));

    Vec boosted = base;
    for (std::size_t i = 20; i <= 22; ++i) boosted[i] *= 1.5;
    const double total = std::accumulate(boosted.begin(), boosted.end(), 0.0);
    for (auto& v : boosted) v /= total;
    CHECK(covers_first_peak(extract_slices(boosted, cfg)));
  }
}

TEST_CASE("principal slice picks the highest amplitude, earliest on ties") {
  CHECK_FALSE(principal_slice({}).has_value());

  std::vector<Slice> slices(3);
  slices[0] = {"a", SliceKind::attention, 10, 14, 0.2};
  slices[1] = {"a", SliceKind::attention, 30, 34, 0.5};
  slices[2] = {"a", SliceKind::attention, 50, 52, 0.4};
  auto p = principal_slice(slices);
  REQUIRE(p.has_value());
  CHECK(p->start_idx == 30);

  slices[2].amplitude = 0.5;  // tie with the slice at 30
  p = principal_slice(slices);
  REQUIRE(p.has_value());
  CHECK(p->start_idx == 30);

  std::swap(slices[1], slices[2]);  // order in the list must not matter
  p = principal_slice(slices);
  REQUIRE(p.has_value());
  CHECK(p->start_idx == 30);
}

TEST_CASE("core threshold scales against the uniform density") {
  PeakConfig cfg;
  CHECK(cfg.resolved_min_pts(100) == 308);  // ceil(3 * 5 * 2048 / 100)
  CHECK(cfg.resolved_min_pts(1000) == 31);  // ceil(30.72)
  cfg.min_pts_abs = 42;
  CHECK(cfg.resolved_min_pts(100) == 42);

  PeakConfig bad;
  bad.min_pts_scale = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = PeakConfig{};
  bad.n_draws = 50;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = PeakConfig{};
  bad.eps = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("per-answer extraction derives its seed from the answer id") {
  PeakConfig cfg;
  const Vec curve = peaked_curve(100, 30, 0.9, 60, 99);
  const auto a1 = extract_slices_for_answer(curve, "a0001", cfg);
  const auto a2 = extract_slices_for_answer(curve, "a0001", cfg);
  REQUIRE_FALSE(a1.empty());
  REQUIRE(a1.size() == a2.size());
  for (std::size_t i = 0; i < a1.size(); ++i) {
    CHECK(a1[i].answer_id == "a0001");
    CHECK(a1[i].start_idx == a2[i].start_idx);
    CHECK(a1[i].end_idx == a2[i].end_idx);
  }
  // A different answer id reseeds the draws; the peak is still found.
  const auto b = extract_slices_for_answer(curve, "a0002", cfg);
  REQUIRE_FALSE(b.empty());
  CHECK(b[0].answer_id == "a0002");
}
