// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "attnslice/slices.hpp"

using namespace attnslice;

namespace {

// Upper chi-squared quantile via the Wilson-Hilferty cube approximation.
double chi2_quantile(double df, double z_upper) {
  const double a = 2.0 / (9.0 * df);
  const double c = 1.0 - a + z_upper * std::sqrt(a);
  return df * c * c * c;
}

Slice make_slice(int start, int end, const char* id = "a") {
  Slice s;
  s.answer_id = id;
  s.start_idx = start;
  s.end_idx = end;
  return s;
}

}  // namespace

TEST_CASE("z-normalization fixes mean and scale per channel") {
  SECTION("hand-checked values") {
    Matrix m(2, 2);
    m.at(0, 0) = 0.0;
    m.at(1, 0) = 2.0;
    m.at(0, 1) = 5.0;  // constant channel
    m.at(1, 1) = 5.0;
    const Matrix z = znormalize(m);
    CHECK(z.at(0, 0) == Catch::Approx(-1.0));  // population std of {0,2} is 1
    CHECK(z.at(1, 0) == Catch::Approx(1.0));
    CHECK(z.at(0, 1) == 0.0);
    CHECK(z.at(1, 1) == 0.0);
  }

  SECTION("random channels come out standardized") {
    Rng rng(5);
    Matrix m(200, 4);
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double mu = rng.uniform(-10.0, 10.0);
      const double sd = rng.uniform(0.5, 5.0);
      for (std::size_t t = 0; t < m.rows; ++t) m.at(t, c) = rng.normal(mu, sd);
    }
    const Matrix z = znormalize(m);
    for (std::size_t c = 0; c < m.cols; ++c) {
      double mean = 0.0;
      for (std::size_t t = 0; t < z.rows; ++t) mean += z.at(t, c);
      mean /= static_cast<double>(z.rows);
      double var = 0.0;
      for (std::size_t t = 0; t < z.rows; ++t) {
        const double d = z.at(t, c) - mean;
        var += d * d;
      }
      var /= static_cast<double>(z.rows);
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("slice features follow the arithmetic examples") {
  Matrix m(4, 2);
  // channel 0 rows 0..2: [1, 2, 3]; channel 1 rows 0..2: [3, 1, 2]
  m.at(0, 0) = 1;
  m.at(1, 0) = 2;
  m.at(2, 0) = 3;
  m.at(0, 1) = 3;
  m.at(1, 1) = 1;
  m.at(2, 1) = 2;
  m.at(3, 0) = 99;  // outside the slice, must not matter
  m.at(3, 1) = 99;

  const auto f = featurize_slice(m, make_slice(0, 2));
  REQUIRE(f.size() == 6);
  CHECK(f[0] == Catch::Approx(2.0));   // mean of [1,2,3]
  CHECK(f[1] == Catch::Approx(1.0));   // both gradients +1
  CHECK(f[2] == Catch::Approx(0.0));   // no negative gradients
  CHECK(f[3] == Catch::Approx(2.0));   // mean of [3,1,2]
  CHECK(f[4] == Catch::Approx(1.0));   // one +1 gradient
  CHECK(f[5] == Catch::Approx(-2.0));  // one -2 gradient

  SECTION("length-1 slice zeroes the gradient features") {
    Matrix one(3, 1);
    one.at(1, 0) = 5.0;
    const auto g = featurize_slice(one, make_slice(1, 1));
    CHECK(g[0] == Catch::Approx(5.0));
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 0.0);
  }

  SECTION("gradient feature signs are invariant properties") {
    Rng rng(6);
    Matrix x(50, 3);
    for (double& v : x.a) v = rng.normal();
    const auto h = featurize_slice(x, make_slice(10, 30));
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(h[3 * c + 1] >= 0.0);
      CHECK(h[3 * c + 2] <= 0.0);
    }
  }

  SECTION("out-of-bounds slices are rejected") {
    Matrix x(5, 1);
    CHECK_THROWS_AS(featurize_slice(x, make_slice(3, 5)), DataError);
    CHECK_THROWS_AS(featurize_slice(x, make_slice(-1, 2)), DataError);
  }
}

TEST_CASE("featurized values ignore affine rescaling of raw channels") {
  Rng rng(7);
  Matrix raw(120, 3);
  for (double& v : raw.a) v = rng.normal(2.0, 3.0);
  Matrix scaled(120, 3);
  const double a[3] = {3.7, 0.25, 12.0};
  const double b[3] = {-2.0, 5.0, 0.001};
  for (std::size_t t = 0; t < raw.rows; ++t)
    for (std::size_t c = 0; c < raw.cols; ++c) scaled.at(t, c) = a[c] * raw.at(t, c) + b[c];

  const auto f1 = featurize_slice(znormalize(raw), make_slice(20, 60));
  const auto f2 = featurize_slice(znormalize(scaled), make_slice(20, 60));
  REQUIRE(f1.size() == f2.size());
  for (std::size_t i = 0; i < f1.size(); ++i)
    CHECK_THAT(f2[i], Catch::Matchers::WithinAbs(f1[i], 1e-9));
}

TEST_CASE("random slices avoid the principal and keep its duration") {
  SECTION("uniform curve gives uniform starts over the allowed range") {
    const std::size_t T = 100;
    const Vec curve(T, 1.0 / static_cast<double>(T));
    const Slice principal = make_slice(0, 3);
    Rng rng(8);
    std::map<int, int> counts;
    const int n = 2500;  // 4 slices per call
    for (int i = 0; i < n; ++i)
      for (const auto& s : sample_random_slices(curve, principal, 4, rng)) {
        CHECK(s.length() == principal.length());
        CHECK(s.kind == SliceKind::random);
        ++counts[s.start_idx];
      }
    // Starts 0 and 1 overlap the principal by more than half and must be
    // rejected; 2..96 are allowed.
    CHECK(counts.count(0) == 0);
    CHECK(counts.count(1) == 0);
    const double expected = 4.0 * n / 95.0;
    double chi2 = 0.0;
    for (int s = 2; s <= 96; ++s) {
      const double o = static_cast<double>(counts.count(s) ? counts.at(s) : 0);
      chi2 += (o - expected) * (o - expected) / expected;
    }
    CHECK(chi2 < chi2_quantile(94.0, 2.326));  // 0.01 upper tail
  }

  SECTION("high-attention region is avoided") {
    const std::size_t T = 100;
    Vec curve(T, 0.01 / 94.0);
    for (std::size_t t = 40; t <= 45; ++t) curve[t] = 0.99 / 6.0;
    const Slice principal = make_slice(40, 45);
    Rng rng(9);
    int inside = 0, total = 0;
    for (int i = 0; i < 2500; ++i)
      for (const auto& s : sample_random_slices(curve, principal, 4, rng)) {
        ++total;
        if (s.start_idx >= 40 && s.start_idx <= 45) ++inside;
      }
    CHECK(total == 10000);
    CHECK(inside < total / 20);
  }

  SECTION("deterministic given the generator state") {
    const Vec curve(50, 0.02);
    const Slice principal = make_slice(10, 14);
    Rng r1(10), r2(10);
    const auto a = sample_random_slices(curve, principal, 4, r1);
    const auto b = sample_random_slices(curve, principal, 4, r2);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i].start_idx == b[i].start_idx);
  }

  SECTION("window longer than the answer is an error") {
    const Vec curve(5, 0.2);
    Rng rng(11);
    CHECK_THROWS_AS(sample_random_slices(curve, make_slice(0, 9), 4, rng), DataError);
  }
}

TEST_CASE("slice dataset pairs one attention row with four random rows") {
  GeneratorConfig gen;
  gen.n_answers = 60;
  gen.t_min = 60;
  gen.t_max = 120;
  gen.seed = 21;
  const Corpus corpus = generate_corpus(gen);

  // Inject synthetic attention: a sharp peak in the middle of every answer,
  // except answers whose id ends in '3', which get a flat (peakless) curve.
  const auto profile_of = [](const Answer& a) {
    const std::size_t T = static_cast<std::size_t>(a.num_frames());
    Vec curve(T, 0.0);
    if (a.answer_id.back() == '3') {
      curve.assign(T, 1.0 / static_cast<double>(T));
      return curve;
    }
    const std::size_t mid = T / 2;
    curve[mid - 1] = 0.3;
    curve[mid] = 0.3;
    curve[mid + 1] = 0.3;
    const double rest = 0.1 / static_cast<double>(T - 3);
    for (std::size_t t = 0; t < T; ++t)
      if (t < mid - 1 || t > mid + 1) curve[t] = rest;
    return curve;
  };

  PeakConfig pk;
  const SliceDataset ds = build_slice_dataset(corpus, profile_of, pk, 99);

  int flat = 0;
  for (const auto& a : corpus.answers)
    if (a.answer_id.back() == '3') ++flat;
  CHECK(ds.skipped_answers == flat);
  CHECK(ds.rows.size() == 5 * (corpus.answers.size() - static_cast<std::size_t>(flat)));
  REQUIRE(ds.feature_names.size() == 3 * corpus.schema.size());
  CHECK(ds.feature_names[0] == corpus.schema.names[0] + "_mean");
  CHECK(ds.feature_names[1] == corpus.schema.names[0] + "_up");
  CHECK(ds.feature_names[2] == corpus.schema.names[0] + "_down");

  // Grouped by answer, attention first, then 4 duration-matched randoms;
  // answer ids ascend.
  for (std::size_t i = 0; i < ds.rows.size(); i += 5) {
    const auto& attn = ds.rows[i];
    CHECK(attn.kind_label == 1);
    CHECK(attn.slice.kind == SliceKind::attention);
    if (i > 0) CHECK(ds.rows[i - 1].answer_id < attn.answer_id);
    const Answer* a = corpus.find(attn.answer_id);
    REQUIRE(a != nullptr);
    CHECK(attn.hirability_label == a->label);
    CHECK(attn.split == corpus.split_of(attn.answer_id));
    for (std::size_t j = 1; j < 5; ++j) {
      const auto& rnd = ds.rows[i + j];
      CHECK(rnd.answer_id == attn.answer_id);
      CHECK(rnd.kind_label == 0);
      CHECK(rnd.hirability_label == a->label);
      CHECK(rnd.slice.length() == attn.slice.length());
    }
  }

  SECTION("dataset build is deterministic") {
    const SliceDataset again = build_slice_dataset(corpus, profile_of, pk, 99);
    REQUIRE(again.rows.size() == ds.rows.size());
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      CHECK(again.rows[i].answer_id == ds.rows[i].answer_id);
      CHECK(again.rows[i].slice.start_idx == ds.rows[i].slice.start_idx);
      CHECK(again.rows[i].features == ds.rows[i].features);
    }
  }

  SECTION("csv round-trip preserves every row") {
    const std::string path = "attnslice_test_slices.csv";
    save_slice_dataset(ds, path);
    const SliceDataset back = load_slice_dataset(path);
    CHECK(back.feature_names == ds.feature_names);
    REQUIRE(back.rows.size() == ds.rows.size());
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      CHECK(back.rows[i].answer_id == ds.rows[i].answer_id);
      CHECK(back.rows[i].split == ds.rows[i].split);
      CHECK(back.rows[i].kind_label == ds.rows[i].kind_label);
      CHECK(back.rows[i].hirability_label == ds.rows[i].hirability_label);
      CHECK(back.rows[i].slice.start_idx == ds.rows[i].slice.start_idx);
      CHECK(back.rows[i].slice.end_idx == ds.rows[i].slice.end_idx);
      CHECK(back.rows[i].slice.amplitude == ds.rows[i].slice.amplitude);
      CHECK(back.rows[i].features == ds.rows[i].features);  // exact round-trip
    }
    std::remove(path.c_str());
  }

  SECTION("split matrices carry the right rows") {
    const SliceMatrix train = slice_matrix(ds, Split::train);
    CHECK(train.x.rows == ds.rows_in(Split::train).size());
    CHECK(train.x.cols == ds.feature_names.size());
    CHECK(train.kind.size() == train.x.rows);
    int attn_rows = 0;
    for (int k : train.kind) attn_rows += k;
    CHECK(attn_rows * 4 == static_cast<int>(train.kind.size()) - attn_rows);
  }

  SECTION("malformed csv lines report their location") {
    const std::string path = "attnslice_test_badslices.csv";
    {
      std::ofstream out(path);
      out << "f_mean,kind_label,hirability_label,answer_id,split,start_idx,end_idx,amplitude\n";
      out << "0.5,1,0,a1,train,3,7,0.4\n";
      out << "0.5,1,0,a2,nowhere,3,7,0.4\n";
    }
    try {
      load_slice_dataset(path);
      FAIL("expected a data error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::remove(path.c_str());
  }
}
