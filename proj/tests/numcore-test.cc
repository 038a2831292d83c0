// tests/numcore-test.cc

// Copyright 2026  tdnnas contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <set>

#include "doctest.h"
#include "tdnnas/bigcount.h"
#include "tdnnas/numeric.h"
#include "tdnnas/optim.h"
#include "tdnnas/rng.h"
#include "test-util.h"

using namespace tdnnas;
using tdnnas_test::ChiSquare99;

TEST_SUITE_BEGIN("numcore");

TEST_CASE("softmax uniform on equal logits") {
  const auto p = Softmax({0.0, 0.0, 0.0, 0.0});
  for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("softmax analytic two-class value") {
  const auto p = Softmax({std::log(2.0), 0.0});
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax is stabilized against large logits") {
  const auto p = Softmax({1000.0, 0.0});
  CHECK(std::isfinite(p[0]));
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[1] < 1e-300);
}

TEST_CASE("softmax rejects empty input") {
  CHECK_THROWS_WITH_AS(Softmax({}), "empty logits", std::invalid_argument);
}

TEST_CASE("softmax output is a simplex for random inputs") {
  Rng rng(7, 0);
  for (int trial = 0; trial < 200; trial++) {
    std::vector<double> logits(1 + rng.UniformInt(8));
    for (double &v : logits) v = 20.0 * (rng.Uniform01() - 0.5);
    const auto p = Softmax(logits);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum >= 1.0 - 1e-12);
    CHECK(sum <= 1.0 + 1e-12);
  }
}

TEST_CASE("gumbel transform of u=0.5") {
  CHECK(GumbelFromUniform(0.5) == doctest::Approx(0.3665129205816643).epsilon(1e-12));
}

TEST_CASE("gumbel sample with zero noise reduces to softmax") {
  const std::vector<double> log_alpha = {0.4, -1.0, 0.2};
  const auto direct = Softmax(log_alpha);
  const auto sampled = GumbelSoftmaxFromNoise(log_alpha, {0.0, 0.0, 0.0}, 1.0);
  for (size_t i = 0; i < direct.size(); i++) {
    CHECK(sampled[i] == doctest::Approx(direct[i]).epsilon(1e-14));
  }
}

TEST_CASE("gumbel sample rejects non-positive temperature") {
  Rng rng(1, 1);
  CHECK_THROWS_WITH_AS(GumbelSoftmaxSample({0.0, 0.0}, 0.0, &rng),
                       "invalid temperature", std::invalid_argument);
  CHECK_THROWS_AS(GumbelSoftmaxSample({0.0, 0.0}, -0.5, &rng), std::invalid_argument);
}

TEST_CASE("gumbel argmax is invariant to temperature") {
  const std::vector<double> log_alpha = {0.3, -0.7, 1.1, 0.0};
  Rng rng(42, rngstream::kGumbel);
  for (int trial = 0; trial < 500; trial++) {
    std::vector<double> noise(log_alpha.size());
    for (double &g : noise) g = GumbelFromUniform(rng.Uniform01());
    int ref = -1;
    for (double t : {1.0, 0.31, 0.03}) {
      const auto lam = GumbelSoftmaxFromNoise(log_alpha, noise, t);
      int arg = 0;
      for (size_t i = 1; i < lam.size(); i++) {
        if (lam[i] > lam[arg]) arg = static_cast<int>(i);
      }
      if (ref < 0) ref = arg;
      CHECK(arg == ref);
    }
  }
}

TEST_CASE("gumbel-max argmax frequencies follow softmax probabilities") {
  const std::vector<double> log_alpha = {0.5, 0.0, -0.5, 1.0};
  const auto p = Softmax(log_alpha);
  const int n = 10000;
  Rng rng(2026, rngstream::kGumbel);
  std::vector<int> counts(p.size(), 0);
  for (int s = 0; s < n; s++) {
    const auto lam = GumbelSoftmaxSample(log_alpha, 0.5, &rng);
    int arg = 0;
    for (size_t i = 1; i < lam.size(); i++) {
      if (lam[i] > lam[arg]) arg = static_cast<int>(i);
    }
    counts[arg]++;
  }
  double chi2 = 0.0;
  for (size_t i = 0; i < p.size(); i++) {
    const double expected = n * p[i];
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  CHECK(chi2 < ChiSquare99(static_cast<int>(p.size()) - 1));
}

TEST_CASE("gumbel samples sharpen as temperature drops") {
  const std::vector<double> log_alpha = {0.3, -0.2, 0.8};
  Rng rng(11, rngstream::kGumbel);
  double h_warm = 0.0, h_cold = 0.0;
  for (int s = 0; s < 1000; s++) {
    std::vector<double> noise(log_alpha.size());
    for (double &g : noise) g = GumbelFromUniform(rng.Uniform01());
    h_warm += Entropy(GumbelSoftmaxFromNoise(log_alpha, noise, 1.0));
    h_cold += Entropy(GumbelSoftmaxFromNoise(log_alpha, noise, 0.03));
  }
  CHECK(h_cold / 1000.0 < h_warm / 1000.0);
}

TEST_CASE("sgd step basic updates") {
  Matrix p(1, 1), g(1, 1), v(1, 1);
  g(0, 0) = 1.0;
  SgdStep(&p, g, &v, 1.0, 0.0);
  CHECK(p(0, 0) == doctest::Approx(-1.0));

  Matrix p2(2, 2), g2(2, 2), v2(2, 2);
  p2(0, 0) = 3.0;
  SgdStep(&p2, g2, &v2, 0.1, 0.9);
  CHECK(p2(0, 0) == 3.0);  // zero grads, zero velocity: unchanged

  Matrix p3(1, 1), g3(1, 1), v3(1, 1);
  g3(0, 0) = 1.0;
  SgdStep(&p3, g3, &v3, 0.1, 0.9);
  CHECK(p3(0, 0) == doctest::Approx(-0.1).epsilon(1e-15));
  SgdStep(&p3, g3, &v3, 0.1, 0.9);
  CHECK(p3(0, 0) == doctest::Approx(-0.29).epsilon(1e-15));
}

TEST_CASE("sgd step rejects shape mismatch") {
  Matrix p(2, 1), g(1, 2), v(2, 1);
  CHECK_THROWS_AS(SgdStep(&p, g, &v, 0.1, 0.9), std::invalid_argument);
}

TEST_CASE("finite differences of a quadratic") {
  Matrix p(1, 1);
  p(0, 0) = 3.0;
  const auto loss = [&p]() { return p(0, 0) * p(0, 0); };
  const Matrix g = FiniteDiffGrad(loss, &p, 1e-5);
  CHECK(g(0, 0) == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(p(0, 0) == 3.0);  // restored
}

TEST_CASE("finite differences of a constant are zero") {
  Matrix p(2, 3);
  const auto loss = []() { return 1.5; };
  const Matrix g = FiniteDiffGrad(loss, &p, 1e-5);
  for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("finite differences reject non-finite losses") {
  Matrix p(1, 1);
  const auto loss = []() { return std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(FiniteDiffGrad(loss, &p, 1e-5), std::runtime_error);
}

TEST_CASE("semi-orthogonal step keeps orthonormal matrices fixed") {
  Matrix w(8, 3);
  Rng rng(3, rngstream::kInit);
  for (double &v : w.data) v = rng.Gaussian();
  OrthonormalizeColumns(&w, 3);
  Matrix before = w;
  SemiOrthogonalStep(&w, 3, 0.125);
  CHECK(tdnnas_test::MaxAbsDiff(before, w) < 1e-12);
}

TEST_CASE("semi-orthogonal step on 2I") {
  Matrix w(4, 4);
  for (int i = 0; i < 4; i++) w(i, i) = 2.0;
  SemiOrthogonalStep(&w, 4, 0.125);
  for (int i = 0; i < 4; i++) {
    for (int j = 0; j < 4; j++) {
      CHECK(w(i, j) == (i == j ? 1.25 : 0.0));
    }
  }
}

TEST_CASE("semi-orthogonal iteration converges on a random matrix") {
  Matrix w(16, 4);
  Rng rng(17, rngstream::kInit);
  for (double &v : w.data) v = rng.Gaussian() / 4.0;  // 1/sqrt(rows)
  for (int it = 0; it < 100; it++) SemiOrthogonalStep(&w, 4, 0.125);
  CHECK(OrthonormalityError(w, 4) < 1e-3);
}

TEST_CASE("semi-orthogonal step never increases the error for small nu") {
  Rng rng(23, rngstream::kInit);
  for (int trial = 0; trial < 50; trial++) {
    Matrix w(10, 4);
    for (double &v : w.data) v = rng.Gaussian();
    OrthonormalizeColumns(&w, 4);
    for (double &v : w.data) v += 0.05 * rng.Gaussian();  // ||W^T W - I||_2 < 1
    for (double nu : {0.05, 0.125, 0.25}) {
      Matrix trial_w = w;
      const double before = OrthonormalityError(trial_w, 4);
      SemiOrthogonalStep(&trial_w, 4, nu);
      CHECK(OrthonormalityError(trial_w, 4) <= before + 1e-12);
    }
  }
}

TEST_CASE("semi-orthogonal step rejects wide matrices and bad nu") {
  Matrix w(2, 4);
  CHECK_THROWS_AS(SemiOrthogonalStep(&w, 4, 0.125), std::invalid_argument);
  Matrix w2(4, 2);
  CHECK_THROWS_AS(SemiOrthogonalStep(&w2, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SemiOrthogonalStep(&w2, 2, 0.6), std::invalid_argument);
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(123, 4), b(123, 4), c(123, 5);
  bool any_diff = false;
  for (int i = 0; i < 100; i++) {
    const uint64_t va = a.NextU64();
    CHECK(va == b.NextU64());
    if (va != c.NextU64()) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("rng uniforms live strictly inside (0,1)") {
  Rng rng(99, 0);
  for (int i = 0; i < 100000; i++) {
    const double u = rng.Uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("rng gaussian moments") {
  Rng rng(5, 2);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; i++) {
    const double g = rng.Gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("rng uniform ints are unbiased") {
  Rng rng(31, 3);
  std::vector<int> counts(4, 0);
  const int n = 10000;
  for (int i = 0; i < n; i++) counts[rng.UniformInt(4)]++;
  for (int c : counts) {
    CHECK(std::abs(c / static_cast<double>(n) - 0.25) <= 0.02);
  }
}

TEST_CASE("mix seed separates indices") {
  CHECK(MixSeed(100, 0) == MixSeed(100, 0));
  std::set<uint64_t> seen;
  for (uint64_t i = 0; i < 100; i++) seen.insert(MixSeed(100, i));
  CHECK(seen.size() == 100);
}

TEST_CASE("bigcount exact powers from the paper's spaces") {
  CHECK(BigCount::Pow(4, 28).ToString() == "72057594037927936");
  CHECK(BigCount::Pow(7, 28).ToString() == "459986536544739960976801");
  CHECK(BigCount::Pow(8, 14).ToString() == "4398046511104");
  CHECK(BigCount::Pow(8, 14) == 4398046511104ull);
  CHECK(BigCount::Pow(4, 28) == 72057594037927936ull);
}

TEST_CASE("bigcount string and comparison behavior") {
  CHECK(BigCount(0).ToString() == "0");
  CHECK(BigCount(1).ToString() == "1");
  CHECK(BigCount(1000000000).ToString() == "1000000000");
  CHECK(BigCount(999999999).ToString() == "999999999");
  BigCount b(256);
  CHECK(!b.GreaterThan(256));
  CHECK(b.GreaterThan(255));
  CHECK(BigCount::Pow(7, 28).GreaterThan(UINT64_MAX));
  CHECK(BigCount::Pow(2, 64).ToString() == "18446744073709551616");
}

TEST_SUITE_END();
