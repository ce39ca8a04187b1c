// Copyright 2026 The diarkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "diarkit/vbx.h"

#include <map>

#include "diarkit/cluster.h"
#include "diarkit/embed.h"
#include "diarkit/error.h"
#include "diarkit/synth.h"
#include "doctest.h"
#include "support/gen.h"
#include "support/oracles.h"

using namespace diarkit;

namespace {

Eigen::MatrixXd stochastic(gen::Rng &rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = gen::uniform(rng, 0.05, 1.0);
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

// Random PLDA-space data: rows length-normalized to sqrt(D).
Eigen::MatrixXd random_rows(gen::Rng &rng, int t, int d) {
  Eigen::MatrixXd x = gen::gaussian(rng, t, d);
  for (int i = 0; i < t; ++i) x.row(i) *= std::sqrt(d) / x.row(i).norm();
  return x;
}

}  // namespace

TEST_CASE("forward_backward equals path enumeration") {
  gen::Rng rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    const int T = gen::integer(rng, 1, 8), S = gen::integer(rng, 1, 3);
    const Eigen::MatrixXd ll = gen::gaussian(rng, T, S, 3.0);
    const Eigen::MatrixXd tr = stochastic(rng, S, S);
    const Eigen::VectorXd init = stochastic(rng, 1, S).row(0).transpose();
    double log_px = 0.0;
    const Eigen::MatrixXd want = oracle::path_posteriors(ll, tr, init, &log_px);
    const ForwardBackwardResult fb = forward_backward(ll, tr, init);
    CHECK((fb.gamma - want).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(fb.log_px - log_px) < 1e-8);
  }
}

TEST_CASE("vbx defaults") {
  const VbxConfig c;
  CHECK(c.fa == 0.15);
  CHECK(c.fb == 5.5);
  CHECK(c.loop_p == 0.33);
  CHECK(c.max_iters == 40);
  CHECK(c.elbo_tol == 1e-4);
  CHECK(c.min_pi == 1e-4);
}

TEST_CASE("vbx config and input are validated") {
  VbxConfig c;
  c.loop_p = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = VbxConfig{};
  c.fa = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  const Eigen::VectorXd phi = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(vbx_resegment(Eigen::MatrixXd(0, 2), {}, phi), Error);
  CHECK_THROWS_AS(vbx_resegment(Eigen::MatrixXd::Ones(2, 2), {0}, phi), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(vbx_resegment(bad, {0, 0}, phi), Error);
}

TEST_CASE("single speaker is a fixed point") {
  gen::Rng rng(62);
  const int D = 8;
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(10, D) + gen::gaussian(rng, 10, D, 0.05);
  for (int i = 0; i < 10; ++i) x.row(i) *= std::sqrt(D) / x.row(i).norm();
  const SoftAlignment a = vbx_resegment(x, std::vector<int>(10, 0), Eigen::VectorXd::Ones(D));
  CHECK(a.pi.size() == 1);
  CHECK(a.first == std::vector<int>(10, 0));
  CHECK(a.second == std::vector<int>(10, -1));
  CHECK((a.gamma.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("two synthetic speakers are recovered") {
  SynthRecipe r;
  r.speakers = 2;
  r.dim = 32;
  r.max_windows = 100;
  r.seed = 5;
  const SynthRecording rec = generate_synthetic(r);
  BackendModel centered = rec.model;
  centered.mean = rec.xvectors.vectors.colwise().mean().transpose();
  const XVectorSequence x = preprocess(rec.xvectors, centered);
  const auto init = ahc(cosine_matrix(x));
  const SoftAlignment a = vbx_resegment(x, init, rec.model);
  CHECK(oracle::adjusted_rand_index(a.first, rec.window_speakers) >= 0.95);
}

TEST_CASE("vbx invariants on random inputs") {
  gen::Rng rng(63);
  for (int run = 0; run < 60; ++run) {
    const int T = gen::integer(rng, 1, 60), D = gen::integer(rng, 1, 12);
    const Eigen::MatrixXd x = random_rows(rng, T, D);
    std::vector<int> init(T);
    for (auto &v : init) v = gen::integer(rng, 0, 4);
    Eigen::VectorXd phi(D);
    for (int d = 0; d < D; ++d) phi[d] = gen::uniform(rng, 0.1, 6.0);
    std::sort(phi.data(), phi.data() + D, std::greater<>());
    VbxConfig c;
    c.fa = gen::uniform(rng, 0.05, 1.0);
    c.fb = gen::uniform(rng, 0.5, 12.0);
    c.loop_p = gen::uniform(rng, 0.01, 0.99);
    const SoftAlignment a = vbx_resegment(x, init, phi, c);
    for (std::size_t i = 1; i < a.elbo_trace.size(); ++i) {
      CHECK(a.elbo_trace[i] >= a.elbo_trace[i - 1] - 1e-6);
    }
    CHECK(std::abs(a.pi.sum() - 1.0) < 1e-9);
    for (int t = 0; t < T; ++t) {
      CHECK(std::abs(a.gamma.row(t).sum() - 1.0) < 1e-9);
      Eigen::Index best;
      a.gamma.row(t).maxCoeff(&best);
      CHECK(a.gamma(t, a.first[t]) == a.gamma(t, best));
      if (a.pi.size() > 1) {
        CHECK(a.second[t] != a.first[t]);
        for (Eigen::Index s = 0; s < a.gamma.cols(); ++s) {
          if (s != a.first[t]) CHECK(a.gamma(t, a.second[t]) >= a.gamma(t, s));
        }
      }
    }
    CHECK(static_cast<int>(a.speakers.size()) == a.gamma.cols());
  }
}

TEST_CASE("sticky transitions do not split one speaker") {
  gen::Rng rng(64);
  for (int run = 0; run < 20; ++run) {
    const int D = 16, T = 40;
    Eigen::VectorXd y = gen::gaussian(rng, 1, D).row(0).transpose();
    Eigen::MatrixXd x = gen::gaussian(rng, T, D);
    for (int t = 0; t < T; ++t) x.row(t) += 2.0 * y.transpose();
    for (int t = 0; t < T; ++t) x.row(t) *= std::sqrt(D) / x.row(t).norm();
    VbxConfig c;
    c.loop_p = 0.999;
    const SoftAlignment a = vbx_resegment(x, std::vector<int>(T, 0), Eigen::VectorXd::Constant(D, 4.0), c);
    CHECK(a.first == std::vector<int>(T, 0));
  }
}

TEST_CASE("permuting init ids permutes the speakers") {
  gen::Rng rng(65);
  for (int run = 0; run < 30; ++run) {
    const int T = gen::integer(rng, 5, 40), D = 6;
    const Eigen::MatrixXd x = random_rows(rng, T, D);
    std::vector<int> init(T);
    for (auto &v : init) v = gen::integer(rng, 0, 3);
    std::vector<int> perm{2, 0, 3, 1};
    std::vector<int> permuted(T);
    for (int t = 0; t < T; ++t) permuted[t] = perm[init[t]];
    const Eigen::VectorXd phi = Eigen::VectorXd::LinSpaced(D, 3.0, 1.0);
    const SoftAlignment a = vbx_resegment(x, init, phi);
    const SoftAlignment b = vbx_resegment(x, permuted, phi);
    REQUIRE(a.gamma.cols() == b.gamma.cols());
    std::map<int, int> col_b;
    for (std::size_t s = 0; s < b.speakers.size(); ++s) col_b[b.speakers[s]] = static_cast<int>(s);
    for (std::size_t s = 0; s < a.speakers.size(); ++s) {
      const int sb = col_b.at(perm[a.speakers[s]]);
      CHECK((a.gamma.col(static_cast<Eigen::Index>(s)) - b.gamma.col(sb)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("alignment_to_annotation examples") {
  SoftAlignment one;
  one.gamma = Eigen::MatrixXd::Ones(3, 1);
  one.pi = Eigen::VectorXd::Ones(1);
  one.speakers = {0};
  one.first = {0, 0, 0};
  one.second = {-1, -1, -1};
  const std::vector<Segment> w3{Segment(0, 1.44), Segment(0.24, 1.68), Segment(0.48, 1.92)};
  AlignmentAnnotation aa = alignment_to_annotation(one, w3, "r");
  CHECK(aa.primary.labels() == std::vector<std::string>{"spk00"});
  for (const auto &s : aa.second) CHECK_FALSE(s.label.has_value());

  SoftAlignment abab;
  abab.gamma = Eigen::MatrixXd(4, 2);
  abab.gamma << 0.9, 0.1, 0.2, 0.8, 0.7, 0.3, 0.4, 0.6;
  abab.pi = Eigen::VectorXd::Constant(2, 0.5);
  abab.speakers = {0, 1};
  abab.first = {0, 1, 0, 1};
  abab.second = {1, 0, 1, 0};
  const std::vector<Segment> w4{Segment(0, 1.44), Segment(0.24, 1.68), Segment(0.48, 1.92),
                                Segment(0.72, 2.16)};
  aa = alignment_to_annotation(abab, w4, "r");
  CHECK(aa.primary.entries().size() == 4);
  REQUIRE(aa.second.size() == 4);
  CHECK(aa.second[0].label == std::optional<std::string>("spk01"));
  CHECK(aa.second[1].label == std::optional<std::string>("spk00"));
  CHECK_THROWS_AS(alignment_to_annotation(abab, w3, "r"), Error);
}
