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

#include "diarkit/fusion.h"

#include "diarkit/error.h"
#include "doctest.h"
#include "support/gen.h"

using namespace diarkit;

namespace {

Annotation ann(std::initializer_list<std::tuple<double, double, const char *>> entries) {
  Annotation a("r");
  for (auto [s, e, l] : entries) a.add(Segment(s, e), l);
  return a;
}

// Same per-label supports within 1e-9.
bool equivalent(const Annotation &a, const Annotation &b) {
  if (a.labels() != b.labels()) return false;
  for (const auto &l : a.labels()) {
    const Timeline ta = a.label_timeline(l), tb = b.label_timeline(l);
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      if (std::abs(ta.segments()[i].start() - tb.segments()[i].start()) > 1e-9 ||
          std::abs(ta.segments()[i].end() - tb.segments()[i].end()) > 1e-9) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("map_labels examples") {
  const Annotation h = ann({{0, 5, "A"}, {5, 9, "B"}});
  auto m = map_labels({h, h});
  CHECK(equivalent(m[1], h));

  m = map_labels({ann({{0, 10, "A"}}), ann({{0, 9, "X"}})});
  CHECK(m[1].labels() == std::vector<std::string>{"A"});

  m = map_labels({ann({{0, 10, "A"}}), ann({{0, 9, "X"}, {12, 14, "Y"}})});
  const auto labels = m[1].labels();
  REQUIRE(labels.size() == 2);
  CHECK(labels[0] == "A");
  CHECK(labels[1] != "A");
}

TEST_CASE("fresh labels never clash with anchor labels") {
  // "Y@1" already exists in the anchor.
  const auto m = map_labels({ann({{0, 10, "A"}, {20, 21, "Y@1"}}),
                             ann({{0, 9, "X"}, {12, 14, "Y"}, {20, 21, "Z"}})});
  std::set<std::string> seen;
  for (const auto &l : m[1].labels()) CHECK(seen.insert(l).second);
  CHECK(m[1].label_timeline("Y@1").duration() == doctest::Approx(1.0));
  CHECK(m[1].labels().size() == 3);
}

TEST_CASE("fuse examples") {
  const Annotation h = ann({{0, 4, "A"}, {3, 8, "B"}, {9, 12, "A"}});
  CHECK(equivalent(dover_lap({h}), h.normalized()));
  CHECK(equivalent(dover_lap({h, h, h}), h.normalized()));

  // 2-vs-1 disagreement on [5, 10): A keeps 2/3 of the vote.
  const Annotation fused = dover_lap(
      {ann({{0, 10, "A"}}), ann({{0, 10, "A"}}), ann({{0, 5, "A"}, {5, 10, "B"}})});
  CHECK(equivalent(fused, ann({{0, 10, "A"}})));

  // Counts 1, 1, 2: round(4/3) = 1 speaker, the one with most weight.
  const Annotation counts = fuse(
      {ann({{0, 10, "A"}}), ann({{0, 10, "A"}}), ann({{0, 10, "A"}, {0, 10, "B"}})});
  CHECK(equivalent(counts, ann({{0, 10, "A"}})));

  // Counts 1, 2: 1.5 rounds up.
  const Annotation half = fuse({ann({{0, 10, "A"}}), ann({{0, 10, "A"}, {0, 10, "B"}})});
  CHECK(equivalent(half, ann({{0, 10, "A"}, {0, 10, "B"}})));

  CHECK_THROWS_AS(fuse({}), Error);
  CHECK_THROWS_AS(fuse({h, h}, {1.0}), Error);
  CHECK_THROWS_AS(fuse({h, h}, {1.0, -1.0}), Error);
}

TEST_CASE("rank weights favour the first hypothesis") {
  const auto w = fusion_weights(3, FusionWeighting::kRank);
  CHECK(w[0] == doctest::Approx(6.0 / 11.0));
  CHECK(w[2] == doctest::Approx(2.0 / 11.0));
  const auto u = fusion_weights(4, FusionWeighting::kUniform);
  for (double v : u) CHECK(v == 0.25);
  // With two hypotheses and rank weights the first wins every disagreement.
  const Annotation fused = fuse({ann({{0, 10, "A"}}), ann({{0, 10, "B"}})},
                                fusion_weights(2, FusionWeighting::kRank));
  CHECK(equivalent(fused, ann({{0, 10, "A"}})));
}

TEST_CASE("fusion properties") {
  gen::Rng rng(81);
  for (int trial = 0; trial < 100; ++trial) {
    const Annotation h = gen::annotation(rng, 3, 4, 20.0);
    CHECK(equivalent(dover_lap({h}), h.normalized()));
    CHECK(equivalent(dover_lap({h, h, h}), h.normalized()));
    std::vector<Annotation> hyps;
    Timeline all;
    for (int k = 0; k < gen::integer(rng, 2, 4); ++k) {
      hyps.push_back(gen::annotation(rng, 3, 4, 20.0, "h" + std::to_string(k) + "_"));
      for (const auto &s : hyps.back().speech()) all.add(s);
    }
    const Annotation fused = dover_lap(hyps);
    CHECK(subtract(fused.speech(), support(all)).duration() < 1e-9);
  }
}
