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

#include "diarkit/vad.h"

#include <cmath>

#include "diarkit/error.h"
#include "doctest.h"
#include "support/gen.h"
#include "support/oracles.h"

using namespace diarkit;

namespace {

FrameScores scores(std::vector<double> v, double step = 0.01) {
  FrameScores s;
  s.step = step;
  s.values = std::move(v);
  return s;
}

HysteresisConfig thresholds(double onset, double offset) {
  HysteresisConfig c;
  c.onset = onset;
  c.offset = offset;
  return c;
}

}  // namespace

TEST_CASE("binarize examples") {
  const FrameScores s = scores({0.1, 0.7, 0.8, 0.4, 0.6, 0.2});
  HysteresisConfig c = thresholds(0.6, 0.5);
  Timeline t = binarize(s, c);
  REQUIRE(t.size() == 2);
  CHECK(t.segments()[0].start() == doctest::Approx(0.01));
  CHECK(t.segments()[0].end() == doctest::Approx(0.03));
  CHECK(t.segments()[1].start() == doctest::Approx(0.04));
  CHECK(t.segments()[1].end() == doctest::Approx(0.05));

  c.min_duration_off = 0.501;
  t = binarize(s, c);
  REQUIRE(t.size() == 1);
  CHECK(t.segments()[0].start() == doctest::Approx(0.01));
  CHECK(t.segments()[0].end() == doctest::Approx(0.05));

  CHECK(binarize(scores({0.1, 0.2, 0.3}), thresholds(0.6, 0.5)).empty());
}

TEST_CASE("hysteresis holds the state between thresholds") {
  // 0.55 keeps an active region alive but does not start one.
  const Timeline t = binarize(scores({0.55, 0.7, 0.55, 0.55, 0.4, 0.55}), thresholds(0.6, 0.5));
  REQUIRE(t.size() == 1);
  CHECK(t.segments()[0].start() == doctest::Approx(0.01));
  CHECK(t.segments()[0].end() == doctest::Approx(0.04));
  // Active from frame 0 when the recording starts above onset.
  const Timeline u = binarize(scores({0.9, 0.9}), thresholds(0.6, 0.5));
  REQUIRE(u.size() == 1);
  CHECK(u.segments()[0].start() == 0.0);
}

TEST_CASE("binarize applies pad, merge and drop in that order") {
  HysteresisConfig c = thresholds(0.5, 0.5);
  c.pad_onset = 0.02;
  c.pad_offset = 0.02;
  c.min_duration_off = 0.05;
  c.min_duration_on = 0.08;
  // Regions [0.10,0.12), [0.18,0.20), [0.50,0.52). Padding makes the first
  // two 0.02 apart, so they merge into [0.08,0.22); the last becomes
  // [0.48,0.54), shorter than 0.08, and is dropped.
  std::vector<double> v(60, 0.0);
  for (int i : {10, 11, 18, 19, 50, 51}) v[i] = 1.0;
  const Timeline t = binarize(scores(v), c);
  REQUIRE(t.size() == 1);
  CHECK(t.segments()[0].start() == doctest::Approx(0.08));
  CHECK(t.segments()[0].end() == doctest::Approx(0.22));
}

TEST_CASE("binarize config is validated") {
  CHECK_THROWS_AS(binarize(scores({0.5}), thresholds(0.4, 0.6)), Error);
  HysteresisConfig c;
  c.min_duration_off = -1.0;
  CHECK_THROWS_AS(binarize(scores({0.5}), c), Error);
}

TEST_CASE("default vad config") {
  const HysteresisConfig c = default_vad_config();
  CHECK(c.onset == 0.5);
  CHECK(c.offset == 0.5);
  CHECK(c.min_duration_off == 0.501);
  CHECK(c.min_duration_on == 0.0);
}

TEST_CASE("binarize property: gaps, lengths and extent") {
  gen::Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(gen::integer(rng, 1, 400));
    for (auto &x : v) x = gen::uniform(rng, 0, 1);
    HysteresisConfig c;
    c.onset = gen::uniform(rng, 0.3, 0.9);
    c.offset = gen::uniform(rng, 0.1, c.onset);
    c.min_duration_off = gen::uniform(rng, 0, 0.6);
    c.min_duration_on = gen::uniform(rng, 0, 0.2);
    c.pad_onset = gen::uniform(rng, 0, 0.05);
    c.pad_offset = gen::uniform(rng, 0, 0.05);
    FrameScores s = scores(v);
    s.offset = gen::uniform(rng, 0, 1);
    const Timeline t = binarize(s, c);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(t.segments()[i].duration() >= c.min_duration_on - 1e-9);
      CHECK(t.segments()[i].start() >= std::max(0.0, s.offset - c.pad_onset) - 1e-9);
      CHECK(t.segments()[i].end() <= s.frame_end(v.size() - 1) + c.pad_offset + 1e-9);
      if (i > 0) {
        CHECK(t.segments()[i].start() - t.segments()[i - 1].end() >= c.min_duration_off - 1e-9);
      }
    }
  }
}

TEST_CASE("binarize equals thresholding when onset equals offset") {
  gen::Rng rng(32);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(gen::integer(rng, 1, 200));
    for (auto &x : v) x = std::round(gen::uniform(rng, 0, 1) * 20) / 20;
    const double th = std::round(gen::uniform(rng, 0, 1) * 20) / 20;
    const double step = gen::uniform(rng, 0.005, 0.05);
    FrameScores s = scores(v, step);
    s.offset = gen::uniform(rng, 0, 2);
    const Timeline t = binarize(s, thresholds(th, th));
    const auto want = oracle::threshold_runs(v, th, step, s.offset);
    REQUIRE(t.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(t.segments()[i].start() == doctest::Approx(want[i].start).epsilon(1e-9));
      CHECK(t.segments()[i].end() == doctest::Approx(want[i].end).epsilon(1e-9));
    }
  }
}

TEST_CASE("energy_scores examples") {
  const FrameScores z = energy_scores(std::vector<double>(16000, 0.0), 16000, 0.025, 0.010);
  CHECK(z.values.size() == 98);
  CHECK(z.step == doctest::Approx(0.010));
  CHECK(z.offset == doctest::Approx(0.0125));
  for (double v : z.values) CHECK(v == 0.0);

  // Half a second of silence, then a full-scale 440 Hz sine.
  std::vector<double> s(16000, 0.0);
  for (int i = 8000; i < 16000; ++i) s[i] = std::sin(2 * M_PI * 440 * i / 16000.0);
  const FrameScores e = energy_scores(s, 16000);
  CHECK(e.values.front() < 0.05);
  CHECK(e.values.back() > 0.95);
  const Timeline speech = binarize(e, thresholds(0.5, 0.5));
  REQUIRE(speech.size() == 1);
  CHECK(speech.segments()[0].start() == doctest::Approx(0.5).epsilon(0.03));

  CHECK_THROWS_AS(energy_scores(std::vector<double>(100, 0.0), 16000), Error);
  CHECK_THROWS_AS(energy_scores(s, 16000, 0.01, 0.02), Error);
}

TEST_CASE("detection_report examples") {
  const Timeline ref({Segment(0, 8)});
  DetectionReport r = detection_report(ref, ref, Segment(0, 10), 0.01);
  CHECK(r.deter == 0.0);
  CHECK(r.accuracy == 1.0);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);

  r = detection_report(ref, Timeline({Segment(0, 6)}), Segment(0, 10), 0.01);
  CHECK(r.deter == doctest::Approx(0.25));
  CHECK(r.recall == doctest::Approx(0.75));
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.accuracy == doctest::Approx(0.8));

  r = detection_report(Timeline({Segment(0, 5)}), Timeline({Segment(0, 10)}), Segment(0, 10), 0.01);
  CHECK(r.deter == doctest::Approx(1.0));
  CHECK(r.precision == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.accuracy == doctest::Approx(0.5));

  CHECK_THROWS_AS(detection_report(Timeline(), Timeline({Segment(0, 1)}), Segment(0, 10), 0.01),
                  Error);
}

TEST_CASE("detection_report mirrors under swapping reference and hypothesis") {
  gen::Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const Timeline a = support(gen::timeline(rng, 6, 10.0));
    const Timeline b = support(gen::timeline(rng, 6, 10.0));
    if (a.empty() || b.empty()) continue;
    const Segment extent(0, 12);
    const DetectionReport ab = detection_report(a, b, extent, 0.01);
    const DetectionReport ba = detection_report(b, a, extent, 0.01);
    CHECK(ab.precision == doctest::Approx(ba.recall));
    CHECK(ab.recall == doctest::Approx(ba.precision));
    CHECK(ab.false_alarm == doctest::Approx(ba.missed));
    CHECK(ab.accuracy == doctest::Approx(ba.accuracy));
    // Brute-force frame count.
    double fa = 0, miss = 0;
    for (int i = 0; i < 1200; ++i) {
      const double t = (i + 0.5) * 0.01;
      fa += (!a.contains(t) && b.contains(t)) * 0.01;
      miss += (a.contains(t) && !b.contains(t)) * 0.01;
    }
    CHECK(ab.false_alarm == doctest::Approx(fa));
    CHECK(ab.missed == doctest::Approx(miss));
  }
}
