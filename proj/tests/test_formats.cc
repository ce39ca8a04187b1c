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

#include "diarkit/formats.h"

#include <cstdint>
#include <cstring>

#include "diarkit/error.h"
#include "doctest.h"
#include "support/gen.h"

using namespace diarkit;

namespace {

template <typename T>
void put(std::string *out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out->append(buf, sizeof(T));
}

std::string xvec_bytes(std::uint32_t count, std::uint32_t dim,
                       const std::vector<std::pair<double, double>> &windows,
                       const std::vector<float> &values) {
  std::string b = "XVEC0001";
  put(&b, count);
  put(&b, dim);
  for (std::size_t r = 0; r < windows.size(); ++r) {
    put(&b, windows[r].first);
    put(&b, windows[r].second);
    for (std::uint32_t d = 0; d < dim; ++d) put(&b, values[r * dim + d]);
  }
  return b;
}

// Canonical 44-byte header plus samples.
std::string wav_bytes(std::uint16_t channels, std::uint16_t bits, const std::vector<int16_t> &s) {
  std::string b = "RIFF";
  const std::uint32_t data_size = static_cast<std::uint32_t>(s.size() * 2);
  put<std::uint32_t>(&b, 36 + data_size);
  b += "WAVEfmt ";
  put<std::uint32_t>(&b, 16);
  put<std::uint16_t>(&b, 1);
  put<std::uint16_t>(&b, channels);
  put<std::uint32_t>(&b, 16000);
  put<std::uint32_t>(&b, 16000u * channels * bits / 8);
  put<std::uint16_t>(&b, static_cast<std::uint16_t>(channels * bits / 8));
  put<std::uint16_t>(&b, bits);
  b += "data";
  put<std::uint32_t>(&b, data_size);
  for (int16_t v : s) put(&b, v);
  return b;
}

}  // namespace

TEST_CASE("parse_rttm examples") {
  auto anns = parse_rttm("SPEAKER abc 1 0.50 1.25 <NA> <NA> spk1 <NA> <NA>\n");
  REQUIRE(anns.size() == 1);
  CHECK(anns[0].recording_id() == "abc");
  REQUIRE(anns[0].entries().size() == 1);
  CHECK(anns[0].entries()[0].label == "spk1");
  CHECK(anns[0].entries()[0].segment.start() == 0.5);
  CHECK(anns[0].entries()[0].segment.end() == 1.75);

  CHECK(parse_rttm("").empty());
  CHECK_THROWS_AS(parse_rttm("SPEAKER abc 1 0.50 0.00 <NA> <NA> spk1 <NA> <NA>\n"), ParseError);
  CHECK_THROWS_AS(parse_rttm("SPEAKER abc 1 0.50 -1.0 <NA> <NA> spk1 <NA> <NA>\n"), ParseError);
}

TEST_CASE("parse_rttm skips comments and other record types") {
  const auto anns = parse_rttm(
      ";; comment\n"
      "SPKR-INFO abc 1 <NA> <NA> <NA> unknown spk1 <NA> <NA>\n"
      "\n"
      "SPEAKER b 1 1.0 2.0 <NA> <NA> x <NA> <NA>\n"
      "SPEAKER a 1 0.0 1.0 <NA> <NA> y <NA> <NA>\n");
  REQUIRE(anns.size() == 2);
  CHECK(anns[0].recording_id() == "a");
  CHECK(anns[1].recording_id() == "b");
}

TEST_CASE("parse_rttm reports the failing line") {
  try {
    parse_rttm("SPEAKER a 1 0.0 1.0 <NA> <NA> x <NA> <NA>\nSPEAKER a 1 zero 1.0 <NA> <NA> x\n");
    FAIL("no error");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_rttm("SPEAKER a 1 0.0\n"), ParseError);
}

TEST_CASE("emit_rttm examples") {
  Annotation a("abc");
  a.add(Segment(0.5, 2), "B");
  a.add(Segment(0, 1), "A");
  CHECK(emit_rttm({a}) ==
        "SPEAKER abc 1 0.000 1.000 <NA> <NA> A <NA> <NA>\n"
        "SPEAKER abc 1 0.500 1.500 <NA> <NA> B <NA> <NA>\n");
  CHECK(emit_rttm({}).empty());
  CHECK(emit_rttm({Annotation("x")}).empty());

  const auto parsed = parse_rttm("SPEAKER abc 1 0.50 1.25 <NA> <NA> spk1 <NA> <NA>\n");
  const auto again = parse_rttm(emit_rttm(parsed));
  REQUIRE(again.size() == 1);
  CHECK(again[0].entries()[0].segment == parsed[0].entries()[0].segment);
}

TEST_CASE("rttm roundtrip keeps durations within 1 ms") {
  gen::Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Annotation a = gen::annotation(rng, 4, 6, 100.0).normalized();
    const auto back = parse_rttm(emit_rttm({a}));
    REQUIRE(back.size() == 1);
    for (const auto &l : a.labels()) {
      CHECK(std::abs(back[0].label_timeline(l).duration() - a.label_timeline(l).duration()) <=
            1e-3 * static_cast<double>(a.label_timeline(l).size()) + 1e-9);
    }
    CHECK(back[0].labels() == a.labels());
  }
}

TEST_CASE("read_xvectors examples") {
  const XVectorSequence empty = read_xvectors(xvec_bytes(0, 256, {}, {}), "e");
  CHECK(empty.size() == 0);
  CHECK(empty.dim() == 256);

  const XVectorSequence two =
      read_xvectors(xvec_bytes(2, 2, {{0.0, 1.44}, {0.24, 1.68}}, {1.f, 2.f, 3.f, 4.f}), "r");
  REQUIRE(two.size() == 2);
  CHECK(two.windows[1] == Segment(0.24, 1.68));
  CHECK(two.vectors(1, 0) == 3.0);
  CHECK(two.vectors(0, 1) == 2.0);

  std::string bad = xvec_bytes(0, 2, {}, {});
  bad.replace(0, 4, "XXXX");
  CHECK_THROWS_AS(read_xvectors(bad, "r"), Error);
}

TEST_CASE("read_xvectors rejects corrupt payloads") {
  std::string full = xvec_bytes(2, 2, {{0.0, 1.44}, {0.24, 1.68}}, {1.f, 2.f, 3.f, 4.f});
  CHECK_THROWS_AS(read_xvectors(full.substr(0, full.size() - 1), "r"), Error);
  CHECK_THROWS_AS(read_xvectors(full + "x", "r"), Error);
  CHECK_THROWS_AS(read_xvectors(full.substr(0, 10), "r"), Error);
  CHECK_THROWS_AS(read_xvectors(xvec_bytes(1, 1, {{0.0, 1.0}}, {std::nanf("")}), "r"), Error);
  CHECK_THROWS_AS(
      read_xvectors(xvec_bytes(1, 1, {{0.0, 1.0}}, {std::numeric_limits<float>::infinity()}), "r"),
      Error);
  CHECK_THROWS_AS(read_xvectors(xvec_bytes(2, 1, {{1.0, 2.0}, {0.0, 1.0}}, {1.f, 2.f}), "r"),
                  Error);
}

TEST_CASE("xvector roundtrip is bit exact") {
  gen::Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    XVectorSequence x;
    x.recording_id = "r";
    const int n = gen::integer(rng, 0, 30), dim = gen::integer(rng, 1, 16);
    double t = 0.0;
    for (int i = 0; i < n; ++i, t += 0.24) x.windows.emplace_back(t, t + 1.44);
    x.vectors = gen::gaussian(rng, n, dim).cast<float>().cast<double>();
    const std::string bytes = write_xvectors(x);
    const XVectorSequence back = read_xvectors(bytes, "r");
    CHECK(write_xvectors(back) == bytes);
    CHECK(back.windows == x.windows);
    CHECK(back.vectors == x.vectors);
  }
}

TEST_CASE("read_frame_scores examples") {
  FrameScores s = read_frame_scores("#step=0.010 #offset=0.000\n0.1\n0.9\n", "r");
  CHECK(s.step == 0.01);
  CHECK(s.offset == 0.0);
  CHECK(s.values == std::vector<double>{0.1, 0.9});

  s = read_frame_scores("#step=0.02\n#offset=0.5\n", "r");
  CHECK(s.values.empty());
  CHECK(s.offset == 0.5);

  CHECK_THROWS_AS(read_frame_scores("#step=0\n0.5\n", "r"), Error);
  CHECK_THROWS_AS(read_frame_scores("0.5\n", "r"), Error);
  CHECK_THROWS_AS(read_frame_scores("#step=0.01\nabc\n", "r"), Error);
  CHECK_THROWS_AS(read_frame_scores("#step=0.01\n0.1 0.2\n", "r"), Error);

  const FrameScores back = read_frame_scores(write_frame_scores(s), "r");
  CHECK(back.step == doctest::Approx(s.step));
  CHECK(back.offset == doctest::Approx(s.offset));
}

TEST_CASE("read_backend_model examples") {
  const BackendModel m = read_backend_model(
      R"({"dim": 2, "lda_dim": 2, "mean": [0, 0], "lda": [1, 0, 0, 1], "phi": [1, 1]})");
  CHECK(m.dim() == 2);
  CHECK(m.lda_dim() == 2);
  CHECK(m.lda.isIdentity());

  CHECK_THROWS_AS(read_backend_model(R"({"dim": 4, "lda_dim": 2, "mean": [0, 0, 0],
      "lda": [1, 0, 0, 1, 0, 0, 0, 0], "phi": [1, 1]})"),
                  Error);
  CHECK_NOTHROW(read_backend_model(
      R"({"dim": 2, "lda_dim": 2, "mean": [0, 0], "lda": [1, 0, 0, 1], "phi": [2.0, 0.5]})"));
  CHECK_THROWS_AS(read_backend_model(R"({"dim": 2, "lda_dim": 2, "mean": [0, 0],
      "lda": [1, 0, 0, 1], "phi": [0.5, 2.0]})"),
                  Error);
  CHECK_THROWS_AS(read_backend_model("{"), Error);

  // lda is row-major D x D'.
  const BackendModel r = read_backend_model(
      R"({"dim": 3, "lda_dim": 2, "mean": [0, 0, 0], "lda": [1, 2, 3, 4, 5, 6], "phi": [1, 0]})");
  CHECK(r.lda(0, 1) == 2.0);
  CHECK(r.lda(2, 0) == 5.0);
  const BackendModel rr = read_backend_model(write_backend_model(r));
  CHECK(rr.lda == r.lda);
  CHECK(rr.phi == r.phi);
}

TEST_CASE("read_wav examples") {
  const WavData w = read_wav(wav_bytes(1, 16, std::vector<int16_t>(160, 0)));
  CHECK(w.sample_rate == 16000);
  CHECK(w.samples.size() == 160);

  CHECK_THROWS_AS(read_wav(wav_bytes(2, 16, std::vector<int16_t>(160, 0))), Error);
  CHECK_THROWS_AS(read_wav(wav_bytes(1, 8, std::vector<int16_t>(10, 0))), Error);

  const WavData m = read_wav(wav_bytes(1, 16, {-32768, 16384, 32767}));
  CHECK(m.samples[0] == -1.0);
  CHECK(m.samples[1] == 0.5);
  CHECK(m.samples[2] < 1.0);

  const WavData back = read_wav(write_wav(8000, {0.0, -1.0, 0.5}));
  CHECK(back.sample_rate == 8000);
  CHECK(back.samples == std::vector<double>{0.0, -1.0, 0.5});
}

TEST_CASE("lab and second-label files") {
  const Timeline t = read_lab("0.0 1.5 speech\n2.0 3.0 speech\n3.0 4.0 nonspeech\n");
  REQUIRE(t.size() == 2);
  CHECK(t.segments()[1] == Segment(2.0, 3.0));
  CHECK(read_lab(write_lab(t)).segments() == t.segments());
  CHECK_THROWS_AS(read_lab("x y speech\n"), Error);

  std::vector<WindowLabel> second{{Segment(0, 1.44), std::string("spk01")},
                                  {Segment(0.24, 1.68), std::nullopt}};
  std::string id;
  const auto back = read_second_labels(write_second_labels("rec", second), &id);
  CHECK(id == "rec");
  REQUIRE(back.size() == 2);
  CHECK(back[0].window == second[0].window);
  CHECK(back[0].label == second[0].label);
  CHECK_FALSE(back[1].label.has_value());
}
