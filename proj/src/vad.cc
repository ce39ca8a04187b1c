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

#include <algorithm>
#include <cmath>

#include "diarkit/error.h"

namespace diarkit {

namespace {
constexpr double kLogEnergyFloor = -30.0;
}

void HysteresisConfig::validate() const {
  if (!std::isfinite(onset) || !std::isfinite(offset)) {
    throw ConfigError("hysteresis thresholds must be finite");
  }
  if (offset > onset) throw ConfigError("hysteresis offset must not exceed onset");
  if (min_duration_on < 0 || min_duration_off < 0 || pad_onset < 0 ||
      pad_offset < 0) {
    throw ConfigError("hysteresis durations must be non-negative");
  }
}

HysteresisConfig default_vad_config() {
  HysteresisConfig cfg;
  cfg.min_duration_off = 0.501;
  return cfg;
}

FrameScores energy_scores(std::span<const double> samples, int sample_rate,
                          double frame, double hop) {
  if (sample_rate <= 0) throw Error("energy_scores: bad sample rate");
  if (!(hop > 0.0) || frame < hop) {
    throw Error("energy_scores: need frame >= hop > 0");
  }
  const auto frame_len = static_cast<std::size_t>(std::lround(frame * sample_rate));
  const auto hop_len = static_cast<std::size_t>(std::lround(hop * sample_rate));
  if (frame_len == 0 || hop_len == 0) throw Error("energy_scores: frame too short");
  if (samples.size() < frame_len) {
    throw Error("energy_scores: fewer samples than one frame");
  }
  const std::size_t n = (samples.size() - frame_len) / hop_len + 1;

  FrameScores fs;
  fs.step = hop;
  fs.offset = frame / 2.0;
  fs.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double energy = 0.0;
    for (std::size_t k = 0; k < frame_len; ++k) {
      const double s = samples[i * hop_len + k];
      energy += s * s;
    }
    energy /= static_cast<double>(frame_len);
    fs.values[i] = energy > 0.0 ? std::max(std::log(energy), kLogEnergyFloor)
                                : kLogEnergyFloor;
  }
  const auto [lo, hi] = std::minmax_element(fs.values.begin(), fs.values.end());
  const double min = *lo, range = *hi - *lo;
  for (double &v : fs.values) v = range > 0.0 ? (v - min) / range : 0.0;
  return fs;
}

Timeline binarize(const FrameScores &scores, const HysteresisConfig &cfg) {
  cfg.validate();
  std::vector<Segment> regions;
  bool active = false;
  std::size_t first = 0;
  auto close = [&](std::size_t end_frame) {
    Segment s(0.0, 1.0);
    if (make_segment(scores.frame_start(first) - cfg.pad_onset,
                     scores.frame_start(end_frame) + cfg.pad_offset, &s)) {
      regions.push_back(s);
    }
  };
  for (std::size_t i = 0; i < scores.values.size(); ++i) {
    const double v = scores.values[i];
    if (!active && v >= cfg.onset) {
      active = true;
      first = i;
    } else if (active && v < cfg.offset) {
      active = false;
      close(i);
    }
  }
  if (active) close(scores.values.size());

  // Padding can make neighbours overlap; support() re-establishes disjointness.
  Timeline padded = support(Timeline(std::move(regions)));

  std::vector<Segment> merged;
  for (const auto &s : padded) {
    if (!merged.empty() &&
        s.start() - merged.back().end() < cfg.min_duration_off - kTimeEps) {
      merged.back() = Segment(merged.back().start(), s.end());
    } else {
      merged.push_back(s);
    }
  }
  std::vector<Segment> kept;
  for (const auto &s : merged) {
    if (s.duration() >= cfg.min_duration_on - kTimeEps) kept.push_back(s);
  }
  return Timeline(std::move(kept));
}

DetectionReport detection_report(const Timeline &reference,
                                 const Timeline &hypothesis,
                                 const Segment &extent, double step) {
  if (!(step > 0.0)) throw Error("detection_report: step must be positive");
  const Timeline ref = support(reference), hyp = support(hypothesis);
  const auto n = static_cast<std::size_t>(
      std::floor(extent.duration() / step + kTimeEps));
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = extent.start() + (static_cast<double>(i) + 0.5) * step;
    const bool r = ref.contains(t), h = hyp.contains(t);
    if (r && h) ++tp;
    else if (h) ++fp;
    else if (r) ++fn;
    else ++tn;
  }
  DetectionReport rep;
  rep.false_alarm = static_cast<double>(fp) * step;
  rep.missed = static_cast<double>(fn) * step;
  rep.reference = static_cast<double>(tp + fn) * step;
  if (tp + fn == 0) {
    if (fp > 0) {
      throw Error("detection error rate undefined: reference has no positives");
    }
    rep.deter = 0.0;
  } else {
    rep.deter = static_cast<double>(fp + fn) / static_cast<double>(tp + fn);
  }
  rep.accuracy = n ? static_cast<double>(tp + tn) / static_cast<double>(n) : 1.0;
  rep.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
  rep.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
  return rep;
}

}  // namespace diarkit
