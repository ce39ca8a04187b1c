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

#ifndef DIARKIT_VAD_H_
#define DIARKIT_VAD_H_

#include <span>

#include "diarkit/formats.h"
#include "diarkit/timeline.h"

namespace diarkit {

// Two-threshold binarization followed by padding, gap filling and removal
// of short regions, applied in that order.
struct HysteresisConfig {
  double onset = 0.5;   // inactive -> active when score >= onset
  double offset = 0.5;  // active -> inactive when score < offset
  double min_duration_on = 0.0;
  double min_duration_off = 0.0;
  double pad_onset = 0.0;
  double pad_offset = 0.0;

  void validate() const;
};

// Default VAD post-processing: fills silences shorter than 0.501 s.
HysteresisConfig default_vad_config();

// Per-frame log mean-square energy (floored at -30), min-max normalized to
// [0, 1] over the recording. step = hop, offset = frame / 2.
FrameScores energy_scores(std::span<const double> samples, int sample_rate,
                          double frame = 0.025, double hop = 0.010);

Timeline binarize(const FrameScores &scores, const HysteresisConfig &cfg);

struct DetectionReport {
  double deter = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double false_alarm = 0.0;  // seconds
  double missed = 0.0;       // seconds
  double reference = 0.0;    // seconds of reference positives
};

// Frame-level detection scores over `extent`, frames centered at
// extent.start + (i + 0.5) * step. Precision (recall) is 1 when there are no
// hypothesis (reference) positives. Throws when the reference is empty but
// the hypothesis is not.
DetectionReport detection_report(const Timeline &reference,
                                 const Timeline &hypothesis,
                                 const Segment &extent, double step = 0.01);

}  // namespace diarkit

#endif  // DIARKIT_VAD_H_
