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

#ifndef DIARKIT_OVERLAP_H_
#define DIARKIT_OVERLAP_H_

#include <vector>

#include "diarkit/formats.h"
#include "diarkit/timeline.h"
#include "diarkit/vad.h"

namespace diarkit {

// onset 0.8 / offset 0.7, no duration constraints.
HysteresisConfig default_osd_config();

inline Timeline osd_binarize(const FrameScores &scores,
                             const HysteresisConfig &cfg = default_osd_config()) {
  return binarize(scores, cfg);
}

// Adds each window's second speaker inside detected overlap, restricted to
// the window's territory (midpoint rule) and to instants where that speaker
// is not already the primary one. Second labels outside `osd` are dropped.
Annotation assign_second_vbx(const Annotation &primary,
                             const std::vector<WindowLabel> &second,
                             const Timeline &osd);

// For every overlap region, split at primary speaker changes, adds the
// speaker (other than the local primary) whose segments come closest to the
// region; distance is the boundary gap, 0 when intersecting. Ties go to the
// lexicographically smaller label.
Annotation assign_second_heuristic(const Annotation &primary, const Timeline &osd);

// Detection scores of `hypothesis` against the overlap regions of `ref`.
DetectionReport osd_report(const Annotation &ref, const Timeline &hypothesis,
                           const Segment &extent, double step = 0.01);

}  // namespace diarkit

#endif  // DIARKIT_OVERLAP_H_
