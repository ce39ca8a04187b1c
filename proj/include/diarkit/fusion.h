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

#ifndef DIARKIT_FUSION_H_
#define DIARKIT_FUSION_H_

// Overlap-aware fusion of diarization hypotheses (DOVER-Lap style): labels
// are first aligned to an anchor hypothesis, then every homogeneous region
// votes on how many speakers are active and which ones.

#include <vector>

#include "diarkit/timeline.h"

namespace diarkit {

enum class FusionWeighting { kUniform, kRank };

// Hypothesis 0 keeps its labels. Every other hypothesis is mapped one-to-one
// onto the anchor's labels by maximum overlap; leftovers get fresh labels.
std::vector<Annotation> map_labels(const std::vector<Annotation> &hypotheses);

// kUniform: 1/n each. kRank: proportional to 1 / (k + 1).
std::vector<double> fusion_weights(std::size_t n, FusionWeighting weighting);

// Weighted region vote over already mapped hypotheses. The number of output
// speakers in a region is round-half-up of the weighted mean speaker count;
// the speakers with the most weight win, ties to the smaller label.
Annotation fuse(const std::vector<Annotation> &mapped,
                std::vector<double> weights = {});

inline Annotation dover_lap(const std::vector<Annotation> &hypotheses,
                            std::vector<double> weights = {}) {
  return fuse(map_labels(hypotheses), std::move(weights));
}

}  // namespace diarkit

#endif  // DIARKIT_FUSION_H_
