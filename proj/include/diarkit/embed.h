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

#ifndef DIARKIT_EMBED_H_
#define DIARKIT_EMBED_H_

#include <Eigen/Dense>
#include <vector>

#include "diarkit/formats.h"
#include "diarkit/timeline.h"

namespace diarkit {

struct WindowingConfig {
  double window = 1.44;
  double shift = 0.24;

  void validate() const;
};

// Embedding windows inside each speech segment. Segments no longer than
// `window` yield themselves; longer ones get windows every `shift` seconds
// plus an end-aligned last window when the grid does not reach the end.
std::vector<Segment> plan_windows(const Timeline &speech,
                                  const WindowingConfig &cfg = {});

// Rows mapped to lda^T (v - mean) and rescaled to `target_norm`; a
// non-positive target selects sqrt(lda_dim).
XVectorSequence preprocess(const XVectorSequence &x, const BackendModel &model,
                           double target_norm = 0.0);

// Subtracts the per-recording mean of the rows.
XVectorSequence center_recording(const XVectorSequence &x);

// Pairwise cosine similarities; throws on a zero-norm row.
Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd &rows);
inline Eigen::MatrixXd cosine_matrix(const XVectorSequence &x) {
  return cosine_matrix(x.vectors);
}

}  // namespace diarkit

#endif  // DIARKIT_EMBED_H_
