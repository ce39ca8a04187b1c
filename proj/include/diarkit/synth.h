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

#ifndef DIARKIT_SYNTH_H_
#define DIARKIT_SYNTH_H_

// Synthetic conversations drawn from the PLDA generative model, used as
// test data with known ground truth.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "diarkit/embed.h"
#include "diarkit/formats.h"
#include "diarkit/timeline.h"

namespace diarkit {

struct SynthRecipe {
  std::string recording_id = "synth";
  int speakers = 3;
  int turns = 20;
  double overlap_ratio = 0.0;  // overlapped / total speech time, roughly
  int dim = 128;
  double phi = 4.0;            // largest across-speaker variance
  std::uint64_t seed = 0;
  double min_turn = 3.0;       // seconds
  double max_turn = 8.0;
  int max_windows = 0;         // > 0: add turns, then truncate to this many
  double score_step = 0.01;
  WindowingConfig windows;

  void validate() const;
};

struct SynthRecording {
  Annotation reference;
  XVectorSequence xvectors;          // raw vectors, identity backend
  std::vector<int> window_speakers;  // true dominant speaker per window
  FrameScores vad;                   // 1 in speech, 0 elsewhere
  FrameScores osd;                   // 1 in overlap, 0 elsewhere
  BackendModel model;
};

// Across-speaker variances decreasing linearly from `scale` to scale / 2.
Eigen::VectorXd synthetic_phi(int dim, double scale);

SynthRecording generate_synthetic(const SynthRecipe &recipe);

struct SynthCorpusOptions {
  int recordings = 10;
  int min_speakers = 2;
  int max_speakers = 4;
  SynthRecipe base;  // recording_id, speakers and seed are overridden
};

// Writes <id>.xvec, <id>.vad.post, <id>.osd.post, ref.rttm, model.json and a
// ready-to-run config.json into `dir`. Returns the recording ids.
std::vector<std::string> write_synthetic_corpus(const std::string &dir,
                                                const SynthCorpusOptions &options);

}  // namespace diarkit

#endif  // DIARKIT_SYNTH_H_
