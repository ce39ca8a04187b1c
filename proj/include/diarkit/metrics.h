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

#ifndef DIARKIT_METRICS_H_
#define DIARKIT_METRICS_H_

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "diarkit/timeline.h"

namespace diarkit {

// Reference label -> hypothesis label.
using LabelMapping = std::map<std::string, std::string>;

// overlap(i, j) = seconds where ref label i and hyp label j are both active.
Eigen::MatrixXd overlap_durations(const Annotation &ref, const Annotation &hyp,
                                  const std::vector<std::string> &ref_labels,
                                  const std::vector<std::string> &hyp_labels);

// One-to-one mapping maximising total overlap duration. Pairs that never
// overlap are left unmapped.
LabelMapping optimal_mapping(const Annotation &ref, const Annotation &hyp);

struct DerBreakdown {
  double missed = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;
  double total = 0.0;  // scored reference speech, overlap counted per speaker
  double der = 0.0;

  DerBreakdown &operator+=(const DerBreakdown &other);
  void finalize();  // recomputes der from the components
};

// Diarization error rate. A no-score zone `collar` seconds wide is centered
// on every reference segment boundary; with skip_overlap, regions where the
// reference has two or more speakers are not scored either.
DerBreakdown der(const Annotation &ref, const Annotation &hyp,
                 double collar = 0.25, bool skip_overlap = false);

struct JerResult {
  double jer = 0.0;     // mean over reference speakers
  double sum = 0.0;     // sum of per-speaker errors
  int speakers = 0;
};

// Jaccard error rate, no collar. Unmapped reference speakers score 1.
JerResult jer_detailed(const Annotation &ref, const Annotation &hyp);
inline double jer(const Annotation &ref, const Annotation &hyp) {
  return jer_detailed(ref, hyp).jer;
}

double cosine_score(std::span<const double> enrol, std::span<const double> test,
                    std::span<const double> mean);

struct Trial {
  double score = 0.0;
  bool target = false;
};
using TrialScores = std::vector<Trial>;

// Per-system z-normalization followed by a weighted mean; empty weights
// mean uniform.
TrialScores fuse_scores(const std::vector<TrialScores> &systems,
                        std::vector<double> weights = {});

double eer(const TrialScores &trials);
double min_dcf(const TrialScores &trials, double p_target = 0.05,
               double c_miss = 1.0, double c_fa = 1.0);

}  // namespace diarkit

#endif  // DIARKIT_METRICS_H_
