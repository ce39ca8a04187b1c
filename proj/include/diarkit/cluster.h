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

#ifndef DIARKIT_CLUSTER_H_
#define DIARKIT_CLUSTER_H_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diarkit/timeline.h"

namespace diarkit {

struct AhcConfig {
  double threshold = -0.015;  // stop once the best average linkage <= this
};

// Average-linkage agglomerative clustering on a similarity matrix. The pair
// with the highest average similarity is merged while it exceeds the
// threshold; ties go to the lexicographically smallest pair of cluster ids,
// a cluster's id being its smallest member index. The diagonal is ignored.
// Labels are renumbered in order of first occurrence.
std::vector<int> ahc(const Eigen::MatrixXd &similarity, const AhcConfig &cfg = {});

struct NmeScConfig {
  int max_speakers = 20;
  // Candidate neighbour counts [p_min, p_max], clipped to [1, T - 1]. A row
  // keeps its p highest entries, itself included. p_max = 0 means
  // p_max_fraction * T.
  int p_min = 4;
  int p_max = 0;
  double p_max_fraction = 0.5;
  // At most this many evenly spaced candidates are evaluated (0 = all).
  int max_candidates = 30;
  int kmeans_restarts = 100;
  int kmeans_max_iters = 300;
  std::uint64_t seed = 0;
};

struct NmeScResult {
  std::vector<int> labels;
  int num_speakers = 1;
  int p = 0;              // selected neighbour count
  double ratio = 0.0;     // p / (max eigengap / largest eigenvalue)
};

// Spectral clustering that picks the affinity sparsity and the number of
// speakers from the normalized maximum eigengap of the graph Laplacian.
NmeScResult nme_sc_detailed(const Eigen::MatrixXd &similarity,
                            const NmeScConfig &cfg = {});
inline std::vector<int> nme_sc(const Eigen::MatrixXd &similarity,
                               const NmeScConfig &cfg = {}) {
  return nme_sc_detailed(similarity, cfg).labels;
}

// Row-pruned affinity: the p largest entries of each row (diagonal
// included) are kept, negatives clipped to zero, symmetrized by max.
Eigen::MatrixXd pruned_affinity(const Eigen::MatrixXd &similarity, int p);

// Best of `restarts` k-means++ runs by inertia; deterministic in `seed`.
std::vector<int> kmeans(const Eigen::MatrixXd &points, int k, int restarts,
                        int max_iters, std::uint64_t seed);

// Renumbers labels to 0, 1, ... in order of first occurrence.
std::vector<int> relabel_by_first_occurrence(const std::vector<int> &labels);

// Part of the timeline each window speaks for: neighbouring overlapping
// windows split at the midpoint of their centers. Windows must be sorted;
// a duplicated window gets no territory.
std::vector<std::optional<Segment>> window_territories(
    const std::vector<Segment> &windows);

std::string speaker_name(int index);

// Paints per-window labels back onto the timeline as spk00, spk01, ...
Annotation labels_to_annotation(const std::vector<int> &labels,
                                const std::vector<Segment> &windows,
                                const std::string &recording_id);

}  // namespace diarkit

#endif  // DIARKIT_CLUSTER_H_
