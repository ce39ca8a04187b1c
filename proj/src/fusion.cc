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

#include "diarkit/fusion.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "diarkit/error.h"
#include "diarkit/hungarian.h"
#include "diarkit/metrics.h"

namespace diarkit {

std::vector<Annotation> map_labels(const std::vector<Annotation> &hypotheses) {
  if (hypotheses.empty()) return {};
  std::vector<Annotation> out{hypotheses.front()};
  const Annotation &anchor = hypotheses.front();
  const auto anchor_labels = anchor.labels();
  std::set<std::string> taken(anchor_labels.begin(), anchor_labels.end());

  for (std::size_t k = 1; k < hypotheses.size(); ++k) {
    const Annotation &h = hypotheses[k];
    const auto labels = h.labels();
    std::map<std::string, std::string> rename;
    if (!labels.empty() && !anchor_labels.empty()) {
      const Eigen::MatrixXd w = overlap_durations(h, anchor, labels, anchor_labels);
      const std::vector<int> assign = max_weight_assignment(w);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (assign[i] >= 0 && w(i, assign[i]) > kTimeEps) {
          rename[labels[i]] = anchor_labels[assign[i]];
        }
      }
    }
    for (const auto &l : labels) {
      if (rename.count(l)) continue;
      std::string fresh = l + "@" + std::to_string(k);
      while (taken.count(fresh)) fresh += "'";
      taken.insert(fresh);
      rename[l] = fresh;
    }
    Annotation mapped(h.recording_id());
    for (const auto &e : h.entries()) mapped.add(e.segment, rename.at(e.label));
    out.push_back(std::move(mapped));
  }
  return out;
}

std::vector<double> fusion_weights(std::size_t n, FusionWeighting weighting) {
  std::vector<double> w(n, 1.0);
  if (weighting == FusionWeighting::kRank) {
    for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / static_cast<double>(k + 1);
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double &v : w) v /= sum;
  return w;
}

Annotation fuse(const std::vector<Annotation> &mapped, std::vector<double> weights) {
  if (mapped.empty()) throw Error("fuse: no hypotheses");
  if (weights.empty()) weights = fusion_weights(mapped.size(), FusionWeighting::kUniform);
  if (weights.size() != mapped.size()) throw Error("fuse: one weight per hypothesis required");
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(wsum > 0.0)) throw Error("fuse: weights must sum to a positive value");
  for (double &w : weights) {
    if (w < 0.0) throw Error("fuse: negative weight");
    w /= wsum;
  }

  struct Track {
    std::string label;
    std::size_t hyp;
    Timeline timeline;
  };
  std::vector<Track> tracks;
  std::set<std::string> all_labels;
  std::vector<double> cuts;
  for (std::size_t k = 0; k < mapped.size(); ++k) {
    for (const auto &l : mapped[k].labels()) {
      tracks.push_back({l, k, mapped[k].label_timeline(l)});
      all_labels.insert(l);
      for (const auto &s : tracks.back().timeline) {
        cuts.push_back(s.start());
        cuts.push_back(s.end());
      }
    }
  }
  cuts = sorted_boundaries(std::move(cuts));

  Annotation out(mapped.front().recording_id());
  const std::vector<std::string> label_list(all_labels.begin(), all_labels.end());
  std::vector<double> vote(label_list.size());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
    std::fill(vote.begin(), vote.end(), 0.0);
    double expected = 0.0;
    for (const auto &tr : tracks) {
      if (!tr.timeline.contains(mid)) continue;
      expected += weights[tr.hyp];
      const auto idx = std::lower_bound(label_list.begin(), label_list.end(), tr.label) -
                       label_list.begin();
      vote[idx] += weights[tr.hyp];
    }
    // Half-up rounding; the epsilon absorbs weight-sum rounding at x.5.
    const auto n_out = static_cast<std::size_t>(std::floor(expected + 0.5 + 1e-9));
    if (n_out == 0) continue;
    std::vector<std::size_t> order(label_list.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vote[a] > vote[b]; });
    const Segment region(cuts[c], cuts[c + 1]);
    for (std::size_t r = 0; r < std::min(n_out, order.size()); ++r) {
      if (vote[order[r]] <= 0.0) break;
      out.add(region, label_list[order[r]]);
    }
  }
  return out.normalized();
}

}  // namespace diarkit
