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

#include "diarkit/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "diarkit/error.h"
#include "diarkit/hungarian.h"

namespace diarkit {

Eigen::MatrixXd overlap_durations(const Annotation &ref, const Annotation &hyp,
                                  const std::vector<std::string> &ref_labels,
                                  const std::vector<std::string> &hyp_labels) {
  std::vector<Timeline> hyp_tl;
  for (const auto &h : hyp_labels) hyp_tl.push_back(hyp.label_timeline(h));
  Eigen::MatrixXd m(ref_labels.size(), hyp_labels.size());
  for (std::size_t i = 0; i < ref_labels.size(); ++i) {
    const Timeline r = ref.label_timeline(ref_labels[i]);
    for (std::size_t j = 0; j < hyp_labels.size(); ++j) {
      m(i, j) = intersect(r, hyp_tl[j]).duration();
    }
  }
  return m;
}

LabelMapping optimal_mapping(const Annotation &ref, const Annotation &hyp) {
  const auto ref_labels = ref.labels();
  const auto hyp_labels = hyp.labels();
  LabelMapping mapping;
  if (ref_labels.empty() || hyp_labels.empty()) return mapping;
  const Eigen::MatrixXd w = overlap_durations(ref, hyp, ref_labels, hyp_labels);
  const std::vector<int> assign = max_weight_assignment(w);
  for (std::size_t i = 0; i < assign.size(); ++i) {
    if (assign[i] >= 0 && w(i, assign[i]) > kTimeEps) {
      mapping[ref_labels[i]] = hyp_labels[assign[i]];
    }
  }
  return mapping;
}

DerBreakdown &DerBreakdown::operator+=(const DerBreakdown &other) {
  missed += other.missed;
  false_alarm += other.false_alarm;
  confusion += other.confusion;
  total += other.total;
  finalize();
  return *this;
}

void DerBreakdown::finalize() {
  der = total > 0.0 ? (missed + false_alarm + confusion) / total : 0.0;
}

DerBreakdown der(const Annotation &ref, const Annotation &hyp, double collar,
                 bool skip_overlap) {
  if (collar < 0.0) throw Error("der: collar must be non-negative");
  const auto ref_labels = ref.labels();
  const auto hyp_labels = hyp.labels();
  std::vector<Timeline> ref_tl, hyp_tl;
  std::vector<double> cuts;
  for (const auto &l : ref_labels) {
    ref_tl.push_back(ref.label_timeline(l));
    for (const auto &s : ref_tl.back()) {
      cuts.push_back(s.start());
      cuts.push_back(s.end());
    }
  }
  for (const auto &l : hyp_labels) {
    hyp_tl.push_back(hyp.label_timeline(l));
    for (const auto &s : hyp_tl.back()) {
      cuts.push_back(s.start());
      cuts.push_back(s.end());
    }
  }

  // No-score zones around reference boundaries.
  std::vector<Segment> zones;
  if (collar > 0.0) {
    for (const auto &tl : ref_tl) {
      for (const auto &s : tl) {
        for (double b : {s.start(), s.end()}) {
          Segment z(0.0, 1.0);
          if (make_segment(b - 0.5 * collar, b + 0.5 * collar, &z)) zones.push_back(z);
        }
      }
    }
  }
  Timeline no_score = support(Timeline(std::move(zones)));
  if (skip_overlap) {
    std::vector<Segment> segs(no_score.begin(), no_score.end());
    for (const auto &s : overlap_regions(ref)) segs.push_back(s);
    no_score = support(Timeline(std::move(segs)));
  }
  for (const auto &s : no_score) {
    cuts.push_back(s.start());
    cuts.push_back(s.end());
  }
  cuts = sorted_boundaries(std::move(cuts));

  // Mapping indices: ref label i -> hyp label index or -1.
  const LabelMapping mapping = optimal_mapping(ref, hyp);
  std::vector<int> mapped(ref_labels.size(), -1);
  for (std::size_t i = 0; i < ref_labels.size(); ++i) {
    auto it = mapping.find(ref_labels[i]);
    if (it == mapping.end()) continue;
    mapped[i] = static_cast<int>(
        std::lower_bound(hyp_labels.begin(), hyp_labels.end(), it->second) -
        hyp_labels.begin());
  }

  DerBreakdown out;
  std::vector<char> hyp_on(hyp_labels.size());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    const double d = cuts[k + 1] - cuts[k];
    if (no_score.contains(mid)) continue;
    int n_ref = 0, n_hyp = 0, n_correct = 0;
    for (std::size_t j = 0; j < hyp_tl.size(); ++j) {
      hyp_on[j] = hyp_tl[j].contains(mid);
      n_hyp += hyp_on[j];
    }
    for (std::size_t i = 0; i < ref_tl.size(); ++i) {
      if (!ref_tl[i].contains(mid)) continue;
      ++n_ref;
      if (mapped[i] >= 0 && hyp_on[mapped[i]]) ++n_correct;
    }
    out.total += d * n_ref;
    out.missed += d * std::max(0, n_ref - n_hyp);
    out.false_alarm += d * std::max(0, n_hyp - n_ref);
    out.confusion += d * (std::min(n_ref, n_hyp) - n_correct);
  }
  if (!(out.total > 0.0)) throw Error("der: reference has no scored speech");
  out.finalize();
  return out;
}

JerResult jer_detailed(const Annotation &ref, const Annotation &hyp) {
  const auto ref_labels = ref.labels();
  if (ref_labels.empty()) throw Error("jer: reference has no speakers");
  const LabelMapping mapping = optimal_mapping(ref, hyp);
  JerResult out;
  for (const auto &r : ref_labels) {
    ++out.speakers;
    auto it = mapping.find(r);
    if (it == mapping.end()) {
      out.sum += 1.0;
      continue;
    }
    const Timeline rt = ref.label_timeline(r), ht = hyp.label_timeline(it->second);
    const double inter = intersect(rt, ht).duration();
    std::vector<Segment> both(rt.begin(), rt.end());
    both.insert(both.end(), ht.begin(), ht.end());
    const double uni = support(Timeline(std::move(both))).duration();
    out.sum += 1.0 - inter / uni;
  }
  out.jer = out.sum / out.speakers;
  return out;
}

double cosine_score(std::span<const double> enrol, std::span<const double> test,
                    std::span<const double> mean) {
  if (enrol.size() != test.size() || enrol.size() != mean.size()) {
    throw Error("cosine_score: dimension mismatch");
  }
  double dot = 0.0, ne = 0.0, nt = 0.0;
  for (std::size_t i = 0; i < enrol.size(); ++i) {
    const double e = enrol[i] - mean[i], t = test[i] - mean[i];
    dot += e * t;
    ne += e * e;
    nt += t * t;
  }
  if (!(ne > 0.0) || !(nt > 0.0)) {
    throw Error("cosine_score: zero vector after mean subtraction");
  }
  return dot / (std::sqrt(ne) * std::sqrt(nt));
}

TrialScores fuse_scores(const std::vector<TrialScores> &systems,
                        std::vector<double> weights) {
  if (systems.empty()) throw Error("fuse_scores: no systems");
  const std::size_t n = systems.front().size();
  for (const auto &s : systems) {
    if (s.size() != n) throw Error("fuse_scores: systems have different trial counts");
  }
  if (weights.empty()) weights.assign(systems.size(), 1.0);
  if (weights.size() != systems.size()) {
    throw Error("fuse_scores: one weight per system required");
  }
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(wsum > 0.0)) throw Error("fuse_scores: weights must sum to a positive value");

  TrialScores fused(n);
  for (std::size_t k = 0; k < systems.size(); ++k) {
    const auto &s = systems[k];
    double mean = 0.0, var = 0.0;
    for (const auto &t : s) mean += t.score;
    mean /= std::max<std::size_t>(n, 1);
    for (const auto &t : s) var += (t.score - mean) * (t.score - mean);
    const double sd = n > 1 ? std::sqrt(var / n) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i].target != systems.front()[i].target) {
        throw Error("fuse_scores: trial " + std::to_string(i) +
                    " has inconsistent target labels");
      }
      const double z = sd > 0.0 ? (s[i].score - mean) / sd : s[i].score - mean;
      fused[i].score += weights[k] / wsum * z;
      fused[i].target = s[i].target;
    }
  }
  return fused;
}

namespace {

struct OperatingPoint {
  double p_fa;
  double p_miss;
};

// Operating points from accepting nothing to accepting everything; trials
// with equal scores enter together.
std::vector<OperatingPoint> operating_points(const TrialScores &trials) {
  std::size_t n_tar = 0, n_non = 0;
  for (const auto &t : trials) (t.target ? n_tar : n_non) += 1;
  if (n_tar == 0 || n_non == 0) {
    throw Error("need at least one target and one nontarget trial");
  }
  std::vector<Trial> sorted = trials;
  std::sort(sorted.begin(), sorted.end(),
            [](const Trial &a, const Trial &b) { return a.score > b.score; });
  std::vector<OperatingPoint> points{{0.0, 1.0}};
  std::size_t tar = 0, non = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      (sorted[j].target ? tar : non) += 1;
      ++j;
    }
    points.push_back({static_cast<double>(non) / n_non,
                      1.0 - static_cast<double>(tar) / n_tar});
    i = j;
  }
  return points;
}

}  // namespace

double eer(const TrialScores &trials) {
  const auto points = operating_points(trials);
  for (std::size_t k = 1; k < points.size(); ++k) {
    const auto &a = points[k - 1], &b = points[k];
    if (b.p_fa >= b.p_miss) {
      const double da = a.p_miss - a.p_fa;  // > 0
      const double db = b.p_miss - b.p_fa;  // <= 0
      const double alpha = da / (da - db);
      return a.p_fa + alpha * (b.p_fa - a.p_fa);
    }
  }
  return points.back().p_fa;  // unreachable: the last point has p_miss = 0
}

double min_dcf(const TrialScores &trials, double p_target, double c_miss,
               double c_fa) {
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw Error("min_dcf: p_target must lie in (0, 1)");
  }
  const auto points = operating_points(trials);
  double best = std::numeric_limits<double>::infinity();
  for (const auto &p : points) {
    best = std::min(best, c_miss * p_target * p.p_miss +
                              c_fa * (1.0 - p_target) * p.p_fa);
  }
  return best / std::min(c_miss * p_target, c_fa * (1.0 - p_target));
}

}  // namespace diarkit
