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

#include "diarkit/overlap.h"

#include <algorithm>
#include <limits>

#include "diarkit/cluster.h"

namespace diarkit {

HysteresisConfig default_osd_config() {
  HysteresisConfig cfg;
  cfg.onset = 0.8;
  cfg.offset = 0.7;
  return cfg;
}

Annotation assign_second_vbx(const Annotation &primary,
                             const std::vector<WindowLabel> &second,
                             const Timeline &osd) {
  Annotation out = primary.normalized();
  if (osd.empty()) return out;
  const Timeline mask = support(osd);
  std::vector<Segment> windows;
  windows.reserve(second.size());
  for (const auto &wl : second) windows.push_back(wl.window);
  const auto territory = window_territories(windows);
  for (std::size_t t = 0; t < second.size(); ++t) {
    if (!second[t].label || !territory[t]) continue;
    const std::string &label = *second[t].label;
    Timeline region = intersect(Timeline({*territory[t]}), mask);
    if (region.empty()) continue;
    region = subtract(region, primary.label_timeline(label));
    out.add(region, label);
  }
  return out.normalized();
}

Annotation assign_second_heuristic(const Annotation &primary, const Timeline &osd) {
  Annotation out = primary.normalized();
  const auto labels = primary.labels();
  if (labels.size() < 2 || osd.empty()) return out;
  std::vector<Timeline> tl;
  for (const auto &l : labels) tl.push_back(primary.label_timeline(l));

  for (const auto &region : support(osd)) {
    std::vector<double> cuts{region.start(), region.end()};
    for (const auto &t : tl) {
      for (const auto &s : t) {
        if (s.start() > region.start() && s.start() < region.end()) cuts.push_back(s.start());
        if (s.end() > region.start() && s.end() < region.end()) cuts.push_back(s.end());
      }
    }
    cuts = sorted_boundaries(std::move(cuts));
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      Segment piece(0.0, 1.0);
      if (!make_segment(cuts[k], cuts[k + 1], &piece)) continue;
      const double mid = piece.center();
      int local = -1, active = 0;
      for (std::size_t i = 0; i < tl.size(); ++i) {
        if (tl[i].contains(mid)) {
          local = static_cast<int>(i);
          ++active;
        }
      }
      if (active != 1) continue;  // no primary speaker, or already overlapped
      int pick = -1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < tl.size(); ++i) {
        if (static_cast<int>(i) == local) continue;
        double d = std::numeric_limits<double>::infinity();
        for (const auto &s : tl[i]) d = std::min(d, s.distance(region));
        // labels are sorted, so strict < keeps the smaller label on ties.
        if (d < best - kTimeEps) {
          best = d;
          pick = static_cast<int>(i);
        }
      }
      if (pick >= 0) out.add(piece, labels[pick]);
    }
  }
  return out.normalized();
}

DetectionReport osd_report(const Annotation &ref, const Timeline &hypothesis,
                           const Segment &extent, double step) {
  return detection_report(overlap_regions(ref), hypothesis, extent, step);
}

}  // namespace diarkit
