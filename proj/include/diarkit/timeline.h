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

#ifndef DIARKIT_TIMELINE_H_
#define DIARKIT_TIMELINE_H_

// Interval algebra on half-open [start, end) segments in seconds.

#include <set>
#include <string>
#include <vector>

namespace diarkit {

// Absolute tolerance for time comparisons.
inline constexpr double kTimeEps = 1e-9;

class Segment {
 public:
  // Throws diarkit::Error unless start >= 0, both finite, and end > start.
  Segment(double start, double end);

  double start() const { return start_; }
  double end() const { return end_; }
  double duration() const { return end_ - start_; }
  double center() const { return 0.5 * (start_ + end_); }

  bool contains(double t) const { return t >= start_ && t < end_; }
  bool intersects(const Segment &other) const {
    return other.start_ < end_ - kTimeEps && start_ < other.end_ - kTimeEps;
  }
  // Gap between the two segments, 0 when they intersect or touch.
  double distance(const Segment &other) const;

  friend bool operator<(const Segment &a, const Segment &b) {
    return a.start_ != b.start_ ? a.start_ < b.start_ : a.end_ < b.end_;
  }
  friend bool operator==(const Segment &a, const Segment &b) = default;

 private:
  double start_;
  double end_;
};

// Tries to build a segment; returns false for empty or negative spans.
bool make_segment(double start, double end, Segment *out);

class Timeline {
 public:
  Timeline() = default;
  explicit Timeline(std::vector<Segment> segments);

  const std::vector<Segment> &segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }
  auto begin() const { return segments_.begin(); }
  auto end() const { return segments_.end(); }

  void add(const Segment &s);
  double duration() const;
  // Extent from the first start to the last end. Requires !empty().
  Segment extent() const;
  // True when some segment contains t. Requires disjoint segments.
  bool contains(double t) const;

 private:
  std::vector<Segment> segments_;  // sorted by (start, end)
};

// Minimal disjoint cover; segments separated by a gap <= collar are merged.
Timeline support(const Timeline &timeline, double collar = 0.0);
// Pointwise intersection / difference of the two supports.
Timeline intersect(const Timeline &a, const Timeline &b);
Timeline subtract(const Timeline &a, const Timeline &b);
Timeline crop(const Timeline &timeline, const Segment &window);

struct LabeledSegment {
  Segment segment;
  std::string label;
};

class Annotation {
 public:
  Annotation() = default;
  explicit Annotation(std::string recording_id,
                      std::vector<LabeledSegment> entries = {});

  const std::string &recording_id() const { return recording_id_; }
  const std::vector<LabeledSegment> &entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Throws diarkit::Error for an empty label or one containing whitespace.
  void add(const Segment &segment, const std::string &label);
  void add(const Timeline &timeline, const std::string &label);

  // Sorted distinct labels.
  std::vector<std::string> labels() const;
  // Support of all segments carrying `label`.
  Timeline label_timeline(const std::string &label) const;
  // Support of the whole annotation (speech regardless of speaker).
  Timeline speech() const;
  // Labels active at time t.
  std::set<std::string> labels_at(double t) const;
  // Per-label merged form sorted by (start, label); same labeled duration.
  Annotation normalized() const;
  // Sum of per-label supported durations.
  double labeled_duration() const;
  Segment extent() const;

 private:
  std::string recording_id_;
  std::vector<LabeledSegment> entries_;
};

// Entries intersected with window; empty intersections dropped.
Annotation crop(const Annotation &annotation, const Segment &window);
// Entries intersected with the timeline.
Annotation crop(const Annotation &annotation, const Timeline &mask);
// Regions where at least two distinct labels are active.
Timeline overlap_regions(const Annotation &annotation);
// Label set at each frame center extent.start + (i + 0.5) * step.
std::vector<std::set<std::string>> discretize(const Annotation &annotation,
                                              double step,
                                              const Segment &extent);

// Sorts time points and drops near-duplicates (within kTimeEps).
std::vector<double> sorted_boundaries(std::vector<double> boundaries);

}  // namespace diarkit

#endif  // DIARKIT_TIMELINE_H_
