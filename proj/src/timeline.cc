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

#include "diarkit/timeline.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <map>
#include <sstream>

#include "diarkit/error.h"

namespace diarkit {

Segment::Segment(double start, double end) : start_(start), end_(end) {
  if (!std::isfinite(start) || !std::isfinite(end)) {
    throw Error("segment bounds must be finite");
  }
  if (start < 0.0) {
    std::ostringstream os;
    os << "segment start " << start << " is negative";
    throw Error(os.str());
  }
  if (!(end - start > kTimeEps)) {
    std::ostringstream os;
    os << "empty segment [" << start << ", " << end << ")";
    throw Error(os.str());
  }
}

double Segment::distance(const Segment &other) const {
  if (other.start_ >= end_) return other.start_ - end_;
  if (start_ >= other.end_) return start_ - other.end_;
  return 0.0;
}

bool make_segment(double start, double end, Segment *out) {
  if (!std::isfinite(start) || !std::isfinite(end)) return false;
  start = std::max(start, 0.0);
  if (!(end - start > kTimeEps)) return false;
  *out = Segment(start, end);
  return true;
}

Timeline::Timeline(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  std::sort(segments_.begin(), segments_.end());
}

void Timeline::add(const Segment &s) {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s);
  segments_.insert(it, s);
}

double Timeline::duration() const {
  double total = 0.0;
  for (const auto &s : segments_) total += s.duration();
  return total;
}

Segment Timeline::extent() const {
  if (segments_.empty()) throw Error("extent of an empty timeline");
  double end = segments_.front().end();
  for (const auto &s : segments_) end = std::max(end, s.end());
  return Segment(segments_.front().start(), end);
}

bool Timeline::contains(double t) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double v, const Segment &s) { return v < s.start(); });
  return it != segments_.begin() && std::prev(it)->contains(t);
}

Timeline support(const Timeline &timeline, double collar) {
  if (collar < 0.0) throw Error("collar must be non-negative");
  std::vector<Segment> out;
  for (const auto &s : timeline) {
    if (!out.empty() && s.start() - out.back().end() <= collar + kTimeEps) {
      if (s.end() > out.back().end()) {
        out.back() = Segment(out.back().start(), s.end());
      }
    } else {
      out.push_back(s);
    }
  }
  return Timeline(std::move(out));
}

Timeline intersect(const Timeline &a, const Timeline &b) {
  const Timeline sa = support(a), sb = support(b);
  std::vector<Segment> out;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const Segment &x = sa.segments()[i];
    const Segment &y = sb.segments()[j];
    Segment s(0.0, 1.0);
    if (make_segment(std::max(x.start(), y.start()), std::min(x.end(), y.end()),
                     &s)) {
      out.push_back(s);
    }
    if (x.end() < y.end()) {
      ++i;
    } else {
      ++j;
    }
  }
  return Timeline(std::move(out));
}

Timeline subtract(const Timeline &a, const Timeline &b) {
  const Timeline sa = support(a), sb = support(b);
  std::vector<Segment> out;
  std::size_t j = 0;
  for (const auto &x : sa) {
    double cursor = x.start();
    while (j < sb.size() && sb.segments()[j].end() <= cursor) ++j;
    std::size_t k = j;
    while (k < sb.size() && sb.segments()[k].start() < x.end()) {
      const Segment &y = sb.segments()[k];
      Segment s(0.0, 1.0);
      if (make_segment(cursor, std::min(y.start(), x.end()), &s)) {
        out.push_back(s);
      }
      cursor = std::max(cursor, y.end());
      ++k;
    }
    Segment s(0.0, 1.0);
    if (make_segment(cursor, x.end(), &s)) out.push_back(s);
  }
  return Timeline(std::move(out));
}

Timeline crop(const Timeline &timeline, const Segment &window) {
  std::vector<Segment> out;
  for (const auto &s : timeline) {
    Segment c(0.0, 1.0);
    if (make_segment(std::max(s.start(), window.start()),
                     std::min(s.end(), window.end()), &c)) {
      out.push_back(c);
    }
  }
  return Timeline(std::move(out));
}

namespace {

void check_label(const std::string &label) {
  if (label.empty()) throw Error("empty speaker label");
  for (unsigned char c : label) {
    if (std::isspace(c)) throw Error("speaker label '" + label + "' has whitespace");
  }
}

}  // namespace

Annotation::Annotation(std::string recording_id,
                       std::vector<LabeledSegment> entries)
    : recording_id_(std::move(recording_id)) {
  for (auto &e : entries) add(e.segment, e.label);
}

void Annotation::add(const Segment &segment, const std::string &label) {
  check_label(label);
  entries_.push_back({segment, label});
}

void Annotation::add(const Timeline &timeline, const std::string &label) {
  for (const auto &s : timeline) add(s, label);
}

std::vector<std::string> Annotation::labels() const {
  std::set<std::string> set;
  for (const auto &e : entries_) set.insert(e.label);
  return {set.begin(), set.end()};
}

Timeline Annotation::label_timeline(const std::string &label) const {
  std::vector<Segment> segs;
  for (const auto &e : entries_) {
    if (e.label == label) segs.push_back(e.segment);
  }
  return support(Timeline(std::move(segs)));
}

Timeline Annotation::speech() const {
  std::vector<Segment> segs;
  segs.reserve(entries_.size());
  for (const auto &e : entries_) segs.push_back(e.segment);
  return support(Timeline(std::move(segs)));
}

std::set<std::string> Annotation::labels_at(double t) const {
  std::set<std::string> out;
  for (const auto &e : entries_) {
    if (e.segment.contains(t)) out.insert(e.label);
  }
  return out;
}

Annotation Annotation::normalized() const {
  std::vector<LabeledSegment> out;
  for (const auto &label : labels()) {
    for (const auto &s : label_timeline(label)) out.push_back({s, label});
  }
  std::sort(out.begin(), out.end(),
            [](const LabeledSegment &a, const LabeledSegment &b) {
              if (a.segment.start() != b.segment.start()) {
                return a.segment.start() < b.segment.start();
              }
              if (a.label != b.label) return a.label < b.label;
              return a.segment.end() < b.segment.end();
            });
  Annotation result(recording_id_);
  result.entries_ = std::move(out);
  return result;
}

double Annotation::labeled_duration() const {
  double total = 0.0;
  for (const auto &label : labels()) total += label_timeline(label).duration();
  return total;
}

Segment Annotation::extent() const { return speech().extent(); }

Annotation crop(const Annotation &annotation, const Segment &window) {
  Annotation out(annotation.recording_id());
  for (const auto &e : annotation.entries()) {
    Segment c(0.0, 1.0);
    if (make_segment(std::max(e.segment.start(), window.start()),
                     std::min(e.segment.end(), window.end()), &c)) {
      out.add(c, e.label);
    }
  }
  return out;
}

Annotation crop(const Annotation &annotation, const Timeline &mask) {
  Annotation out(annotation.recording_id());
  for (const auto &label : annotation.labels()) {
    out.add(intersect(annotation.label_timeline(label), mask), label);
  }
  return out.normalized();
}

Timeline overlap_regions(const Annotation &annotation) {
  // Sweep over per-label supports so a label never overlaps itself.
  std::vector<std::pair<double, int>> events;
  for (const auto &label : annotation.labels()) {
    for (const auto &s : annotation.label_timeline(label)) {
      events.emplace_back(s.start(), +1);
      events.emplace_back(s.end(), -1);
    }
  }
  // Ends sort before starts at equal times (half-open intervals).
  std::sort(events.begin(), events.end());
  std::vector<Segment> out;
  int active = 0;
  double open = 0.0;
  for (const auto &[t, delta] : events) {
    const int before = active;
    active += delta;
    if (before < 2 && active >= 2) open = t;
    if (before >= 2 && active < 2) {
      Segment s(0.0, 1.0);
      if (make_segment(open, t, &s)) out.push_back(s);
    }
  }
  return support(Timeline(std::move(out)));
}

std::vector<std::set<std::string>> discretize(const Annotation &annotation,
                                              double step,
                                              const Segment &extent) {
  if (!(step > 0.0)) throw Error("discretize: step must be positive");
  const auto n = static_cast<std::size_t>(
      std::floor(extent.duration() / step + kTimeEps));
  std::vector<std::set<std::string>> frames(n);
  for (const auto &label : annotation.labels()) {
    const Timeline tl = annotation.label_timeline(label);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = extent.start() + (static_cast<double>(i) + 0.5) * step;
      while (k < tl.size() && tl.segments()[k].end() <= t) ++k;
      if (k < tl.size() && tl.segments()[k].contains(t)) frames[i].insert(label);
    }
  }
  return frames;
}

std::vector<double> sorted_boundaries(std::vector<double> boundaries) {
  std::sort(boundaries.begin(), boundaries.end());
  std::vector<double> out;
  for (double b : boundaries) {
    if (out.empty() || b - out.back() > kTimeEps) out.push_back(b);
  }
  return out;
}

}  // namespace diarkit
