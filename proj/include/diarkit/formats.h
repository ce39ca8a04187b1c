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

#ifndef DIARKIT_FORMATS_H_
#define DIARKIT_FORMATS_H_

// Readers and writers for the on-disk formats:
//
//   RTTM   SPEAKER <file> 1 <onset> <dur> <NA> <NA> <label> <NA> <NA>
//   XVEC1  "XVEC0001", u32 count, u32 dim, then count records of
//          {f64 start, f64 end, dim x f32}; all little endian.
//   POST   "#step=<s>" and "#offset=<s>" header, one score per line.
//   MODEL  JSON object with dim, lda_dim, mean, lda (row-major D x D'), phi.
//   LAB    "<start> <end> speech" per line.
//   SECOND "<file> <start> <end> <label|<NA>>" per embedding window.
//   WAV    RIFF/WAVE, 16-bit PCM, mono.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "diarkit/timeline.h"

namespace diarkit {

struct XVectorSequence {
  std::string recording_id;
  std::vector<Segment> windows;
  Eigen::MatrixXd vectors;  // one row per window

  std::size_t size() const { return windows.size(); }
  int dim() const { return static_cast<int>(vectors.cols()); }
};

// Frame i covers [offset + i * step, offset + (i + 1) * step).
struct FrameScores {
  std::string recording_id;
  double step = 0.01;
  double offset = 0.0;
  std::vector<double> values;

  double frame_start(std::size_t i) const {
    return offset + static_cast<double>(i) * step;
  }
  double frame_end(std::size_t i) const { return frame_start(i + 1); }
};

// Centering mean, LDA projection (D x D') and across-class variances in the
// diagonalized PLDA space, sorted descending.
struct BackendModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd lda;
  Eigen::VectorXd phi;

  int dim() const { return static_cast<int>(lda.rows()); }
  int lda_dim() const { return static_cast<int>(lda.cols()); }
  // Identity projection, zero mean and the given variances.
  static BackendModel identity(const Eigen::VectorXd &phi);
};

struct WavData {
  int sample_rate = 0;
  std::vector<double> samples;  // in [-1, 1)
};

// Second most probable speaker per embedding window, absent when unknown.
struct WindowLabel {
  Segment window;
  std::optional<std::string> label;
};

std::vector<Annotation> parse_rttm(std::string_view text);
std::string emit_rttm(const std::vector<Annotation> &annotations);

XVectorSequence read_xvectors(std::string_view bytes,
                              std::string recording_id = "");
std::string write_xvectors(const XVectorSequence &xvectors);

FrameScores read_frame_scores(std::string_view text,
                              std::string recording_id = "");
std::string write_frame_scores(const FrameScores &scores);

BackendModel read_backend_model(std::string_view text);
std::string write_backend_model(const BackendModel &model);
// Throws diarkit::Error when shapes disagree or phi is not descending.
void validate(const BackendModel &model);

Timeline read_lab(std::string_view text);
std::string write_lab(const Timeline &speech);

std::vector<WindowLabel> read_second_labels(std::string_view text,
                                            std::string *recording_id);
std::string write_second_labels(const std::string &recording_id,
                                const std::vector<WindowLabel> &labels);

WavData read_wav(std::string_view bytes);
std::string write_wav(int sample_rate, const std::vector<double> &samples);

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view contents);
// File name without directory and last extension.
std::string file_stem(const std::string &path);

}  // namespace diarkit

#endif  // DIARKIT_FORMATS_H_
