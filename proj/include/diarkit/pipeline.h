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

#ifndef DIARKIT_PIPELINE_H_
#define DIARKIT_PIPELINE_H_

// End-to-end diarization: VAD -> windows -> clustering -> VBx -> overlap
// assignment -> fusion -> scoring, driven by a JSON configuration with one
// section per stage.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diarkit/cluster.h"
#include "diarkit/embed.h"
#include "diarkit/fusion.h"
#include "diarkit/metrics.h"
#include "diarkit/vad.h"
#include "diarkit/vbx.h"

namespace diarkit {

enum class Centering { kModel, kRecording };
enum class ClusterAlgo { kAhc, kNmeSc };
enum class SecondSpeaker { kNone, kVbx, kHeuristic };

// Settings that may differ between the systems of one run.
struct SystemConfig {
  std::string name = "main";
  Centering centering = Centering::kModel;
  double target_norm = 0.0;  // 0: sqrt(lda_dim)
  ClusterAlgo algo = ClusterAlgo::kAhc;
  AhcConfig ahc;
  NmeScConfig nme_sc;
  bool vbx_enabled = true;
  VbxConfig vbx;
  SecondSpeaker second = SecondSpeaker::kHeuristic;
  HysteresisConfig osd;  // defaults to default_osd_config()

  SystemConfig();
};

struct PipelineConfig {
  std::string corpus_dir = ".";
  std::vector<std::string> recordings;  // empty: every *.xvec in corpus_dir
  std::string model_path = "model.json";  // relative to corpus_dir
  std::string reference_path;             // optional, relative to corpus_dir
  std::string output_dir = "out";
  HysteresisConfig vad = default_vad_config();
  WindowingConfig windows;
  std::vector<SystemConfig> systems{SystemConfig{}};
  bool fusion_enabled = false;
  FusionWeighting fusion_weighting = FusionWeighting::kUniform;
  double collar = 0.25;
  bool skip_overlap = false;
  int jobs = 1;

  // Checks stage invariants and that the referenced files exist. Throws
  // diarkit::ConfigError.
  void validate() const;
};

// Parses the JSON document; unknown keys are rejected. Paths stay as given.
PipelineConfig parse_pipeline_config(const std::string &json_text);
std::string pipeline_config_to_json(const PipelineConfig &cfg);

struct FileScore {
  std::string recording;
  std::string system;
  bool ok = false;
  std::string error;
  DerBreakdown der;
  JerResult jer;
  bool scored = false;  // a reference was available
};

struct SystemScore {
  std::string system;
  DerBreakdown der;
  double jer = 0.0;  // mean over all reference speakers of the corpus
  int files = 0;
  int failures = 0;
};

struct ScoreReport {
  std::vector<FileScore> files;      // sorted by (system, recording)
  std::vector<SystemScore> systems;  // in config order, "fused" last
  bool all_ok() const;
  std::string to_json() const;
  std::string summary() const;
};

struct PipelineOutput {
  ScoreReport report;
  // System name -> RTTM text of all recordings. "fused" when fusion ran.
  std::map<std::string, std::string> rttm;
};

// Runs every system on every recording and writes per-stage artifacts
// under output_dir/<system>/, <system>.rttm and report.json. Recording
// failures are recorded in the report; other recordings proceed.
PipelineOutput run_pipeline(const PipelineConfig &cfg);

// Result of one system on one recording, with the intermediate stages.
struct RecordingResult {
  Timeline speech;
  std::vector<Segment> planned_windows;
  Annotation initial;  // clustering output
  Annotation resegmented;
  std::vector<WindowLabel> second;
  Annotation final;
};

RecordingResult diarize_recording(const XVectorSequence &xvectors,
                                  const BackendModel &model,
                                  const Timeline &speech,
                                  const std::optional<FrameScores> &osd_scores,
                                  const SystemConfig &system,
                                  const WindowingConfig &windows);

}  // namespace diarkit

#endif  // DIARKIT_PIPELINE_H_
