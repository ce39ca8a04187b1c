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

#include "diarkit/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "diarkit/cluster.h"
#include "diarkit/error.h"
#include "json.hpp"

namespace diarkit {

namespace {

double round_cs(double t) { return std::round(t * 100.0) / 100.0; }

// Ideal frame scores: 1 where the frame center falls inside `on`.
FrameScores ideal_scores(const std::string &id, const Timeline &on, double step,
                         double end) {
  FrameScores s;
  s.recording_id = id;
  s.step = step;
  s.offset = 0.0;
  const auto n = static_cast<std::size_t>(std::ceil(end / step));
  s.values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (on.contains((static_cast<double>(i) + 0.5) * step)) s.values[i] = 1.0;
  }
  return s;
}

}  // namespace

void SynthRecipe::validate() const {
  if (speakers < 1) throw Error("synth: speakers must be >= 1");
  if (dim < 1) throw Error("synth: dim must be >= 1");
  if (turns < 1 && max_windows <= 0) throw Error("synth: turns must be >= 1");
  if (overlap_ratio < 0.0 || overlap_ratio >= 1.0) {
    throw Error("synth: overlap_ratio must be in [0, 1)");
  }
  if (!(phi > 0.0)) throw Error("synth: phi must be positive");
  if (!(min_turn > 0.0) || max_turn < min_turn) throw Error("synth: bad turn durations");
  if (!(score_step > 0.0)) throw Error("synth: score_step must be positive");
  windows.validate();
}

Eigen::VectorXd synthetic_phi(int dim, double scale) {
  Eigen::VectorXd phi(dim);
  for (int i = 0; i < dim; ++i) {
    const double f = dim > 1 ? static_cast<double>(i) / (dim - 1) : 0.0;
    phi[i] = scale * (1.0 - 0.5 * f);
  }
  return phi;
}

SynthRecording generate_synthetic(const SynthRecipe &recipe) {
  recipe.validate();
  std::mt19937_64 rng(recipe.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int S = recipe.speakers;
  const Eigen::VectorXd phi = synthetic_phi(recipe.dim, recipe.phi);
  Eigen::MatrixXd centers(S, recipe.dim);
  for (int s = 0; s < S; ++s) {
    for (int d = 0; d < recipe.dim; ++d) centers(s, d) = std::sqrt(phi[d]) * normal(rng);
  }

  // Every speaker talks once in a random order first, then turns move to a
  // random different speaker.
  std::vector<int> first(S);
  std::iota(first.begin(), first.end(), 0);
  std::shuffle(first.begin(), first.end(), rng);

  const double r = recipe.overlap_ratio;
  const double mean_turn = 0.5 * (recipe.min_turn + recipe.max_turn);
  struct Turn {
    int speaker;
    double start;
    double end;
  };
  std::vector<Turn> turns;
  auto enough = [&] {
    if (recipe.max_windows <= 0) return static_cast<int>(turns.size()) >= recipe.turns;
    if (turns.empty()) return false;
    Timeline speech;
    for (const auto &t : turns) speech.add(Segment(t.start, t.end));
    return static_cast<int>(plan_windows(support(speech), recipe.windows).size()) >=
           recipe.max_windows;
  };
  while (!enough()) {
    const std::size_t i = turns.size();
    int spk;
    if (i < first.size()) {
      spk = first[i];
    } else if (S == 1) {
      spk = 0;
    } else {
      spk = static_cast<int>(uniform(rng) * (S - 1));
      spk = std::min(spk, S - 2);
      if (spk >= turns.back().speaker) ++spk;
    }
    const double dur = round_cs(recipe.min_turn +
                                uniform(rng) * (recipe.max_turn - recipe.min_turn));
    double start = 0.5;
    if (!turns.empty()) {
      const Turn &prev = turns.back();
      const double u = uniform(rng);
      const bool can_overlap = r > 0.0 && prev.speaker != spk;
      if (can_overlap && u >= 0.25) {
        double o = r / (1.0 + r) * mean_turn / 0.75 * (0.7 + 0.6 * uniform(rng));
        o = std::min(o, 0.45 * std::min(dur, prev.end - prev.start));
        start = round_cs(prev.end - o);
      } else if (u < (r > 0.0 ? 0.25 : 0.5)) {
        start = round_cs(prev.end + 0.6 + 0.9 * uniform(rng));
      } else {
        start = prev.end;
      }
    }
    turns.push_back({spk, start, round_cs(start + dur)});
  }

  SynthRecording out;
  const std::string &id = recipe.recording_id;
  out.model = BackendModel::identity(phi);
  out.reference = Annotation(id);
  Timeline speech;
  for (const auto &t : turns) {
    const Segment seg(t.start, t.end);
    out.reference.add(seg, speaker_name(t.speaker));
    speech.add(seg);
  }
  speech = support(speech);

  std::vector<Segment> windows = plan_windows(speech, recipe.windows);
  if (recipe.max_windows > 0 && static_cast<int>(windows.size()) > recipe.max_windows) {
    windows.erase(windows.begin() + recipe.max_windows, windows.end());
    const Segment keep(0.0, windows.back().end());
    out.reference = crop(out.reference, keep);
    speech = crop(speech, keep);
  }
  out.reference = out.reference.normalized();

  out.xvectors.recording_id = id;
  out.xvectors.windows = windows;
  out.xvectors.vectors.resize(static_cast<Eigen::Index>(windows.size()), recipe.dim);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    int best = 0;
    double best_overlap = -1.0;
    for (const auto &t : turns) {
      const double o = std::min(t.end, windows[w].end()) - std::max(t.start, windows[w].start());
      if (o > best_overlap + kTimeEps) {
        best_overlap = o;
        best = t.speaker;
      }
    }
    out.window_speakers.push_back(best);
    for (int d = 0; d < recipe.dim; ++d) {
      // Stored as f32 on disk, so round here to keep files and memory equal.
      out.xvectors.vectors(static_cast<Eigen::Index>(w), d) =
          static_cast<float>(centers(best, d) + normal(rng));
    }
  }

  const double end = speech.extent().end() + 0.5;
  out.vad = ideal_scores(id, speech, recipe.score_step, end);
  out.osd = ideal_scores(id, overlap_regions(out.reference), recipe.score_step, end);
  return out;
}

std::vector<std::string> write_synthetic_corpus(const std::string &dir,
                                                const SynthCorpusOptions &options) {
  if (options.recordings < 1) throw Error("synth: recordings must be >= 1");
  if (options.min_speakers < 1 || options.max_speakers < options.min_speakers) {
    throw Error("synth: bad speaker range");
  }
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> ids;
  std::vector<Annotation> refs;
  BackendModel model;
  const int span = options.max_speakers - options.min_speakers + 1;
  for (int i = 0; i < options.recordings; ++i) {
    SynthRecipe recipe = options.base;
    char name[32];
    std::snprintf(name, sizeof(name), "rec%03d", i);
    recipe.recording_id = name;
    recipe.speakers = options.min_speakers + i % span;
    recipe.seed = options.base.seed * 1000 + static_cast<std::uint64_t>(i);
    const SynthRecording rec = generate_synthetic(recipe);
    const std::string base = (fs::path(dir) / name).string();
    write_file(base + ".xvec", write_xvectors(rec.xvectors));
    write_file(base + ".vad.post", write_frame_scores(rec.vad));
    write_file(base + ".osd.post", write_frame_scores(rec.osd));
    refs.push_back(rec.reference);
    ids.push_back(name);
    model = rec.model;
  }
  write_file((fs::path(dir) / "ref.rttm").string(), emit_rttm(refs));
  write_file((fs::path(dir) / "model.json").string(), write_backend_model(model));
  const nlohmann::json config = {
      {"corpus", {{"dir", "."}, {"model", "model.json"}, {"reference", "ref.rttm"}}},
      {"output_dir", "out"},
      {"embed", {{"center", "recording"}}},
      {"cluster", {{"algo", "ahc"}, {"threshold", -0.015}}},
      {"vbx", {{"enabled", true}, {"fa", 0.15}, {"fb", 5.5}, {"loop_p", 0.33}}},
      {"overlap", {{"mode", "heuristic"}}},
      {"scoring", {{"collar", 0.25}}},
  };
  write_file((fs::path(dir) / "config.json").string(), config.dump(2) + "\n");
  return ids;
}

}  // namespace diarkit
