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

#include "diarkit/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include "diarkit/error.h"
#include "diarkit/formats.h"
#include "diarkit/overlap.h"
#include "json.hpp"

namespace diarkit {

namespace fs = std::filesystem;
using nlohmann::json;

SystemConfig::SystemConfig() : osd(default_osd_config()) {}

namespace {

// Reads known keys from a JSON object and rejects anything else.
class Section {
 public:
  Section(const json &j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
  }
  ~Section() = default;

  template <typename T>
  void get(const char *key, T *out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      *out = it->get<T>();
    } catch (const json::exception &e) {
      throw ConfigError("config: " + name_ + "." + key + ": " + e.what());
    }
  }
  bool has(const char *key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json &at(const char *key) const { return j_.at(key); }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError("config: unknown key '" + name_ + "." + it.key() + "'");
      }
    }
  }

 private:
  const json &j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_hysteresis(const json &j, const std::string &name, HysteresisConfig *h) {
  Section s(j, name);
  s.get("onset", &h->onset);
  s.get("offset", &h->offset);
  s.get("min_duration_on", &h->min_duration_on);
  s.get("min_duration_off", &h->min_duration_off);
  s.get("pad_onset", &h->pad_onset);
  s.get("pad_offset", &h->pad_offset);
  s.finish();
}

json hysteresis_json(const HysteresisConfig &h) {
  return {{"onset", h.onset},
          {"offset", h.offset},
          {"min_duration_on", h.min_duration_on},
          {"min_duration_off", h.min_duration_off},
          {"pad_onset", h.pad_onset},
          {"pad_offset", h.pad_offset}};
}

// Applies the per-system sections present in `j` on top of `sys`.
void read_system_sections(Section &top, SystemConfig *sys) {
  if (top.has("embed")) {
    Section s(top.at("embed"), "embed");
    std::string center = sys->centering == Centering::kModel ? "model" : "recording";
    s.get("center", &center);
    if (center == "model") {
      sys->centering = Centering::kModel;
    } else if (center == "recording") {
      sys->centering = Centering::kRecording;
    } else {
      throw ConfigError("config: embed.center must be 'model' or 'recording'");
    }
    s.get("target_norm", &sys->target_norm);
    s.finish();
  }
  if (top.has("cluster")) {
    Section s(top.at("cluster"), "cluster");
    std::string algo = sys->algo == ClusterAlgo::kAhc ? "ahc" : "nmesc";
    s.get("algo", &algo);
    if (algo == "ahc") {
      sys->algo = ClusterAlgo::kAhc;
    } else if (algo == "nmesc") {
      sys->algo = ClusterAlgo::kNmeSc;
    } else {
      throw ConfigError("config: cluster.algo must be 'ahc' or 'nmesc'");
    }
    s.get("threshold", &sys->ahc.threshold);
    s.get("max_speakers", &sys->nme_sc.max_speakers);
    s.get("p_min", &sys->nme_sc.p_min);
    s.get("p_max", &sys->nme_sc.p_max);
    s.finish();
  }
  if (top.has("vbx")) {
    Section s(top.at("vbx"), "vbx");
    s.get("enabled", &sys->vbx_enabled);
    s.get("fa", &sys->vbx.fa);
    s.get("fb", &sys->vbx.fb);
    s.get("loop_p", &sys->vbx.loop_p);
    s.get("max_iters", &sys->vbx.max_iters);
    s.get("elbo_tol", &sys->vbx.elbo_tol);
    s.get("min_pi", &sys->vbx.min_pi);
    s.get("init_smoothing", &sys->vbx.init_smoothing);
    s.finish();
  }
  if (top.has("overlap")) {
    json rest = top.at("overlap");
    std::string mode = sys->second == SecondSpeaker::kNone  ? "none"
                       : sys->second == SecondSpeaker::kVbx ? "vbx"
                                                            : "heuristic";
    if (rest.contains("mode")) {
      if (!rest["mode"].is_string()) throw ConfigError("config: overlap.mode must be a string");
      mode = rest["mode"].get<std::string>();
      rest.erase("mode");
    }
    if (mode == "none") {
      sys->second = SecondSpeaker::kNone;
    } else if (mode == "vbx") {
      sys->second = SecondSpeaker::kVbx;
    } else if (mode == "heuristic") {
      sys->second = SecondSpeaker::kHeuristic;
    } else {
      throw ConfigError("config: overlap.mode must be none, vbx or heuristic");
    }
    read_hysteresis(rest, "overlap", &sys->osd);
  }
}

json system_json(const SystemConfig &s) {
  return {
      {"name", s.name},
      {"embed",
       {{"center", s.centering == Centering::kModel ? "model" : "recording"},
        {"target_norm", s.target_norm}}},
      {"cluster",
       {{"algo", s.algo == ClusterAlgo::kAhc ? "ahc" : "nmesc"},
        {"threshold", s.ahc.threshold},
        {"max_speakers", s.nme_sc.max_speakers},
        {"p_min", s.nme_sc.p_min},
        {"p_max", s.nme_sc.p_max}}},
      {"vbx",
       {{"enabled", s.vbx_enabled},
        {"fa", s.vbx.fa},
        {"fb", s.vbx.fb},
        {"loop_p", s.vbx.loop_p},
        {"max_iters", s.vbx.max_iters},
        {"elbo_tol", s.vbx.elbo_tol},
        {"min_pi", s.vbx.min_pi},
        {"init_smoothing", s.vbx.init_smoothing}}},
      {"overlap", [&] {
         json o = hysteresis_json(s.osd);
         o["mode"] = s.second == SecondSpeaker::kNone  ? "none"
                     : s.second == SecondSpeaker::kVbx ? "vbx"
                                                       : "heuristic";
         return o;
       }()},
  };
}

std::string resolve(const std::string &dir, const std::string &path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(dir) / path).string();
}

}  // namespace

void PipelineConfig::validate() const {
  if (!fs::is_directory(corpus_dir)) {
    throw ConfigError("config: corpus directory '" + corpus_dir + "' does not exist");
  }
  if (!fs::exists(resolve(corpus_dir, model_path))) {
    throw ConfigError("config: model file '" + resolve(corpus_dir, model_path) +
                      "' does not exist");
  }
  if (!reference_path.empty() && !fs::exists(resolve(corpus_dir, reference_path))) {
    throw ConfigError("config: reference file '" + resolve(corpus_dir, reference_path) +
                      "' does not exist");
  }
  if (systems.empty()) throw ConfigError("config: no systems");
  std::set<std::string> names;
  for (const auto &s : systems) {
    if (s.name.empty() || s.name == "fused" || !names.insert(s.name).second) {
      throw ConfigError("config: system names must be unique, non-empty, not 'fused'");
    }
    for (char c : s.name) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
        throw ConfigError("config: system name '" + s.name + "' has invalid characters");
      }
    }
    try {
      s.vbx.validate();
      s.osd.validate();
    } catch (const Error &e) {
      throw ConfigError(std::string("config: system ") + s.name + ": " + e.what());
    }
    if (s.nme_sc.max_speakers < 1) throw ConfigError("config: max_speakers must be >= 1");
  }
  try {
    vad.validate();
    windows.validate();
  } catch (const Error &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (collar < 0.0) throw ConfigError("config: collar must be non-negative");
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
}

PipelineConfig parse_pipeline_config(const std::string &json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  PipelineConfig cfg;
  Section top(j, "config");
  if (top.has("corpus")) {
    Section s(top.at("corpus"), "corpus");
    s.get("dir", &cfg.corpus_dir);
    s.get("recordings", &cfg.recordings);
    s.get("model", &cfg.model_path);
    s.get("reference", &cfg.reference_path);
    s.finish();
  }
  top.get("output_dir", &cfg.output_dir);
  top.get("jobs", &cfg.jobs);
  if (top.has("vad")) read_hysteresis(top.at("vad"), "vad", &cfg.vad);
  if (top.has("windows")) {
    Section s(top.at("windows"), "windows");
    s.get("window", &cfg.windows.window);
    s.get("shift", &cfg.windows.shift);
    s.finish();
  }
  SystemConfig base;
  read_system_sections(top, &base);
  cfg.systems = {base};
  if (top.has("systems")) {
    const json &list = top.at("systems");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("config: systems must be a non-empty array");
    }
    cfg.systems.clear();
    for (std::size_t k = 0; k < list.size(); ++k) {
      SystemConfig sys = base;
      Section s(list[k], "systems[" + std::to_string(k) + "]");
      sys.name = "sys" + std::to_string(k + 1);
      s.get("name", &sys.name);
      read_system_sections(s, &sys);
      s.finish();
      cfg.systems.push_back(sys);
    }
  }
  if (top.has("fusion")) {
    Section s(top.at("fusion"), "fusion");
    s.get("enabled", &cfg.fusion_enabled);
    std::string w = "uniform";
    s.get("weighting", &w);
    if (w == "uniform") {
      cfg.fusion_weighting = FusionWeighting::kUniform;
    } else if (w == "rank") {
      cfg.fusion_weighting = FusionWeighting::kRank;
    } else {
      throw ConfigError("config: fusion.weighting must be 'uniform' or 'rank'");
    }
    s.finish();
  }
  if (top.has("scoring")) {
    Section s(top.at("scoring"), "scoring");
    s.get("collar", &cfg.collar);
    s.get("skip_overlap", &cfg.skip_overlap);
    s.finish();
  }
  top.finish();
  return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig &cfg) {
  json j;
  j["corpus"] = {{"dir", cfg.corpus_dir},
                 {"recordings", cfg.recordings},
                 {"model", cfg.model_path},
                 {"reference", cfg.reference_path}};
  j["output_dir"] = cfg.output_dir;
  j["jobs"] = cfg.jobs;
  j["vad"] = hysteresis_json(cfg.vad);
  j["windows"] = {{"window", cfg.windows.window}, {"shift", cfg.windows.shift}};
  json systems = json::array();
  for (const auto &s : cfg.systems) systems.push_back(system_json(s));
  j["systems"] = systems;
  j["fusion"] = {{"enabled", cfg.fusion_enabled},
                 {"weighting", cfg.fusion_weighting == FusionWeighting::kRank ? "rank"
                                                                              : "uniform"}};
  j["scoring"] = {{"collar", cfg.collar}, {"skip_overlap", cfg.skip_overlap}};
  return j.dump(2) + "\n";
}

RecordingResult diarize_recording(const XVectorSequence &xvectors,
                                  const BackendModel &model,
                                  const Timeline &speech,
                                  const std::optional<FrameScores> &osd_scores,
                                  const SystemConfig &system,
                                  const WindowingConfig &windows) {
  if (xvectors.size() == 0) throw Error("recording has no x-vectors");
  RecordingResult r;
  r.speech = support(speech);
  r.planned_windows = plan_windows(r.speech, windows);

  BackendModel centering = model;
  if (system.centering == Centering::kRecording) {
    centering.mean = xvectors.vectors.colwise().mean().transpose();
  }
  const XVectorSequence x = preprocess(xvectors, centering, system.target_norm);

  std::vector<int> labels(x.size(), 0);
  if (x.size() > 1) {
    const Eigen::MatrixXd sim = cosine_matrix(x);
    labels = system.algo == ClusterAlgo::kAhc ? ahc(sim, system.ahc)
                                              : nme_sc(sim, system.nme_sc);
  }
  const std::string &id = xvectors.recording_id;
  r.initial = crop(labels_to_annotation(labels, x.windows, id), r.speech);

  Annotation primary = r.initial;
  if (system.vbx_enabled) {
    const SoftAlignment a = vbx_resegment(x.vectors, labels, model.phi, system.vbx);
    AlignmentAnnotation aa = alignment_to_annotation(a, x.windows, id);
    r.resegmented = crop(aa.primary, r.speech);
    r.second = std::move(aa.second);
    primary = r.resegmented;
  } else {
    r.resegmented = r.initial;
  }

  if (system.second == SecondSpeaker::kNone) {
    r.final = primary;
    return r;
  }
  if (!osd_scores) throw Error("overlap assignment needs an .osd.post file");
  const Timeline osd = intersect(osd_binarize(*osd_scores, system.osd), r.speech);
  if (system.second == SecondSpeaker::kVbx) {
    r.final = r.second.empty() ? primary : assign_second_vbx(primary, r.second, osd);
  } else {
    r.final = assign_second_heuristic(primary, osd);
  }
  return r;
}

bool ScoreReport::all_ok() const {
  return std::all_of(files.begin(), files.end(), [](const FileScore &f) { return f.ok; });
}

std::string ScoreReport::to_json() const {
  json files_j = json::array();
  for (const auto &f : files) {
    json e{{"recording", f.recording}, {"system", f.system}, {"ok", f.ok}};
    if (!f.ok) e["error"] = f.error;
    if (f.ok && f.scored) {
      e["der"] = f.der.der;
      e["missed"] = f.der.missed;
      e["false_alarm"] = f.der.false_alarm;
      e["confusion"] = f.der.confusion;
      e["total"] = f.der.total;
      e["jer"] = f.jer.jer;
    }
    files_j.push_back(e);
  }
  json systems_j = json::array();
  for (const auto &s : systems) {
    systems_j.push_back({{"system", s.system},
                         {"files", s.files},
                         {"failures", s.failures},
                         {"der", s.der.der},
                         {"missed", s.der.missed},
                         {"false_alarm", s.der.false_alarm},
                         {"confusion", s.der.confusion},
                         {"total", s.der.total},
                         {"jer", s.jer}});
  }
  return json{{"files", files_j}, {"systems", systems_j}}.dump(2) + "\n";
}

std::string ScoreReport::summary() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %-16s %8s %8s %8s %8s %8s\n", "system",
                "recording", "DER%", "MS%", "FA%", "SC%", "JER%");
  out += buf;
  auto row = [&](const std::string &sys, const std::string &rec, const DerBreakdown &d,
                 double j) {
    const double t = d.total > 0.0 ? 100.0 / d.total : 0.0;
    std::snprintf(buf, sizeof(buf), "%-12s %-16s %8.2f %8.2f %8.2f %8.2f %8.2f\n",
                  sys.c_str(), rec.c_str(), 100.0 * d.der, d.missed * t,
                  d.false_alarm * t, d.confusion * t, 100.0 * j);
    out += buf;
  };
  for (const auto &f : files) {
    if (!f.ok) {
      out += f.system + " " + f.recording + " FAILED: " + f.error + "\n";
    } else if (f.scored) {
      row(f.system, f.recording, f.der, f.jer.jer);
    }
  }
  for (const auto &s : systems) {
    if (s.files > 0) row(s.system, "*** OVERALL", s.der, s.jer);
  }
  return out;
}

PipelineOutput run_pipeline(const PipelineConfig &cfg) {
  cfg.validate();
  const BackendModel model = read_backend_model(read_file(resolve(cfg.corpus_dir, cfg.model_path)));

  std::map<std::string, Annotation> references;
  if (!cfg.reference_path.empty()) {
    for (auto &a : parse_rttm(read_file(resolve(cfg.corpus_dir, cfg.reference_path)))) {
      references.emplace(a.recording_id(), std::move(a));
    }
  }

  std::vector<std::string> recordings = cfg.recordings;
  if (recordings.empty()) {
    for (const auto &entry : fs::directory_iterator(cfg.corpus_dir)) {
      if (entry.path().extension() == ".xvec") recordings.push_back(entry.path().stem().string());
    }
  }
  std::sort(recordings.begin(), recordings.end());
  recordings.erase(std::unique(recordings.begin(), recordings.end()), recordings.end());

  std::vector<std::string> system_names;
  for (const auto &s : cfg.systems) system_names.push_back(s.name);
  const bool fuse_systems = cfg.fusion_enabled && cfg.systems.size() >= 2;
  if (fuse_systems) system_names.push_back("fused");

  fs::create_directories(cfg.output_dir);
  for (const auto &name : system_names) fs::create_directories(fs::path(cfg.output_dir) / name);

  // finals[r][k]: output of system k on recording r.
  const std::size_t n_sys = system_names.size();
  std::vector<std::vector<std::optional<Annotation>>> finals(
      recordings.size(), std::vector<std::optional<Annotation>>(n_sys));
  std::vector<std::vector<FileScore>> scores(recordings.size(),
                                             std::vector<FileScore>(n_sys));

  auto artifact = [&](const std::string &sys, const std::string &file) {
    return (fs::path(cfg.output_dir) / sys / file).string();
  };

  auto process = [&](std::size_t r) {
    const std::string &rec = recordings[r];
    const std::string base = (fs::path(cfg.corpus_dir) / rec).string();
    for (std::size_t k = 0; k < n_sys; ++k) {
      scores[r][k].recording = rec;
      scores[r][k].system = system_names[k];
    }
    auto fail_all = [&](const std::string &msg) {
      for (auto &s : scores[r]) s.error = msg;
    };
    XVectorSequence x;
    Timeline speech;
    std::optional<FrameScores> osd;
    try {
      x = read_xvectors(read_file(base + ".xvec"), rec);
      if (fs::exists(base + ".vad.post")) {
        speech = binarize(read_frame_scores(read_file(base + ".vad.post"), rec), cfg.vad);
      } else if (fs::exists(base + ".lab")) {
        speech = support(read_lab(read_file(base + ".lab")));
      } else {
        speech = support(Timeline(x.windows));
      }
      if (fs::exists(base + ".osd.post")) {
        osd = read_frame_scores(read_file(base + ".osd.post"), rec);
      }
    } catch (const std::exception &e) {
      fail_all(e.what());
      return;
    }

    const Annotation *ref = nullptr;
    if (auto it = references.find(rec); it != references.end()) ref = &it->second;
    auto score = [&](std::size_t k, const Annotation &hyp) {
      FileScore &fsc = scores[r][k];
      try {
        if (ref) {
          fsc.der = der(*ref, hyp, cfg.collar, cfg.skip_overlap);
          fsc.jer = jer_detailed(*ref, hyp);
          fsc.scored = true;
        }
        fsc.ok = true;
      } catch (const std::exception &e) {
        fsc.error = e.what();
      }
    };

    std::vector<Annotation> fusion_inputs;
    for (std::size_t k = 0; k < cfg.systems.size(); ++k) {
      const SystemConfig &sys = cfg.systems[k];
      try {
        RecordingResult res = diarize_recording(x, model, speech, osd, sys, cfg.windows);
        write_file(artifact(sys.name, rec + ".lab"), write_lab(res.speech));
        write_file(artifact(sys.name, rec + ".windows.lab"),
                   write_lab(Timeline(res.planned_windows)));
        write_file(artifact(sys.name, rec + ".init.rttm"), emit_rttm({res.initial}));
        if (sys.vbx_enabled) {
          write_file(artifact(sys.name, rec + ".vbx.rttm"), emit_rttm({res.resegmented}));
          write_file(artifact(sys.name, rec + ".second"),
                     write_second_labels(rec, res.second));
        }
        write_file(artifact(sys.name, rec + ".rttm"), emit_rttm({res.final}));
        score(k, res.final);
        fusion_inputs.push_back(res.final);
        finals[r][k] = std::move(res.final);
      } catch (const std::exception &e) {
        scores[r][k].error = e.what();
      }
    }
    if (fuse_systems) {
      const std::size_t k = n_sys - 1;
      if (fusion_inputs.size() != cfg.systems.size()) {
        scores[r][k].error = "fusion skipped: a system failed on this recording";
        return;
      }
      try {
        Annotation fused = dover_lap(
            fusion_inputs, fusion_weights(fusion_inputs.size(), cfg.fusion_weighting));
        write_file(artifact("fused", rec + ".rttm"), emit_rttm({fused}));
        score(k, fused);
        finals[r][k] = std::move(fused);
      } catch (const std::exception &e) {
        scores[r][k].error = e.what();
      }
    }
  };

  const int workers = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(recordings.size())));
  if (workers == 1) {
    for (std::size_t r = 0; r < recordings.size(); ++r) process(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < recordings.size(); r = next++) process(r);
      });
    }
    for (auto &t : pool) t.join();
  }

  PipelineOutput out;
  for (std::size_t k = 0; k < n_sys; ++k) {
    SystemScore agg;
    agg.system = system_names[k];
    double jer_sum = 0.0;
    int speakers = 0;
    std::vector<Annotation> all;
    for (std::size_t r = 0; r < recordings.size(); ++r) {
      const FileScore &f = scores[r][k];
      out.report.files.push_back(f);
      if (!f.ok) {
        ++agg.failures;
        continue;
      }
      if (finals[r][k]) all.push_back(*finals[r][k]);
      if (f.scored) {
        ++agg.files;
        agg.der += f.der;
        jer_sum += f.jer.sum;
        speakers += f.jer.speakers;
      }
    }
    agg.jer = speakers > 0 ? jer_sum / speakers : 0.0;
    out.report.systems.push_back(agg);
    out.rttm[agg.system] = emit_rttm(all);
    write_file((fs::path(cfg.output_dir) / (agg.system + ".rttm")).string(),
               out.rttm[agg.system]);
  }
  write_file((fs::path(cfg.output_dir) / "report.json").string(), out.report.to_json());
  return out;
}

}  // namespace diarkit
