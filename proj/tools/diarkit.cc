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

// Command-line front end for the diarkit library.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "diarkit/cluster.h"
#include "diarkit/embed.h"
#include "diarkit/error.h"
#include "diarkit/formats.h"
#include "diarkit/fusion.h"
#include "diarkit/metrics.h"
#include "diarkit/overlap.h"
#include "diarkit/pipeline.h"
#include "diarkit/synth.h"
#include "diarkit/vad.h"
#include "diarkit/vbx.h"

namespace fs = std::filesystem;
using namespace diarkit;

namespace {

struct Globals {
  int jobs = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool verbose = false;
};

Globals g;

void info(const std::string &msg) {
  if (g.verbose) std::cerr << "diarkit: " << msg << "\n";
}

void output(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::vector<std::string> split_ws(const std::string &line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string &s, const std::string &what, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception &) {
  }
  throw ParseError(what + ": bad number '" + s + "'", static_cast<int>(line));
}

XVectorSequence load_xvectors(const std::string &path) {
  return read_xvectors(read_file(path), file_stem(path));
}

// Recording centering replaces the model mean with the recording mean.
XVectorSequence load_preprocessed(const std::string &xvec, const std::string &model_path,
                                  const std::string &center, BackendModel *model_out) {
  const XVectorSequence x = load_xvectors(xvec);
  BackendModel model = model_path.empty()
                           ? BackendModel::identity(Eigen::VectorXd::Ones(x.dim()))
                           : read_backend_model(read_file(model_path));
  if (center == "recording") model.mean = x.vectors.colwise().mean().transpose();
  if (model_out) *model_out = model;
  return preprocess(x, model);
}

// The label covering most of each window, by first appearance.
std::vector<int> labels_from_rttm(const Annotation &ann, const std::vector<Segment> &windows) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  for (const Segment &w : windows) {
    std::string best;
    double best_overlap = 0.0;
    for (const auto &label : ann.labels()) {
      const double d = crop(ann.label_timeline(label), w).duration();
      if (d > best_overlap + kTimeEps) {
        best_overlap = d;
        best = label;
      }
    }
    if (best.empty()) best = "<none>";
    auto it = ids.emplace(best, static_cast<int>(ids.size())).first;
    out.push_back(it->second);
  }
  return out;
}

Annotation single_annotation(const std::string &path) {
  auto anns = parse_rttm(read_file(path));
  if (anns.size() != 1) {
    throw Error(path + ": expected exactly one recording, found " + std::to_string(anns.size()));
  }
  return anns.front();
}

Timeline load_regions(const std::string &path, const HysteresisConfig &cfg) {
  if (fs::path(path).extension() == ".post") {
    return binarize(read_frame_scores(read_file(path), file_stem(path)), cfg);
  }
  return read_lab(read_file(path));
}

std::string der_table(const std::vector<Annotation> &refs, const std::vector<Annotation> &hyps,
                      double collar, bool skip_overlap) {
  std::map<std::string, Annotation> by_id;
  for (const auto &h : hyps) by_id.emplace(h.recording_id(), h);
  DerBreakdown total;
  double jer_sum = 0.0;
  int speakers = 0;
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %8s %8s %8s %8s %8s\n", "recording", "DER%", "MS%",
                "FA%", "SC%", "JER%");
  out += buf;
  auto row = [&](const std::string &id, const DerBreakdown &d, double j) {
    const double t = d.total > 0.0 ? 100.0 / d.total : 0.0;
    std::snprintf(buf, sizeof(buf), "%-20s %8.2f %8.2f %8.2f %8.2f %8.2f\n", id.c_str(),
                  100.0 * d.der, d.missed * t, d.false_alarm * t, d.confusion * t, 100.0 * j);
    out += buf;
  };
  for (const auto &ref : refs) {
    auto it = by_id.find(ref.recording_id());
    const Annotation hyp = it != by_id.end() ? it->second : Annotation(ref.recording_id());
    const DerBreakdown d = der(ref, hyp, collar, skip_overlap);
    const JerResult j = jer_detailed(ref, hyp);
    total += d;
    jer_sum += j.sum;
    speakers += j.speakers;
    row(ref.recording_id(), d, j.jer);
  }
  row("*** OVERALL", total, speakers > 0 ? jer_sum / speakers : 0.0);
  return out;
}

// "<score> <target|nontarget>" lines.
TrialScores read_scored_trials(const std::string &text, const std::string &what) {
  TrialScores out;
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const auto f = split_ws(line);
    if (f.empty() || f[0][0] == '#') continue;
    if (f.size() != 2 || (f[1] != "target" && f[1] != "nontarget")) {
      throw ParseError(what + ": expected '<score> <target|nontarget>'", static_cast<int>(n));
    }
    out.push_back({to_double(f[0], what, n), f[1] == "target"});
  }
  return out;
}

struct TrialKey {
  std::string enrol, test;
  bool target;
};

std::vector<TrialKey> read_trial_list(const std::string &text, const std::string &what) {
  std::vector<TrialKey> out;
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const auto f = split_ws(line);
    if (f.empty() || f[0][0] == '#') continue;
    if (f.size() != 3 || (f[2] != "target" && f[2] != "nontarget")) {
      throw ParseError(what + ": expected '<enrol> <test> <target|nontarget>'",
                       static_cast<int>(n));
    }
    out.push_back({f[0], f[1], f[2] == "target"});
  }
  return out;
}

bool is_scored_trial_file(const std::string &text) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto f = split_ws(line);
    if (f.empty() || f[0][0] == '#') continue;
    return f.size() == 2;
  }
  return true;
}

TrialScores score_from_file(const std::vector<TrialKey> &trials, const std::string &path) {
  std::map<std::pair<std::string, std::string>, double> scores;
  std::istringstream in(read_file(path));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const auto f = split_ws(line);
    if (f.empty() || f[0][0] == '#') continue;
    if (f.size() != 3) throw ParseError(path + ": expected '<enrol> <test> <score>'", static_cast<int>(n));
    scores[{f[0], f[1]}] = to_double(f[2], path, n);
  }
  TrialScores out;
  for (const auto &t : trials) {
    auto it = scores.find({t.enrol, t.test});
    if (it == scores.end()) throw Error(path + ": no score for trial " + t.enrol + " " + t.test);
    out.push_back({it->second, t.target});
  }
  return out;
}

TrialScores score_from_embeddings(const std::vector<TrialKey> &trials, const std::string &path) {
  std::map<std::string, std::vector<double>> emb;
  std::istringstream in(read_file(path));
  std::size_t n = 0, dim = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const auto f = split_ws(line);
    if (f.empty() || f[0][0] == '#') continue;
    if (f.size() < 2) throw ParseError(path + ": expected '<id> <values...>'", static_cast<int>(n));
    if (dim == 0) dim = f.size() - 1;
    if (f.size() - 1 != dim) throw ParseError(path + ": inconsistent dimension", static_cast<int>(n));
    std::vector<double> v;
    for (std::size_t i = 1; i < f.size(); ++i) v.push_back(to_double(f[i], path, n));
    emb[f[0]] = std::move(v);
  }
  if (emb.empty()) throw Error(path + ": no embeddings");
  std::vector<double> mean(dim, 0.0);
  for (const auto &[id, v] : emb) {
    for (std::size_t i = 0; i < dim; ++i) mean[i] += v[i] / static_cast<double>(emb.size());
  }
  TrialScores out;
  for (const auto &t : trials) {
    auto e = emb.find(t.enrol), s = emb.find(t.test);
    if (e == emb.end() || s == emb.end()) {
      throw Error(path + ": missing embedding for trial " + t.enrol + " " + t.test);
    }
    out.push_back({cosine_score(e->second, s->second, mean), t.target});
  }
  return out;
}

void add_hysteresis(CLI::App *app, HysteresisConfig *cfg, const std::string &prefix) {
  app->add_option("--" + prefix + "onset", cfg->onset, "activation threshold");
  app->add_option("--" + prefix + "offset", cfg->offset, "deactivation threshold");
  app->add_option("--" + prefix + "min-on", cfg->min_duration_on, "shortest kept region (s)");
  app->add_option("--" + prefix + "min-off", cfg->min_duration_off, "shortest kept gap (s)");
  app->add_option("--" + prefix + "pad-onset", cfg->pad_onset, "padding before regions (s)");
  app->add_option("--" + prefix + "pad-offset", cfg->pad_offset, "padding after regions (s)");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"diarkit: speaker diarisation back end and scoring"};
  app.require_subcommand(1);
  app.add_option("--jobs", g.jobs, "worker threads for 'run'")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "random seed")->each([](const std::string &) {
    g.seed_given = true;
  });
  app.add_flag("--verbose,-v", g.verbose, "progress messages on stderr");

  // vad
  auto *vad = app.add_subcommand("vad", "speech regions from a WAV file or frame scores");
  std::string vad_wav, vad_scores, vad_out;
  HysteresisConfig vad_cfg = default_vad_config();
  auto *wav_opt = vad->add_option("--wav", vad_wav, "16-bit mono PCM input");
  vad->add_option("--scores", vad_scores, "frame score file")->excludes(wav_opt);
  add_hysteresis(vad, &vad_cfg, "");
  vad->add_option("--out", vad_out, "output LAB (default stdout)");

  // windows
  auto *win = app.add_subcommand("windows", "embedding windows over speech regions");
  std::string win_lab, win_out;
  WindowingConfig win_cfg;
  win->add_option("--lab", win_lab, "speech LAB file")->required();
  win->add_option("--window", win_cfg.window, "window length (s)");
  win->add_option("--shift", win_cfg.shift, "window shift (s)");
  win->add_option("--out", win_out, "output (default stdout)");

  // cluster
  auto *clu = app.add_subcommand("cluster", "initial clustering of x-vectors");
  std::string clu_xvec, clu_model, clu_out, clu_algo = "ahc", clu_center = "model";
  AhcConfig ahc_cfg;
  NmeScConfig nme_cfg;
  clu->add_option("--xvec", clu_xvec, "x-vector file")->required();
  clu->add_option("--model", clu_model, "backend model (default identity)");
  clu->add_option("--center", clu_center, "mean to subtract")
      ->check(CLI::IsMember({"model", "recording"}));
  clu->add_option("--algo", clu_algo, "clustering algorithm")->check(CLI::IsMember({"ahc", "nmesc"}));
  clu->add_option("--threshold", ahc_cfg.threshold, "AHC stopping threshold");
  clu->add_option("--max-speakers", nme_cfg.max_speakers, "NME-SC speaker limit");
  clu->add_option("--out", clu_out, "output RTTM (default stdout)");

  // vbx
  auto *vbx = app.add_subcommand("vbx", "Bayesian HMM resegmentation");
  std::string vbx_xvec, vbx_init, vbx_model, vbx_out, vbx_second, vbx_center = "model";
  VbxConfig vbx_cfg;
  vbx->add_option("--xvec", vbx_xvec, "x-vector file")->required();
  vbx->add_option("--init", vbx_init, "initial RTTM")->required();
  vbx->add_option("--model", vbx_model, "backend model")->required();
  vbx->add_option("--center", vbx_center, "mean to subtract")
      ->check(CLI::IsMember({"model", "recording"}));
  vbx->add_option("--fa", vbx_cfg.fa, "acoustic scale");
  vbx->add_option("--fb", vbx_cfg.fb, "speaker prior scale");
  vbx->add_option("--loop-p", vbx_cfg.loop_p, "self-transition probability");
  vbx->add_option("--max-iters", vbx_cfg.max_iters, "iteration limit");
  vbx->add_option("--out", vbx_out, "output RTTM (default stdout)");
  vbx->add_option("--second", vbx_second, "write second-speaker labels here");

  // overlap
  auto *ovl = app.add_subcommand("overlap", "second-speaker assignment in overlap regions");
  std::string ovl_rttm, ovl_osd, ovl_second, ovl_out, ovl_mode = "heuristic";
  HysteresisConfig osd_cfg = default_osd_config();
  ovl->add_option("--rttm", ovl_rttm, "primary RTTM")->required();
  ovl->add_option("--osd", ovl_osd, "overlap regions (.lab) or scores (.post)")->required();
  ovl->add_option("--mode", ovl_mode, "assignment rule")->check(CLI::IsMember({"vbx", "heuristic"}));
  ovl->add_option("--second", ovl_second, "second-speaker labels (mode vbx)");
  add_hysteresis(ovl, &osd_cfg, "osd-");
  ovl->add_option("--out", ovl_out, "output RTTM (default stdout)");

  // fuse
  auto *fus = app.add_subcommand("fuse", "overlap-aware fusion of diarisation outputs");
  std::vector<std::string> fus_in;
  std::vector<double> fus_weights;
  bool fus_rank = false;
  std::string fus_out;
  fus->add_option("--in", fus_in, "input RTTMs, best first")->required();
  auto *w_opt = fus->add_option("--weights", fus_weights, "one weight per input");
  fus->add_flag("--rank", fus_rank, "rank weights 1/(k+1)")->excludes(w_opt);
  fus->add_option("--out", fus_out, "output RTTM (default stdout)");

  // score
  auto *sco = app.add_subcommand("score", "evaluation");
  sco->require_subcommand(1);
  auto *sder = sco->add_subcommand("der", "DER and JER against a reference");
  std::string der_ref, der_hyp;
  double der_collar = 0.25;
  bool der_skip = false;
  sder->add_option("--ref", der_ref, "reference RTTM")->required();
  sder->add_option("--hyp", der_hyp, "hypothesis RTTM")->required();
  sder->add_option("--collar", der_collar, "no-score zone width (s)");
  sder->add_flag("--skip-overlap", der_skip, "ignore overlapped reference speech");
  auto *sver = sco->add_subcommand("verif", "EER and minDCF of verification trials");
  std::string ver_trials, ver_emb;
  std::vector<std::string> ver_scores;
  std::vector<double> ver_weights;
  double ver_p = 0.05, ver_cmiss = 1.0, ver_cfa = 1.0;
  sver->add_option("--trials", ver_trials, "trial list or scored trials")->required();
  sver->add_option("--scores", ver_scores, "score files '<enrol> <test> <score>'");
  sver->add_option("--embeddings", ver_emb, "embedding file '<id> <values...>'");
  sver->add_option("--weights", ver_weights, "fusion weights, one per score source");
  sver->add_option("--p-target", ver_p, "target prior");
  sver->add_option("--c-miss", ver_cmiss, "miss cost");
  sver->add_option("--c-fa", ver_cfa, "false alarm cost");

  // run
  auto *run = app.add_subcommand("run", "full pipeline from a JSON config");
  std::string run_cfg;
  bool run_dump = false;
  run->add_option("config", run_cfg, "config file")->required();
  run->add_flag("--print-config", run_dump, "print the resolved config and exit");

  // synth
  auto *syn = app.add_subcommand("synth", "write a synthetic corpus");
  std::string syn_out;
  SynthCorpusOptions syn_opts;
  syn->add_option("--out", syn_out, "output directory")->required();
  syn->add_option("--recordings", syn_opts.recordings, "number of recordings");
  syn->add_option("--min-speakers", syn_opts.min_speakers, "fewest speakers");
  syn->add_option("--max-speakers", syn_opts.max_speakers, "most speakers");
  syn->add_option("--turns", syn_opts.base.turns, "turns per recording");
  syn->add_option("--max-windows", syn_opts.base.max_windows, "windows per recording (overrides --turns)");
  syn->add_option("--overlap", syn_opts.base.overlap_ratio, "overlapped fraction of speech");
  syn->add_option("--dim", syn_opts.base.dim, "embedding dimension");
  syn->add_option("--phi", syn_opts.base.phi, "largest across-speaker variance");

  CLI11_PARSE(app, argc, argv);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (*vad) {
      Timeline speech;
      if (!vad_wav.empty()) {
        const WavData wav = read_wav(read_file(vad_wav));
        speech = binarize(energy_scores(wav.samples, wav.sample_rate), vad_cfg);
      } else if (!vad_scores.empty()) {
        speech = binarize(read_frame_scores(read_file(vad_scores), file_stem(vad_scores)), vad_cfg);
      } else {
        throw ConfigError("vad: one of --wav or --scores is required");
      }
      output(vad_out, write_lab(speech));
    } else if (*win) {
      win_cfg.validate();
      std::string text;
      char buf[64];
      for (const Segment &s : plan_windows(support(read_lab(read_file(win_lab))), win_cfg)) {
        std::snprintf(buf, sizeof(buf), "%.3f %.3f\n", s.start(), s.end());
        text += buf;
      }
      output(win_out, text);
    } else if (*clu) {
      const XVectorSequence x = load_preprocessed(clu_xvec, clu_model, clu_center, nullptr);
      if (g.seed_given) nme_cfg.seed = g.seed;
      std::vector<int> labels(x.size(), 0);
      if (x.size() > 1) {
        const Eigen::MatrixXd sim = cosine_matrix(x);
        labels = clu_algo == "ahc" ? ahc(sim, ahc_cfg) : nme_sc(sim, nme_cfg);
      }
      output(clu_out, emit_rttm({labels_to_annotation(labels, x.windows, x.recording_id)}));
    } else if (*vbx) {
      BackendModel model;
      const XVectorSequence x = load_preprocessed(vbx_xvec, vbx_model, vbx_center, &model);
      const Annotation init = single_annotation(vbx_init);
      const SoftAlignment a =
          vbx_resegment(x.vectors, labels_from_rttm(init, x.windows), model.phi, vbx_cfg);
      info("vbx: " + std::to_string(a.iterations) + " iterations, " +
           std::to_string(a.pi.size()) + " speakers");
      const AlignmentAnnotation aa = alignment_to_annotation(a, x.windows, x.recording_id);
      output(vbx_out, emit_rttm({aa.primary}));
      if (!vbx_second.empty()) write_file(vbx_second, write_second_labels(x.recording_id, aa.second));
    } else if (*ovl) {
      const Annotation primary = single_annotation(ovl_rttm);
      const Timeline osd = load_regions(ovl_osd, osd_cfg);
      Annotation out;
      if (ovl_mode == "vbx") {
        if (ovl_second.empty()) throw ConfigError("overlap: --mode vbx needs --second");
        std::string id;
        const auto second = read_second_labels(read_file(ovl_second), &id);
        out = assign_second_vbx(primary, second, osd);
      } else {
        out = assign_second_heuristic(primary, osd);
      }
      output(ovl_out, emit_rttm({out}));
    } else if (*fus) {
      std::map<std::string, std::vector<Annotation>> by_id;
      for (const auto &path : fus_in) {
        for (auto &a : parse_rttm(read_file(path))) by_id[a.recording_id()];
      }
      // A recording missing from one input counts as silence there.
      for (const auto &path : fus_in) {
        std::map<std::string, Annotation> anns;
        for (auto &a : parse_rttm(read_file(path))) anns.emplace(a.recording_id(), a);
        for (auto &[id, list] : by_id) {
          auto it = anns.find(id);
          list.push_back(it != anns.end() ? it->second : Annotation(id));
        }
      }
      const std::vector<double> weights =
          !fus_weights.empty() ? fus_weights
                               : fusion_weights(fus_in.size(), fus_rank ? FusionWeighting::kRank
                                                                        : FusionWeighting::kUniform);
      std::vector<Annotation> fused;
      for (const auto &[id, list] : by_id) fused.push_back(dover_lap(list, weights));
      output(fus_out, emit_rttm(fused));
    } else if (*sder) {
      std::cout << der_table(parse_rttm(read_file(der_ref)), parse_rttm(read_file(der_hyp)),
                             der_collar, der_skip);
    } else if (*sver) {
      const std::string text = read_file(ver_trials);
      std::vector<TrialScores> systems;
      if (ver_scores.empty() && ver_emb.empty()) {
        if (!is_scored_trial_file(text)) {
          throw ConfigError("score verif: trial list needs --scores or --embeddings");
        }
        systems.push_back(read_scored_trials(text, ver_trials));
      } else {
        const auto trials = read_trial_list(text, ver_trials);
        for (const auto &path : ver_scores) systems.push_back(score_from_file(trials, path));
        if (!ver_emb.empty()) systems.push_back(score_from_embeddings(trials, ver_emb));
      }
      const TrialScores scores =
          systems.size() == 1 && ver_weights.empty() ? systems.front()
                                                     : fuse_scores(systems, ver_weights);
      std::printf("trials %zu\nEER %.4f%%\nminDCF(p=%g) %.4f\n", scores.size(),
                  100.0 * eer(scores), ver_p, min_dcf(scores, ver_p, ver_cmiss, ver_cfa));
    } else if (*run) {
      PipelineConfig cfg = parse_pipeline_config(read_file(run_cfg));
      const fs::path base = fs::path(run_cfg).parent_path();
      if (fs::path(cfg.corpus_dir).is_relative()) cfg.corpus_dir = (base / cfg.corpus_dir).string();
      if (fs::path(cfg.output_dir).is_relative()) cfg.output_dir = (base / cfg.output_dir).string();
      if (g.jobs > 0) cfg.jobs = g.jobs;
      if (g.seed_given) {
        for (auto &s : cfg.systems) s.nme_sc.seed = g.seed;
      }
      if (run_dump) {
        std::cout << pipeline_config_to_json(cfg);
        return 0;
      }
      const PipelineOutput out = run_pipeline(cfg);
      std::cout << out.report.summary();
      info("run: " + std::to_string(std::chrono::duration<double>(
                                        std::chrono::steady_clock::now() - t0).count()) + " s");
      return out.report.all_ok() ? 0 : 2;
    } else if (*syn) {
      if (g.seed_given) syn_opts.base.seed = g.seed;
      const auto ids = write_synthetic_corpus(syn_out, syn_opts);
      info("synth: wrote " + std::to_string(ids.size()) + " recordings to " + syn_out);
    }
  } catch (const ConfigError &e) {
    std::cerr << "diarkit: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "diarkit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
