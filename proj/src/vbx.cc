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

#include "diarkit/vbx.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "diarkit/cluster.h"
#include "diarkit/error.h"

namespace diarkit {

namespace {

double logsumexp(const Eigen::Ref<const Eigen::VectorXd> &v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

void VbxConfig::validate() const {
  if (!(loop_p > 0.0 && loop_p < 1.0)) throw ConfigError("vbx: loop_p must lie in (0, 1)");
  if (!(fa > 0.0) || !(fb > 0.0)) throw ConfigError("vbx: fa and fb must be positive");
  if (max_iters < 1) throw ConfigError("vbx: max_iters must be >= 1");
  if (elbo_tol < 0.0 || min_pi < 0.0 || min_pi >= 1.0) {
    throw ConfigError("vbx: bad elbo_tol or min_pi");
  }
  if (!(init_smoothing >= 0.0 && init_smoothing < 1.0)) {
    throw ConfigError("vbx: init_smoothing must lie in [0, 1)");
  }
}

ForwardBackwardResult forward_backward(const Eigen::MatrixXd &log_lik,
                                       const Eigen::MatrixXd &transition,
                                       const Eigen::VectorXd &initial) {
  const Eigen::Index T = log_lik.rows(), S = log_lik.cols();
  if (T == 0 || S == 0) throw Error("forward_backward: empty input");
  if (transition.rows() != S || transition.cols() != S || initial.size() != S) {
    throw Error("forward_backward: shape mismatch");
  }
  const Eigen::MatrixXd log_tr = transition.array().log().matrix();
  ForwardBackwardResult r;
  r.log_alpha.resize(T, S);
  r.log_beta.resize(T, S);
  Eigen::VectorXd tmp(S);

  r.log_alpha.row(0) = initial.array().log().transpose() + log_lik.row(0).array();
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index s = 0; s < S; ++s) {
      tmp = r.log_alpha.row(t - 1).transpose() + log_tr.col(s);
      r.log_alpha(t, s) = logsumexp(tmp) + log_lik(t, s);
    }
  }
  r.log_beta.row(T - 1).setZero();
  for (Eigen::Index t = T - 1; t > 0; --t) {
    for (Eigen::Index s = 0; s < S; ++s) {
      tmp = log_tr.row(s).transpose() + log_lik.row(t).transpose() +
            r.log_beta.row(t).transpose();
      r.log_beta(t - 1, s) = logsumexp(tmp);
    }
  }
  r.log_px = logsumexp(r.log_alpha.row(T - 1).transpose());
  r.gamma = (r.log_alpha + r.log_beta).array() - r.log_px;
  r.gamma = r.gamma.array().exp();
  // Remove the last rounding error so each row sums to one.
  for (Eigen::Index t = 0; t < T; ++t) r.gamma.row(t) /= r.gamma.row(t).sum();
  return r;
}

SoftAlignment vbx_resegment(const Eigen::MatrixXd &x,
                            const std::vector<int> &init_labels,
                            const Eigen::VectorXd &phi, const VbxConfig &cfg) {
  cfg.validate();
  const Eigen::Index T = x.rows(), D = x.cols();
  if (T == 0) throw Error("vbx: no x-vectors");
  if (static_cast<Eigen::Index>(init_labels.size()) != T) {
    throw Error("vbx: " + std::to_string(init_labels.size()) +
                " init labels for " + std::to_string(T) + " x-vectors");
  }
  if (phi.size() != D) {
    throw Error("vbx: x-vectors have dim " + std::to_string(D) + " but phi has " +
                std::to_string(phi.size()));
  }
  if ((phi.array() < 0.0).any()) throw Error("vbx: negative phi");

  SoftAlignment a;
  std::map<int, int> column;
  for (int l : init_labels) {
    if (l < 0) throw Error("vbx: init labels must be non-negative");
    column.emplace(l, 0);
  }
  for (auto &[id, col] : column) {
    col = static_cast<int>(a.speakers.size());
    a.speakers.push_back(id);
  }
  Eigen::Index S = static_cast<Eigen::Index>(a.speakers.size());

  Eigen::MatrixXd gamma(T, S);
  const double off = S > 1 ? cfg.init_smoothing / static_cast<double>(S - 1) : 0.0;
  gamma.setConstant(off);
  for (Eigen::Index t = 0; t < T; ++t) {
    gamma(t, column[init_labels[t]]) = S > 1 ? 1.0 - cfg.init_smoothing : 1.0;
  }
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(S, 1.0 / static_cast<double>(S));

  const Eigen::ArrayXd sqrt_phi = phi.array().sqrt();
  const Eigen::MatrixXd rho = x.array().rowwise() * sqrt_phi.transpose();
  const double ratio = cfg.fa / cfg.fb;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // q(y_s): precision L_s = I + (fa/fb) N_s diag(phi), stored as inverse.
    const Eigen::VectorXd counts = gamma.colwise().sum().transpose();
    Eigen::ArrayXXd inv_l(S, D);
    for (Eigen::Index s = 0; s < S; ++s) {
      inv_l.row(s) = 1.0 / (1.0 + ratio * counts[s] * phi.array().transpose());
    }
    const Eigen::ArrayXXd alpha = ratio * inv_l * (gamma.transpose() * rho).array();

    // Frame-constant terms dropped; they do not move the posteriors.
    Eigen::MatrixXd log_lik =
        rho * alpha.matrix().transpose() -
        0.5 * ((inv_l + alpha.square()).matrix() * phi).transpose().replicate(T, 1);
    log_lik *= cfg.fa;
    if (!log_lik.allFinite()) {
      throw Error("vbx: non-finite log-likelihood at iteration " +
                  std::to_string(iter));
    }

    Eigen::MatrixXd transition =
        (1.0 - cfg.loop_p) * Eigen::VectorXd::Ones(S) * pi.transpose();
    transition.diagonal().array() += cfg.loop_p;
    const ForwardBackwardResult fb = forward_backward(log_lik, transition, pi);
    gamma = fb.gamma;

    // ELBO = log p(X) under the current q(Y) minus fb * KL(q(Y) || p(Y)).
    const double kl_term =
        0.5 * (inv_l.log() - inv_l - alpha.square() + 1.0).sum();
    const double elbo = fb.log_px + cfg.fb * kl_term;
    if (!std::isfinite(elbo)) {
      throw Error("vbx: non-finite ELBO at iteration " + std::to_string(iter));
    }

    // pi: expected entries into each state, counting the first frame and
    // every "jump" transition (the non-loop part of the transition).
    Eigen::VectorXd jumps = Eigen::VectorXd::Zero(S);
    for (Eigen::Index t = 1; t < T; ++t) {
      const double prev = logsumexp(fb.log_alpha.row(t - 1).transpose());
      for (Eigen::Index s = 0; s < S; ++s) {
        jumps[s] += std::exp(prev + log_lik(t, s) + fb.log_beta(t, s) - fb.log_px);
      }
    }
    Eigen::VectorXd new_pi = gamma.row(0).transpose() +
                             (1.0 - cfg.loop_p) * pi.cwiseProduct(jumps);
    pi = new_pi / new_pi.sum();

    a.elbo_trace.push_back(elbo);
    a.iterations = iter + 1;

    // Drop speakers whose prior collapsed.
    std::vector<Eigen::Index> keep;
    Eigen::Index best = 0;
    pi.maxCoeff(&best);
    for (Eigen::Index s = 0; s < S; ++s) {
      if (pi[s] >= cfg.min_pi || s == best) keep.push_back(s);
    }
    if (static_cast<Eigen::Index>(keep.size()) < S) {
      Eigen::MatrixXd g(T, keep.size());
      Eigen::VectorXd p(keep.size());
      std::vector<int> ids;
      for (std::size_t k = 0; k < keep.size(); ++k) {
        g.col(k) = gamma.col(keep[k]);
        p[k] = pi[keep[k]];
        ids.push_back(a.speakers[keep[k]]);
      }
      for (Eigen::Index t = 0; t < T; ++t) {
        const double sum = g.row(t).sum();
        if (sum > 0.0) {
          g.row(t) /= sum;
        } else {
          g.row(t).setConstant(1.0 / static_cast<double>(keep.size()));
        }
      }
      gamma = std::move(g);
      pi = p / p.sum();
      a.speakers = std::move(ids);
      S = static_cast<Eigen::Index>(keep.size());
    }

    const std::size_t n = a.elbo_trace.size();
    if (n >= 2 && std::abs(a.elbo_trace[n - 1] - a.elbo_trace[n - 2]) <
                      cfg.elbo_tol * static_cast<double>(T)) {
      break;
    }
  }

  a.gamma = std::move(gamma);
  a.pi = std::move(pi);
  a.first.assign(T, 0);
  a.second.assign(T, -1);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::Index f = 0;
    a.gamma.row(t).maxCoeff(&f);
    a.first[t] = static_cast<int>(f);
    double best = -1.0;
    for (Eigen::Index s = 0; s < S; ++s) {
      if (s != f && a.gamma(t, s) > best) {
        best = a.gamma(t, s);
        a.second[t] = static_cast<int>(s);
      }
    }
  }
  return a;
}

AlignmentAnnotation alignment_to_annotation(const SoftAlignment &alignment,
                                            const std::vector<Segment> &windows,
                                            const std::string &recording_id) {
  if (alignment.first.size() != windows.size()) {
    throw Error("alignment_to_annotation: " + std::to_string(alignment.first.size()) +
                " frames for " + std::to_string(windows.size()) + " windows");
  }
  std::map<int, int> name_of;  // column -> speaker index
  for (int f : alignment.first) name_of.emplace(f, static_cast<int>(name_of.size()));
  for (int s : alignment.second) {
    if (s >= 0) name_of.emplace(s, static_cast<int>(name_of.size()));
  }
  AlignmentAnnotation out;
  std::vector<int> primary(windows.size());
  for (std::size_t t = 0; t < windows.size(); ++t) {
    primary[t] = name_of.at(alignment.first[t]);
  }
  // labels_to_annotation renumbers by first occurrence, matching name_of.
  out.primary = labels_to_annotation(primary, windows, recording_id);
  out.second.reserve(windows.size());
  for (std::size_t t = 0; t < windows.size(); ++t) {
    WindowLabel wl{windows[t], std::nullopt};
    if (alignment.second[t] >= 0) wl.label = speaker_name(name_of.at(alignment.second[t]));
    out.second.push_back(std::move(wl));
  }
  return out;
}

}  // namespace diarkit
