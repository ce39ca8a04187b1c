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

#ifndef DIARKIT_VBX_H_
#define DIARKIT_VBX_H_

// Variational Bayes HMM resegmentation over x-vectors.
//
// Generative model, in a PLDA space where the within-speaker covariance is
// the identity and the across-speaker covariance is diag(phi):
//
//   y_s ~ N(0, I)                      speaker latent
//   x_t | z_t = s ~ N(sqrt(phi) y_s, I)
//   p(z_t = s | z_{t-1} = s') = loop_p [s == s'] + (1 - loop_p) pi_s
//
// Inference alternates the speaker posteriors q(y_s) = N(alpha_s, L_s^-1),
// forward-backward for the frame posteriors gamma, and an update of pi.
// fa scales the acoustic log-likelihoods and fb the speaker prior term.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "diarkit/formats.h"
#include "diarkit/timeline.h"

namespace diarkit {

struct VbxConfig {
  double fa = 0.15;
  double fb = 5.5;
  double loop_p = 0.33;
  int max_iters = 40;
  double elbo_tol = 1e-4;  // stop when |delta ELBO| < elbo_tol * T
  double min_pi = 1e-4;    // speakers below this prior are dropped for good
  double init_smoothing = 0.05;

  void validate() const;
};

struct SoftAlignment {
  Eigen::MatrixXd gamma;            // T x S, rows sum to 1
  Eigen::VectorXd pi;               // S, sums to 1
  std::vector<int> speakers;        // init label of each surviving column
  std::vector<double> elbo_trace;   // one value per iteration
  std::vector<int> first;           // argmax column per frame
  std::vector<int> second;          // runner-up column, -1 when S == 1
  int iterations = 0;
};

struct ForwardBackwardResult {
  Eigen::MatrixXd gamma;      // T x S state posteriors
  Eigen::MatrixXd log_alpha;  // forward log messages, T x S
  Eigen::MatrixXd log_beta;   // backward log messages, T x S
  double log_px = 0.0;        // log marginal likelihood
};

// Log-domain forward-backward for an HMM with log emission scores `log_lik`
// (T x S), transition matrix `transition` (row = previous state) and
// initial distribution `initial`.
ForwardBackwardResult forward_backward(const Eigen::MatrixXd &log_lik,
                                       const Eigen::MatrixXd &transition,
                                       const Eigen::VectorXd &initial);

// `x` rows must already live in the PLDA space of `phi` (centered, projected
// and length-normalized). init_labels are arbitrary non-negative ids; output
// columns follow ascending init id.
SoftAlignment vbx_resegment(const Eigen::MatrixXd &x,
                            const std::vector<int> &init_labels,
                            const Eigen::VectorXd &phi,
                            const VbxConfig &cfg = {});
inline SoftAlignment vbx_resegment(const XVectorSequence &x,
                                   const std::vector<int> &init_labels,
                                   const BackendModel &model,
                                   const VbxConfig &cfg = {}) {
  return vbx_resegment(x.vectors, init_labels, model.phi, cfg);
}

struct AlignmentAnnotation {
  Annotation primary;
  std::vector<WindowLabel> second;  // one per window
};

// Primary speakers painted with the window midpoint rule, plus the
// per-window second speaker. Names are spk00, spk01, ... in order of first
// occurrence of the primary labels.
AlignmentAnnotation alignment_to_annotation(const SoftAlignment &alignment,
                                            const std::vector<Segment> &windows,
                                            const std::string &recording_id);

}  // namespace diarkit

#endif  // DIARKIT_VBX_H_
