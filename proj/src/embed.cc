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

#include "diarkit/embed.h"

#include <cmath>

#include "diarkit/error.h"

namespace diarkit {

void WindowingConfig::validate() const {
  if (!(shift > 0.0) || window < shift) {
    throw ConfigError("windowing: need window >= shift > 0");
  }
}

std::vector<Segment> plan_windows(const Timeline &speech,
                                  const WindowingConfig &cfg) {
  cfg.validate();
  std::vector<Segment> out;
  for (const auto &seg : support(speech)) {
    if (seg.duration() <= cfg.window + kTimeEps) {
      out.push_back(seg);
      continue;
    }
    double last_end = seg.start();
    for (std::size_t k = 0;; ++k) {
      // Multiply rather than accumulate so starts stay exact multiples.
      const double start = seg.start() + static_cast<double>(k) * cfg.shift;
      if (start + cfg.window > seg.end() + kTimeEps) break;
      const double end = std::min(start + cfg.window, seg.end());
      out.emplace_back(start, end);
      last_end = end;
    }
    if (last_end < seg.end() - kTimeEps) {
      out.emplace_back(seg.end() - cfg.window, seg.end());
    }
  }
  return out;
}

XVectorSequence preprocess(const XVectorSequence &x, const BackendModel &model,
                           double target_norm) {
  if (x.dim() != model.dim()) {
    throw Error("preprocess: embeddings have dim " + std::to_string(x.dim()) +
                " but the model expects " + std::to_string(model.dim()));
  }
  if (target_norm <= 0.0) target_norm = std::sqrt(static_cast<double>(model.lda_dim()));
  XVectorSequence out;
  out.recording_id = x.recording_id;
  out.windows = x.windows;
  out.vectors = (x.vectors.rowwise() - model.mean.transpose()) * model.lda;
  for (Eigen::Index t = 0; t < out.vectors.rows(); ++t) {
    const double norm = out.vectors.row(t).norm();
    if (!(norm > 1e-12)) {
      throw Error("preprocess: row " + std::to_string(t) +
                  " is zero after centering and projection");
    }
    out.vectors.row(t) *= target_norm / norm;
  }
  return out;
}

XVectorSequence center_recording(const XVectorSequence &x) {
  XVectorSequence out = x;
  if (x.size() > 0) {
    const Eigen::RowVectorXd mean = x.vectors.colwise().mean();
    out.vectors.rowwise() -= mean;
  }
  return out;
}

Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd &rows) {
  if (rows.rows() == 0) throw Error("cosine_matrix: no rows");
  Eigen::MatrixXd unit = rows;
  for (Eigen::Index t = 0; t < unit.rows(); ++t) {
    const double norm = unit.row(t).norm();
    if (!(norm > 0.0)) {
      throw Error("cosine_matrix: row " + std::to_string(t) + " has zero norm");
    }
    unit.row(t) /= norm;
  }
  Eigen::MatrixXd s = unit * unit.transpose();
  s = (0.5 * (s + s.transpose().eval())).cwiseMax(-1.0).cwiseMin(1.0);
  s.diagonal().setOnes();
  return s;
}

}  // namespace diarkit
