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

#include "diarkit/cluster.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "diarkit/error.h"

namespace diarkit {

namespace {

void check_square(const Eigen::MatrixXd &m, const char *who) {
  if (m.rows() != m.cols()) throw Error(std::string(who) + ": matrix not square");
  if (!m.allFinite()) throw Error(std::string(who) + ": non-finite similarity");
}

// Connected components of the positive-weight graph; `labels` receives the
// component of each node when given.
int count_components(const Eigen::MatrixXd &affinity, std::vector<int> *labels = nullptr) {
  const Eigen::Index n = affinity.rows();
  std::vector<int> seen(n, 0);
  if (labels) labels->assign(n, 0);
  std::vector<Eigen::Index> stack;
  int components = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    if (labels) (*labels)[s] = components - 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const Eigen::Index u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < n; ++v) {
        if (!seen[v] && v != u && affinity(v, u) > 0.0) {
          seen[v] = 1;
          if (labels) (*labels)[v] = components - 1;
          stack.push_back(v);
        }
      }
    }
  }
  return components;
}

}  // namespace

std::vector<int> relabel_by_first_occurrence(const std::vector<int> &labels) {
  std::vector<int> out(labels.size());
  std::vector<std::pair<int, int>> seen;  // original -> new
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find_if(seen.begin(), seen.end(),
                           [&](const auto &p) { return p.first == labels[i]; });
    if (it == seen.end()) {
      seen.emplace_back(labels[i], static_cast<int>(seen.size()));
      out[i] = seen.back().second;
    } else {
      out[i] = it->second;
    }
  }
  return out;
}

std::vector<int> ahc(const Eigen::MatrixXd &similarity, const AhcConfig &cfg) {
  check_square(similarity, "ahc");
  const int n = static_cast<int>(similarity.rows());
  if (n == 0) throw Error("ahc: no items to cluster");

  // sums(i, j) holds the total raw similarity between clusters i and j; the
  // average linkage is sums(i, j) / (size[i] * size[j]).
  Eigen::MatrixXd sums = similarity;
  std::vector<double> size(n, 1.0);
  std::vector<char> active(n, 1);
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<double> best_val(n, -std::numeric_limits<double>::infinity());
  std::vector<int> best_j(n, -1);

  auto linkage = [&](int i, int j) { return sums(j, i) / (size[i] * size[j]); };
  auto rescan = [&](int i) {
    best_val[i] = -std::numeric_limits<double>::infinity();
    best_j[i] = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      const double v = linkage(i, j);
      if (v > best_val[i]) {
        best_val[i] = v;
        best_j[i] = j;
      }
    }
  };
  for (int i = 0; i < n; ++i) rescan(i);

  for (int clusters = n; clusters > 1; --clusters) {
    int a = -1, b = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!active[i] || best_j[i] < 0) continue;
      const int lo = std::min(i, best_j[i]), hi = std::max(i, best_j[i]);
      if (best_val[i] > best || (best_val[i] == best && (lo < a || (lo == a && hi < b)))) {
        best = best_val[i];
        a = lo;
        b = hi;
      }
    }
    if (a < 0 || !(best > cfg.threshold)) break;

    sums.col(a) += sums.col(b);
    sums.row(a) += sums.row(b);
    size[a] += size[b];
    active[b] = 0;
    parent[b] = a;

    for (int k = 0; k < n; ++k) {
      if (!active[k] || k == a) continue;
      if (best_j[k] == a || best_j[k] == b) {
        rescan(k);
      } else {
        const double v = linkage(k, a);
        if (v > best_val[k] || (v == best_val[k] && a < best_j[k])) {
          best_val[k] = v;
          best_j[k] = a;
        }
      }
    }
    rescan(a);
  }

  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    int r = i;
    while (parent[r] != r) r = parent[r];
    labels[i] = r;
  }
  return relabel_by_first_occurrence(labels);
}

namespace {

// rank(i, j): position of j when row i is sorted by decreasing similarity,
// the diagonal always first and ties broken by column index.
Eigen::MatrixXi row_ranks(const Eigen::MatrixXd &similarity) {
  const Eigen::Index n = similarity.rows();
  Eigen::MatrixXi rank(n, n);
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](Eigen::Index j) {
      return j == i ? std::numeric_limits<double>::infinity() : similarity(i, j);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return key(x) > key(y); });
    for (Eigen::Index r = 0; r < n; ++r) rank(i, order[r]) = static_cast<int>(r);
  }
  return rank;
}

Eigen::MatrixXd pruned_from_ranks(const Eigen::MatrixXd &similarity,
                                  const Eigen::MatrixXi &rank, int p) {
  const Eigen::Index n = similarity.rows();
  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      if (rank(i, j) < p || rank(j, i) < p) {
        sym(i, j) = std::max(similarity(i, j), 0.0);
      }
    }
  }
  return sym;
}

}  // namespace

Eigen::MatrixXd pruned_affinity(const Eigen::MatrixXd &similarity, int p) {
  check_square(similarity, "pruned_affinity");
  return pruned_from_ranks(similarity, row_ranks(similarity), p);
}

std::vector<int> kmeans(const Eigen::MatrixXd &points, int k, int restarts,
                        int max_iters, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (k <= 0 || k > n) throw Error("kmeans: k out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<int> best_labels(n, 0);
  double best_inertia = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd centers(k, points.cols());
  std::vector<int> labels(n);
  Eigen::VectorXd d2(n);

  for (int run = 0; run < std::max(1, restarts); ++run) {
    // k-means++ seeding.
    centers.row(0) = points.row(static_cast<Eigen::Index>(unif(rng) * n) % n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = (points.row(i) - centers.row(0)).squaredNorm();
    }
    for (int c = 1; c < k; ++c) {
      const double total = d2.sum();
      Eigen::Index pick = 0;
      if (total > 0.0) {
        double u = unif(rng) * total;
        for (pick = 0; pick < n - 1; ++pick) {
          u -= d2[pick];
          if (u <= 0.0 && d2[pick] > 0.0) break;
        }
      } else {
        pick = static_cast<Eigen::Index>(unif(rng) * n) % n;
      }
      centers.row(c) = points.row(pick);
      for (Eigen::Index i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], (points.row(i) - centers.row(c)).squaredNorm());
      }
    }

    std::fill(labels.begin(), labels.end(), -1);
    double inertia = 0.0;
    for (int iter = 0; iter < max_iters; ++iter) {
      bool changed = false;
      inertia = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double d = (points.row(i) - centers.row(c)).squaredNorm();
          if (d < best) {
            best = d;
            arg = c;
          }
        }
        if (labels[i] != arg) changed = true;
        labels[i] = arg;
        d2[i] = best;
        inertia += best;
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      std::vector<int> counts(k, 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[i]) += points.row(i);
        ++counts[labels[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
          centers.row(c) = sums.row(c) / counts[c];
        } else {
          // Re-seed an empty cluster at the worst-fit point.
          Eigen::Index far = 0;
          d2.maxCoeff(&far);
          centers.row(c) = points.row(far);
          d2[far] = 0.0;
        }
      }
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return relabel_by_first_occurrence(best_labels);
}

NmeScResult nme_sc_detailed(const Eigen::MatrixXd &similarity,
                            const NmeScConfig &cfg) {
  check_square(similarity, "nme_sc");
  const int n = static_cast<int>(similarity.rows());
  if (n < 2) throw Error("nme_sc: need at least two items");
  if (cfg.max_speakers < 1) throw ConfigError("nme_sc: max_speakers must be >= 1");

  NmeScResult result;
  result.labels.assign(n, 0);

  // Degenerate input: every row identical.
  bool all_equal = true;
  for (int i = 1; i < n && all_equal; ++i) {
    all_equal = (similarity.row(i) - similarity.row(0)).cwiseAbs().maxCoeff() < 1e-12;
  }
  if (all_equal) return result;

  const Eigen::MatrixXi rank = row_ranks(similarity);
  std::vector<int> components;
  const int target = count_components(pruned_from_ranks(similarity, rank, n), &components);
  const int p_cap = std::max(1, n - 1);
  int p_min = std::clamp(cfg.p_min, 1, p_cap);
  int p_max = cfg.p_max > 0
                  ? cfg.p_max
                  : static_cast<int>(std::floor(cfg.p_max_fraction * n));
  p_max = std::clamp(std::max(p_max, p_min), 1, p_cap);

  const int max_k = std::min(cfg.max_speakers, n - 1);
  double best_ratio = std::numeric_limits<double>::infinity();
  int best_p = -1, best_k = 1;
  Eigen::MatrixXd best_vectors;
  std::vector<int> candidates;
  const int span = p_max - p_min + 1;
  if (cfg.max_candidates > 0 && span > cfg.max_candidates) {
    for (int c = 0; c < cfg.max_candidates; ++c) {
      candidates.push_back(p_min + static_cast<int>(std::lround(
                                       static_cast<double>(c) * (span - 1) /
                                       (cfg.max_candidates - 1))));
    }
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
  } else {
    for (int p = p_min; p <= p_max; ++p) candidates.push_back(p);
  }
  for (int p : candidates) {
    const Eigen::MatrixXd a = pruned_from_ranks(similarity, rank, p);
    Eigen::MatrixXd laplacian = -a;
    laplacian.diagonal() = a.rowwise().sum();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
    if (eig.info() != Eigen::Success) continue;
    const Eigen::VectorXd &lambda = eig.eigenvalues();
    const double lambda_max = lambda[n - 1];
    if (lambda_max < 1e-12) continue;
    // Rank p keeps p - 1 neighbours per row, so clusters smaller than p
    // cannot separate. Components of the full graph always can.
    const int k_limit = std::min(max_k, std::max(target, n / p));
    int k = 1;
    double gap = -1.0;
    for (int i = 1; i <= k_limit; ++i) {
      const double g = lambda[i] - lambda[i - 1];
      if (g > gap) {
        gap = g;
        k = i;
      }
    }
    if (!(gap > 0.0)) continue;
    const double ratio = static_cast<double>(p) / (gap / lambda_max);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best_p = p;
      best_k = k;
      best_vectors = eig.eigenvectors().leftCols(k);
    }
  }
  if (best_p < 0) {
    // No candidate graph has an edge: every item stands alone.
    if (target <= cfg.max_speakers) {
      result.labels = components;
      result.num_speakers = target;
    }
    return result;
  }

  result.p = best_p;
  result.ratio = best_ratio;
  result.num_speakers = best_k;
  if (best_k > 1) {
    result.labels = kmeans(best_vectors, best_k, cfg.kmeans_restarts,
                           cfg.kmeans_max_iters, cfg.seed);
    result.num_speakers =
        *std::max_element(result.labels.begin(), result.labels.end()) + 1;
  }
  return result;
}

std::vector<std::optional<Segment>> window_territories(
    const std::vector<Segment> &windows) {
  std::vector<std::optional<Segment>> out;
  out.reserve(windows.size());
  for (std::size_t t = 0; t < windows.size(); ++t) {
    const Segment &w = windows[t];
    double left = w.start(), right = w.end();
    if (t > 0 && windows[t - 1].end() >= w.start() - kTimeEps) {
      const Segment &prev = windows[t - 1];
      left = std::clamp(0.5 * (prev.center() + w.center()), w.start(),
                        std::max(w.start(), prev.end()));
    }
    if (t + 1 < windows.size() && windows[t + 1].start() <= w.end() + kTimeEps) {
      const Segment &next = windows[t + 1];
      right = std::clamp(0.5 * (w.center() + next.center()),
                         std::min(w.end(), next.start()), w.end());
    }
    Segment s = w;
    if (make_segment(left, right, &s)) {
      out.emplace_back(s);
    } else {
      out.emplace_back(std::nullopt);  // duplicate window
    }
  }
  return out;
}

std::string speaker_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%02d", index);
  return buf;
}

Annotation labels_to_annotation(const std::vector<int> &labels,
                                const std::vector<Segment> &windows,
                                const std::string &recording_id) {
  if (labels.size() != windows.size()) {
    throw Error("labels_to_annotation: " + std::to_string(labels.size()) +
                " labels for " + std::to_string(windows.size()) + " windows");
  }
  const std::vector<int> ids = relabel_by_first_occurrence(labels);
  const auto territory = window_territories(windows);
  Annotation a(recording_id);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (territory[t]) a.add(*territory[t], speaker_name(ids[t]));
  }
  return a.normalized();
}

}  // namespace diarkit
