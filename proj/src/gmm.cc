// src/gmm.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "prosody/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "prosody/error.h"

namespace prosody {

namespace {

using Eigen::ArrayXd;
using Eigen::Index;
using Eigen::MatrixXd;

// Responsibility mass below this fraction of n marks a collapsed component.
constexpr double kCollapseFraction = 1e-8;

VectorXd MlVariance(const MatrixXd &data, double floor) {
  const VectorXd mean = data.colwise().mean().transpose();
  return ((data.rowwise() - mean.transpose()).array().square().colwise().sum() /
          static_cast<double>(data.rows()))
      .transpose()
      .matrix()
      .cwiseMax(floor);
}

// Squared distance from every row to `center`.
VectorXd SquaredDistances(const MatrixXd &data, const VectorXd &center) {
  return (data.rowwise() - center.transpose()).rowwise().squaredNorm();
}

Index SampleByWeight(const VectorXd &w, double total, std::mt19937_64 &rng) {
  const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (r < acc && w[i] > 0.0) return i;
  }
  Index last = w.size() - 1;
  while (last > 0 && !(w[last] > 0.0)) --last;
  return last;
}

// Greedy k-means++: each new center is the best of a few D^2-weighted
// candidates, measured by the resulting potential.
MatrixXd KMeansPlusPlus(const MatrixXd &data, int m, std::mt19937_64 &rng) {
  const Index n = data.rows();
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(m)));
  MatrixXd centers(m, data.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  centers.row(0) = data.row(pick(rng));
  VectorXd dist2 = SquaredDistances(data, centers.row(0).transpose());
  for (int k = 1; k < m; ++k) {
    const double total = dist2.sum();
    if (!(total > 0.0)) {
      centers.row(k) = data.row(pick(rng));
      continue;
    }
    Index best = -1;
    double best_potential = std::numeric_limits<double>::infinity();
    VectorXd best_dist2;
    for (int t = 0; t < trials; ++t) {
      const Index cand = SampleByWeight(dist2, total, rng);
      VectorXd d2 = dist2.cwiseMin(SquaredDistances(data, data.row(cand).transpose()));
      const double potential = d2.sum();
      if (potential < best_potential) {
        best_potential = potential;
        best = cand;
        best_dist2 = std::move(d2);
      }
    }
    centers.row(k) = data.row(best);
    dist2 = std::move(best_dist2);
  }
  return centers;
}

std::vector<int> NearestCenter(const MatrixXd &data, const MatrixXd &centers,
                               VectorXd *best_dist) {
  const Index n = data.rows();
  std::vector<int> assign(n, 0);
  best_dist->setConstant(n, std::numeric_limits<double>::infinity());
  for (Index k = 0; k < centers.rows(); ++k) {
    const VectorXd d2 = SquaredDistances(data, centers.row(k).transpose());
    for (Index i = 0; i < n; ++i) {
      if (d2[i] < (*best_dist)[i]) {
        (*best_dist)[i] = d2[i];
        assign[i] = static_cast<int>(k);
      }
    }
  }
  return assign;
}

// Lloyd iterations. An empty cluster is moved to the point farthest from its
// current center.
std::vector<int> KMeans(const MatrixXd &data, MatrixXd &centers, int iters) {
  const Index m = centers.rows();
  VectorXd dist;
  std::vector<int> assign = NearestCenter(data, centers, &dist);
  for (int it = 0; it < iters; ++it) {
    MatrixXd sums = MatrixXd::Zero(m, data.cols());
    std::vector<Index> counts(m, 0);
    for (Index i = 0; i < data.rows(); ++i) {
      sums.row(assign[i]) += data.row(i);
      ++counts[assign[i]];
    }
    for (Index k = 0; k < m; ++k) {
      if (counts[k] > 0) {
        centers.row(k) = sums.row(k) / static_cast<double>(counts[k]);
      } else {
        Index far = 0;
        dist.maxCoeff(&far);
        centers.row(k) = data.row(far);
        dist[far] = 0.0;
      }
    }
    std::vector<int> next = NearestCenter(data, centers, &dist);
    const bool stable = next == assign;
    assign = std::move(next);
    if (stable) break;
  }
  return assign;
}

// log w_k + log N(x_i | mu_k, var_k) for all rows and components.
MatrixXd LogJoint(const MatrixXd &data, const std::vector<GmmComponent> &comps) {
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  const double d = static_cast<double>(data.cols());
  MatrixXd out(data.rows(), static_cast<Index>(comps.size()));
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto &c = comps[k];
    const ArrayXd inv_var = c.var.array().inverse();
    const double norm = -0.5 * (c.var.array().log().sum() + d * log_two_pi);
    out.col(static_cast<Index>(k)) =
        ((data.rowwise() - c.mean.transpose()).array().square().rowwise() *
         inv_var.transpose())
                .rowwise()
                .sum()
                .matrix() *
            -0.5 +
        VectorXd::Constant(data.rows(), norm + std::log(c.weight));
  }
  return out;
}

// Row-wise log-sum-exp.
VectorXd RowLogSumExp(const MatrixXd &logp) {
  VectorXd out(logp.rows());
  for (Index i = 0; i < logp.rows(); ++i) out[i] = LogSumExp(logp.row(i).transpose());
  return out;
}

}  // namespace

void GmmConfig::Validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(rel_tol >= 0.0)) throw ConfigError("rel_tol must be >= 0");
  if (!(floor > 0.0)) throw ConfigError("variance floor must be positive");
  if (kmeans_iters < 0) throw ConfigError("kmeans_iters must be >= 0");
  if (kmeans_restarts < 1) throw ConfigError("kmeans_restarts must be >= 1");
}

void LeafGmm::Validate(double floor) const {
  if (components.empty())
    throw ModelError("GMM for leaf '" + leaf + "' has no components");
  const Index d = Dim();
  double total = 0.0;
  for (const auto &c : components) {
    if (c.mean.size() != d || c.var.size() != d)
      throw ModelError("GMM for leaf '" + leaf + "' mixes dimensions");
    if (!(c.weight > 0.0) || c.weight > 1.0 + 1e-12)
      throw ModelError("GMM for leaf '" + leaf + "' has weight outside (0,1]");
    if (!c.mean.allFinite() || !c.var.allFinite() ||
        (c.var.array() < floor).any())
      throw ModelError("GMM for leaf '" + leaf + "' has an invalid variance");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ModelError("GMM weights for leaf '" + leaf + "' sum to " +
                     std::to_string(total));
}

double LogSumExp(const Eigen::Ref<const VectorXd> &x) {
  const double hi = x.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  return hi + std::log((x.array() - hi).exp().sum());
}

GmmFit FitGmm(const MatrixXd &data, int m, std::uint64_t seed,
              const GmmConfig &config) {
  config.Validate();
  if (m < 1) throw ConfigError("number of components must be >= 1");
  const Index n = data.rows();
  if (n < m)
    throw InsufficientDataError("cannot fit " + std::to_string(m) +
                                " components to " + std::to_string(n) +
                                " samples");
  if (!data.allFinite()) throw ValidationError("GMM data is not finite");
  const double nd = static_cast<double>(n);
  const VectorXd global_var = MlVariance(data, config.floor);

  std::mt19937_64 rng(seed);
  MatrixXd centers;
  std::vector<int> assign;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.kmeans_restarts; ++r) {
    MatrixXd c = KMeansPlusPlus(data, m, rng);
    std::vector<int> a = KMeans(data, c, config.kmeans_iters);
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) inertia += (data.row(i) - c.row(a[i])).squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      centers = std::move(c);
      assign = std::move(a);
    }
  }

  std::vector<GmmComponent> comps(m);
  {
    std::vector<std::vector<Index>> members(m);
    for (Index i = 0; i < n; ++i) members[assign[i]].push_back(i);
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
      auto &c = comps[k];
      const auto &rows = members[k];
      c.weight = static_cast<double>(std::max<std::size_t>(rows.size(), 1));
      total += c.weight;
      if (rows.empty()) {
        c.mean = centers.row(k).transpose();
        c.var = global_var;
        continue;
      }
      MatrixXd sub(static_cast<Index>(rows.size()), data.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) sub.row(r) = data.row(rows[r]);
      c.mean = sub.colwise().mean().transpose();
      c.var = rows.size() >= 2 ? MlVariance(sub, config.floor) : global_var;
    }
    for (auto &c : comps) c.weight /= total;
  }

  GmmFit fit;
  MatrixXd logp = LogJoint(data, comps);
  VectorXd lse = RowLogSumExp(logp);
  double ll = lse.sum();
  fit.ll_trace.push_back(ll);

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const MatrixXd resp = (logp.colwise() - lse).array().exp().matrix();
    const VectorXd mass = resp.colwise().sum().transpose();

    std::vector<GmmComponent> next = comps;
    std::vector<int> collapsed;
    for (int k = 0; k < m; ++k) {
      auto &c = next[k];
      c.weight = mass[k] / nd;
      if (mass[k] < kCollapseFraction * nd) collapsed.push_back(k);
      if (mass[k] > 0.0) {
        c.mean = (resp.col(k).transpose() * data).transpose() / mass[k];
        c.var = ((resp.col(k).transpose() *
                  (data.rowwise() - c.mean.transpose()).array().square().matrix())
                     .transpose() /
                 mass[k])
                    .cwiseMax(config.floor);
      }
      // A component with exactly zero mass keeps its old mean and variance
      // but still needs a positive weight for the log.
      c.weight = std::max(c.weight, std::numeric_limits<double>::min());
    }
    {
      double total = 0.0;
      for (const auto &c : next) total += c.weight;
      for (auto &c : next) c.weight /= total;
    }

    MatrixXd next_logp = LogJoint(data, next);
    VectorXd next_lse = RowLogSumExp(next_logp);
    double next_ll = next_lse.sum();

    // Re-seed collapsed components at the worst-explained samples. Kept only
    // when it does not lower the likelihood, so the trace stays monotone.
    if (!collapsed.empty()) {
      std::vector<GmmComponent> reseeded = next;
      std::vector<Index> order(n);
      for (Index i = 0; i < n; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return next_lse[a] < next_lse[b];
      });
      const double w = 1.0 / nd;
      for (std::size_t j = 0; j < collapsed.size(); ++j) {
        auto &c = reseeded[collapsed[j]];
        c.mean = data.row(order[j % order.size()]).transpose();
        c.var = global_var;
        c.weight = w;
      }
      double total = 0.0;
      for (const auto &c : reseeded) total += c.weight;
      for (auto &c : reseeded) c.weight /= total;
      MatrixXd trial_logp = LogJoint(data, reseeded);
      VectorXd trial_lse = RowLogSumExp(trial_logp);
      const double trial_ll = trial_lse.sum();
      if (trial_ll >= next_ll) {
        next = std::move(reseeded);
        next_logp = std::move(trial_logp);
        next_lse = std::move(trial_lse);
        next_ll = trial_ll;
        ++fit.reseeds;
      }
    }

    comps = std::move(next);
    logp = std::move(next_logp);
    lse = std::move(next_lse);
    fit.ll_trace.push_back(next_ll);
    const double improvement = (next_ll - ll) / std::max(std::abs(ll), 1e-300);
    ll = next_ll;
    if (improvement < config.rel_tol) break;
  }

  fit.gmm.components = std::move(comps);
  return fit;
}

VectorXd PosteriorLogScores(const Eigen::Ref<const VectorXd> &e,
                            const LeafGmm &gmm) {
  if (gmm.components.empty())
    throw ModelError("GMM for leaf '" + gmm.leaf + "' has no components");
  if (e.size() != gmm.Dim())
    throw DimensionError("embedding of dimension " + std::to_string(e.size()) +
                         " scored against GMM of dimension " +
                         std::to_string(gmm.Dim()));
  VectorXd scores(gmm.NumComponents());
  for (int k = 0; k < gmm.NumComponents(); ++k) {
    const auto &c = gmm.components[k];
    scores[k] = DiagGaussianLogDensity(e, c.mean, c.var) + std::log(c.weight);
  }
  return scores;
}

VectorXd Posteriors(const Eigen::Ref<const VectorXd> &e, const LeafGmm &gmm) {
  const VectorXd scores = PosteriorLogScores(e, gmm);
  return (scores.array() - LogSumExp(scores)).exp().matrix();
}

int ArgMax(const Eigen::Ref<const VectorXd> &scores) {
  int best = 0;
  for (Index k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = static_cast<int>(k);
  return best;
}

int AssignComponent(const Eigen::Ref<const VectorXd> &e, const LeafGmm &gmm) {
  return ArgMax(PosteriorLogScores(e, gmm));
}

}  // namespace prosody
