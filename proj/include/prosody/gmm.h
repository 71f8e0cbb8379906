// prosody/gmm.h

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

#ifndef PROSODY_GMM_H_
#define PROSODY_GMM_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "prosody/gaussian.h"

namespace prosody {

struct GmmComponent {
  double weight = 1.0;
  VectorXd mean;
  VectorXd var;

  bool operator==(const GmmComponent &o) const {
    return weight == o.weight && mean == o.mean && var == o.var;
  }
};

/// Diagonal-covariance Gaussian mixture for one tree leaf.
struct LeafGmm {
  std::string leaf;
  std::vector<GmmComponent> components;

  int NumComponents() const { return static_cast<int>(components.size()); }
  Eigen::Index Dim() const {
    return components.empty() ? 0 : components.front().mean.size();
  }
  /// Throws ModelError on inconsistent dimensions, non-positive weights,
  /// weights not summing to one, or variances below `floor`.
  void Validate(double floor) const;

  bool operator==(const LeafGmm &) const = default;
};

struct GmmConfig {
  int max_iters = 200;
  double rel_tol = 1e-6;
  double floor = 1e-6;
  int kmeans_iters = 10;
  /// Independent k-means++ starts; the one with the lowest inertia seeds EM.
  int kmeans_restarts = 10;

  void Validate() const;
};

struct GmmFit {
  LeafGmm gmm;
  /// Total data log-likelihood of the parameters entering each EM iteration,
  /// followed by that of the returned parameters.
  std::vector<double> ll_trace;
  int reseeds = 0;
};

/// EM for a diagonal GMM with m components over the rows of `data`.
/// Initialized by seeded k-means++ and a few Lloyd iterations. Throws
/// InsufficientDataError when there are fewer rows than components.
GmmFit FitGmm(const Eigen::MatrixXd &data, int m, std::uint64_t seed,
              const GmmConfig &config);

/// log N(e | mu_k, Sigma_k) + log w_k for every component.
VectorXd PosteriorLogScores(const Eigen::Ref<const VectorXd> &e,
                            const LeafGmm &gmm);

/// Normalized posteriors, via log-sum-exp over PosteriorLogScores.
VectorXd Posteriors(const Eigen::Ref<const VectorXd> &e, const LeafGmm &gmm);

/// Index of the largest score; the smallest index wins ties.
int ArgMax(const Eigen::Ref<const VectorXd> &scores);

/// Maximum-posterior component of `e`.
int AssignComponent(const Eigen::Ref<const VectorXd> &e, const LeafGmm &gmm);

/// log(sum(exp(x))) without overflow.
double LogSumExp(const Eigen::Ref<const VectorXd> &x);

}  // namespace prosody

#endif  // PROSODY_GMM_H_
