// prosody/gaussian.h

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

#ifndef PROSODY_GAUSSIAN_H_
#define PROSODY_GAUSSIAN_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>

#include <Eigen/Core>

#include "prosody/error.h"

namespace prosody {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXd = Vector<double>;

/// One word token's prosody embedding.
struct ProsodySample {
  std::string word;
  std::string token_id;
  VectorXd embedding;
};

/// Count, sum and sum of squares of a set of d-dimensional samples. Enough
/// to evaluate the maximum-likelihood diagonal Gaussian of the set.
template <typename Scalar>
class SufficientStats {
 public:
  using VectorType = Vector<Scalar>;

  SufficientStats() = default;
  explicit SufficientStats(Eigen::Index dim)
      : sum_(VectorType::Zero(dim)), sumsq_(VectorType::Zero(dim)) {}
  SufficientStats(std::int64_t count, VectorType sum, VectorType sumsq)
      : count_(count), sum_(std::move(sum)), sumsq_(std::move(sumsq)) {
    if (sum_.size() != sumsq_.size())
      throw DimensionError("sum and sumsq dimensions differ");
  }

  template <typename Derived>
  void Add(const Eigen::MatrixBase<Derived> &x) {
    if (x.size() != sum_.size())
      throw DimensionError("sample of dimension " + std::to_string(x.size()) +
                           " added to stats of dimension " +
                           std::to_string(sum_.size()));
    ++count_;
    sum_ += x;
    sumsq_ += x.cwiseAbs2();
  }

  SufficientStats &operator+=(const SufficientStats &other) {
    if (other.Dim() != Dim())
      throw DimensionError("cannot add stats of dimension " +
                           std::to_string(other.Dim()) + " to dimension " +
                           std::to_string(Dim()));
    count_ += other.count_;
    sum_ += other.sum_;
    sumsq_ += other.sumsq_;
    return *this;
  }

  friend SufficientStats operator+(SufficientStats a, const SufficientStats &b) {
    a += b;
    return a;
  }

  std::int64_t count() const { return count_; }
  Eigen::Index Dim() const { return sum_.size(); }
  const VectorType &sum() const { return sum_; }
  const VectorType &sumsq() const { return sumsq_; }

  VectorType Mean() const { return sum_ / static_cast<Scalar>(count_); }

  /// Per-dimension ML variance (divide by n), clamped below at `floor`.
  VectorType Variance(Scalar floor) const {
    const Scalar n = static_cast<Scalar>(count_);
    VectorType mean = sum_ / n;
    return (sumsq_ / n - mean.cwiseAbs2()).cwiseMax(floor);
  }

 private:
  std::int64_t count_ = 0;
  VectorType sum_;
  VectorType sumsq_;
};

using Stats = SufficientStats<double>;

/// Statistics of a sample set. `dim` fixes the dimension of an empty set.
inline Stats Accumulate(std::span<const ProsodySample> samples,
                        Eigen::Index dim) {
  Stats stats(dim);
  for (const auto &s : samples) stats.Add(s.embedding);
  return stats;
}

inline Stats Accumulate(std::span<const ProsodySample> samples) {
  if (samples.empty())
    throw DimensionError("cannot infer dimension of an empty sample set");
  return Accumulate(samples, samples.front().embedding.size());
}

/// Log-likelihood of a node's samples under the ML diagonal Gaussian fitted
/// to those same samples:
///   LL = -(n/2) * sum_j [ log(2*pi*var_j) + 1 ],  var_j >= floor.
template <typename Scalar>
Scalar NodeLogLikelihood(const SufficientStats<Scalar> &stats, Scalar floor) {
  if (stats.count() <= 0)
    throw EmptyNodeError("log-likelihood of an empty node is undefined");
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar n = static_cast<Scalar>(stats.count());
  Vector<Scalar> var = stats.Variance(floor);
  return Scalar(-0.5) * n *
         ((two_pi * var.array()).log() + Scalar(1)).sum();
}

/// Increase in log-likelihood from splitting `parent` into `left` and
/// `right`. The children must add up to the parent.
template <typename Scalar>
Scalar SplitGain(const SufficientStats<Scalar> &parent,
                 const SufficientStats<Scalar> &left,
                 const SufficientStats<Scalar> &right, Scalar floor) {
  if (left.count() + right.count() != parent.count())
    throw ConsistencyError("child counts " + std::to_string(left.count()) +
                           " + " + std::to_string(right.count()) +
                           " do not add up to parent count " +
                           std::to_string(parent.count()));
  if (left.Dim() != parent.Dim() || right.Dim() != parent.Dim())
    throw DimensionError("split statistics have mismatched dimensions");
  auto close = [](const Vector<Scalar> &a, const Vector<Scalar> &b) {
    const Scalar tol = Scalar(1e-9);
    return ((a - b).array().abs() <=
            tol * (Scalar(1) + a.array().abs().max(b.array().abs())))
        .all();
  };
  if (!close(parent.sum(), left.sum() + right.sum()) ||
      !close(parent.sumsq(), left.sumsq() + right.sumsq()))
    throw ConsistencyError("child sums do not add up to the parent");
  return NodeLogLikelihood(left, floor) + NodeLogLikelihood(right, floor) -
         NodeLogLikelihood(parent, floor);
}

/// log N(x | mean, diag(var)).
template <typename DerivedX, typename DerivedM, typename DerivedV>
typename DerivedX::Scalar DiagGaussianLogDensity(
    const Eigen::MatrixBase<DerivedX> &x, const Eigen::MatrixBase<DerivedM> &mean,
    const Eigen::MatrixBase<DerivedV> &var) {
  using Scalar = typename DerivedX::Scalar;
  const Scalar log_two_pi = std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  return Scalar(-0.5) *
         ((x - mean).array().square() / var.array() + var.array().log() +
          log_two_pi)
             .sum();
}

}  // namespace prosody

#endif  // PROSODY_GAUSSIAN_H_
