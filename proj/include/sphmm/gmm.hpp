// sphmm/gmm.hpp

// Copyright 2026  The sphmm Authors

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

#pragma once

#include <cstdint>
#include <vector>

#include "sphmm/common.hpp"

namespace sphmm {

/// Diagonal-covariance Gaussian mixture. Weights sum to 1; variances are
/// kept at or above the training floor.
struct GmmEmission {
  std::vector<double> weights;  // M
  Matrix means;                 // M x D
  Matrix vars;                  // M x D

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }

  double log_density(const std::vector<double> &x) const;

  /// Per-component log densities including the log weight; the total
  /// density is their log-sum-exp. Used by EM for component posteriors.
  std::vector<double> component_log_densities(const std::vector<double> &x) const;
};

/// K-means initialization (fixed seed, Lloyd iterations on Euclidean
/// distance) over the given frames. Weights come from cluster sizes,
/// variances from within-cluster spread, floored. When fewer frames than
/// components are available the mixture shrinks to the frame count, and an
/// empty pool yields a single unit Gaussian at the origin.
GmmEmission init_gmm_kmeans(const std::vector<const std::vector<double> *> &frames,
                            int components, int dim, std::uint64_t seed,
                            double variance_floor);

}  // namespace sphmm
