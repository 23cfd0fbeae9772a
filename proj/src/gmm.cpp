// sphmm/gmm.cpp

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

#include "sphmm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sphmm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

std::vector<double> GmmEmission::component_log_densities(const std::vector<double> &x) const {
  const int m_count = components();
  const int d_count = dim();
  if (static_cast<int>(x.size()) != d_count) {
    throw std::invalid_argument("gmm: observation dimension " + std::to_string(x.size()) +
                                " does not match emission dimension " + std::to_string(d_count));
  }
  std::vector<double> out(static_cast<std::size_t>(m_count), kLogZero);
  for (int m = 0; m < m_count; ++m) {
    const double w = weights[static_cast<std::size_t>(m)];
    if (w <= 0.0) continue;
    double acc = 0.0;
    const auto &mu = means[static_cast<std::size_t>(m)];
    const auto &var = vars[static_cast<std::size_t>(m)];
    for (int d = 0; d < d_count; ++d) {
      const double diff = x[static_cast<std::size_t>(d)] - mu[static_cast<std::size_t>(d)];
      acc += std::log(var[static_cast<std::size_t>(d)]) + diff * diff / var[static_cast<std::size_t>(d)];
    }
    out[static_cast<std::size_t>(m)] = std::log(w) - 0.5 * (d_count * kLog2Pi + acc);
  }
  return out;
}

double GmmEmission::log_density(const std::vector<double> &x) const {
  return log_sum_exp(component_log_densities(x));
}

GmmEmission init_gmm_kmeans(const std::vector<const std::vector<double> *> &frames,
                            int components, int dim, std::uint64_t seed,
                            double variance_floor) {
  GmmEmission g;
  const std::size_t pool = frames.size();
  if (pool == 0) {
    g.weights = {1.0};
    g.means = {std::vector<double>(static_cast<std::size_t>(dim), 0.0)};
    g.vars = {std::vector<double>(static_cast<std::size_t>(dim), 1.0)};
    return g;
  }
  const int k = std::max(1, std::min<int>(components, static_cast<int>(pool)));

  Rng rng(seed);
  Matrix centers(static_cast<std::size_t>(k));
  std::vector<std::size_t> order(pool);
  for (std::size_t i = 0; i < pool; ++i) order[i] = i;
  rng.shuffle(order);
  for (int c = 0; c < k; ++c) centers[static_cast<std::size_t>(c)] = *frames[order[static_cast<std::size_t>(c)]];

  std::vector<int> assign(pool, 0);
  auto sq_dist = [dim](const std::vector<double> &a, const std::vector<double> &b) {
    double d2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double diff = a[static_cast<std::size_t>(d)] - b[static_cast<std::size_t>(d)];
      d2 += diff * diff;
    }
    return d2;
  };

  for (int iter = 0; iter < 10; ++iter) {
    bool moved = false;
    for (std::size_t i = 0; i < pool; ++i) {
      int best = 0;
      double best_d = sq_dist(*frames[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d2 = sq_dist(*frames[i], centers[static_cast<std::size_t>(c)]);
        if (d2 < best_d) {
          best_d = d2;
          best = c;
        }
      }
      if (assign[i] != best) moved = true;
      assign[i] = best;
    }
    Matrix sums(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < pool; ++i) {
      ++counts[static_cast<std::size_t>(assign[i])];
      for (int d = 0; d < dim; ++d) sums[static_cast<std::size_t>(assign[i])][static_cast<std::size_t>(d)] += (*frames[i])[static_cast<std::size_t>(d)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        // Re-seed an empty cluster from a random frame.
        centers[static_cast<std::size_t>(c)] = *frames[rng.uniform_int(pool)];
        moved = true;
        continue;
      }
      for (int d = 0; d < dim; ++d) {
        centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] =
            sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
    if (!moved) break;
  }

  g.weights.assign(static_cast<std::size_t>(k), 0.0);
  g.means.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  g.vars.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < pool; ++i) {
    const auto c = static_cast<std::size_t>(assign[i]);
    ++counts[c];
    for (int d = 0; d < dim; ++d) g.means[c][static_cast<std::size_t>(d)] += (*frames[i])[static_cast<std::size_t>(d)];
  }
  for (int c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    if (counts[cc] == 0) {
      // Collapse any still-empty cluster onto the pool as a whole.
      counts[cc] = pool;
      std::fill(g.means[cc].begin(), g.means[cc].end(), 0.0);
      for (std::size_t i = 0; i < pool; ++i) {
        for (int d = 0; d < dim; ++d) g.means[cc][static_cast<std::size_t>(d)] += (*frames[i])[static_cast<std::size_t>(d)];
      }
      g.weights[cc] = 0.0;
    } else {
      g.weights[cc] = static_cast<double>(counts[cc]) / static_cast<double>(pool);
    }
    for (int d = 0; d < dim; ++d) g.means[cc][static_cast<std::size_t>(d)] /= static_cast<double>(counts[cc]);
  }
  // Normalize weights (re-seeded clusters may have claimed frames unevenly).
  double wsum = 0.0;
  for (double w : g.weights) wsum += w;
  if (wsum <= 0.0) {
    for (auto &w : g.weights) w = 1.0 / k;
  } else {
    for (auto &w : g.weights) w /= wsum;
  }

  for (std::size_t i = 0; i < pool; ++i) {
    const auto c = static_cast<std::size_t>(assign[i]);
    for (int d = 0; d < dim; ++d) {
      const double diff = (*frames[i])[static_cast<std::size_t>(d)] - g.means[c][static_cast<std::size_t>(d)];
      g.vars[c][static_cast<std::size_t>(d)] += diff * diff;
    }
  }
  for (int c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const double denom = static_cast<double>(std::max<std::size_t>(counts[cc], 1));
    for (int d = 0; d < dim; ++d) {
      g.vars[cc][static_cast<std::size_t>(d)] =
          std::max(g.vars[cc][static_cast<std::size_t>(d)] / denom, variance_floor);
    }
  }
  return g;
}

}  // namespace sphmm
