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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "sphmm/common.hpp"
#include "sphmm/gmm.hpp"

using namespace sphmm;

namespace {

// Density written out longhand, summed in linear space.
double direct_log_density(const GmmEmission &g, const std::vector<double> &x) {
  double p = 0.0;
  for (int m = 0; m < g.components(); ++m) {
    double quad = 0.0, norm = 1.0;
    for (int d = 0; d < g.dim(); ++d) {
      const double mu = g.means[static_cast<std::size_t>(m)][static_cast<std::size_t>(d)];
      const double var = g.vars[static_cast<std::size_t>(m)][static_cast<std::size_t>(d)];
      quad += (x[static_cast<std::size_t>(d)] - mu) * (x[static_cast<std::size_t>(d)] - mu) / var;
      norm *= 2.0 * M_PI * var;
    }
    p += g.weights[static_cast<std::size_t>(m)] * std::exp(-0.5 * quad) / std::sqrt(norm);
  }
  return std::log(p);
}

}  // namespace

TEST_SUITE("gmm") {

TEST_CASE("single unit Gaussian matches the closed form") {
  GmmEmission g;
  g.weights = {1.0};
  g.means = {{0.0, 0.0}};
  g.vars = {{1.0, 1.0}};
  // At the mean: -D/2 log(2 pi).
  CHECK(g.log_density({0.0, 0.0}) == doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-14));
  CHECK(g.log_density({1.0, -2.0}) ==
        doctest::Approx(-std::log(2.0 * M_PI) - 0.5 * 5.0).epsilon(1e-14));
}

TEST_CASE("mixture density matches direct linear-space evaluation") {
  GmmEmission g;
  g.weights = {0.3, 0.7};
  g.means = {{-1.0, 0.5, 2.0}, {1.5, -0.5, 0.0}};
  g.vars = {{0.8, 1.2, 0.6}, {1.5, 0.9, 2.0}};
  for (const auto &x : {std::vector<double>{0.0, 0.0, 0.0},
                        std::vector<double>{-1.0, 0.5, 2.0},
                        std::vector<double>{3.0, -2.0, 1.0}}) {
    CHECK(g.log_density(x) == doctest::Approx(direct_log_density(g, x)).epsilon(1e-12));
  }
}

TEST_CASE("component log densities assemble to the total via log-sum-exp") {
  GmmEmission g;
  g.weights = {0.25, 0.75};
  g.means = {{0.0}, {3.0}};
  g.vars = {{1.0}, {0.5}};
  const std::vector<double> x = {1.0};
  const auto comps = g.component_log_densities(x);
  REQUIRE(comps.size() == 2);
  CHECK(log_sum_exp(comps) == doctest::Approx(g.log_density(x)).epsilon(1e-13));
  CHECK(comps[0] == doctest::Approx(std::log(0.25) - 0.5 * std::log(2.0 * M_PI) - 0.5).epsilon(1e-13));
}

TEST_CASE("kmeans init separates well-separated clusters") {
  std::vector<std::vector<double>> data;
  Rng rng(99);
  for (int i = 0; i < 60; ++i) data.push_back({-5.0 + 0.1 * rng.normal(), 0.1 * rng.normal()});
  for (int i = 0; i < 40; ++i) data.push_back({5.0 + 0.1 * rng.normal(), 0.1 * rng.normal()});
  std::vector<const std::vector<double> *> ptrs;
  for (const auto &d : data) ptrs.push_back(&d);

  const GmmEmission g = init_gmm_kmeans(ptrs, 2, 2, 1234, 1e-4);
  REQUIRE(g.components() == 2);
  // One mean near each cluster, weights near the 60/40 split.
  const bool first_is_left = g.means[0][0] < 0.0;
  const auto &left = first_is_left ? g.means[0] : g.means[1];
  const auto &right = first_is_left ? g.means[1] : g.means[0];
  CHECK(left[0] == doctest::Approx(-5.0).epsilon(0.02));
  CHECK(right[0] == doctest::Approx(5.0).epsilon(0.02));
  const double wl = first_is_left ? g.weights[0] : g.weights[1];
  CHECK(wl == doctest::Approx(0.6).epsilon(0.05));
  double total = g.weights[0] + g.weights[1];
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kmeans init respects the variance floor") {
  // All points identical: every variance must land exactly on the floor.
  std::vector<std::vector<double>> data(10, {2.0, -1.0});
  std::vector<const std::vector<double> *> ptrs;
  for (const auto &d : data) ptrs.push_back(&d);
  const GmmEmission g = init_gmm_kmeans(ptrs, 2, 2, 5, 1e-3);
  for (const auto &vrow : g.vars) {
    for (double v : vrow) CHECK(v >= 1e-3);
  }
}

TEST_CASE("kmeans shrinks to the frame count and survives an empty pool") {
  std::vector<std::vector<double>> data = {{1.0}, {2.0}};
  std::vector<const std::vector<double> *> ptrs;
  for (const auto &d : data) ptrs.push_back(&d);
  const GmmEmission g = init_gmm_kmeans(ptrs, 4, 1, 7, 1e-4);
  CHECK(g.components() <= 2);

  const GmmEmission empty = init_gmm_kmeans({}, 3, 2, 7, 1e-4);
  REQUIRE(empty.components() == 1);
  CHECK(empty.means[0] == std::vector<double>{0.0, 0.0});
  CHECK(empty.weights[0] == 1.0);
  // A unit Gaussian still scores inputs.
  CHECK(std::isfinite(empty.log_density({0.5, -0.5})));
}

TEST_CASE("kmeans init is deterministic per seed") {
  std::vector<std::vector<double>> data;
  Rng rng(41);
  for (int i = 0; i < 50; ++i) data.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
  std::vector<const std::vector<double> *> ptrs;
  for (const auto &d : data) ptrs.push_back(&d);
  const GmmEmission a = init_gmm_kmeans(ptrs, 3, 2, 77, 1e-4);
  const GmmEmission b = init_gmm_kmeans(ptrs, 3, 2, 77, 1e-4);
  CHECK(a.weights == b.weights);
  CHECK(a.means == b.means);
  CHECK(a.vars == b.vars);
}

}  // TEST_SUITE
