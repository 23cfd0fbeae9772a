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

#include <stdexcept>

#include <doctest.h>

#include "sphmm/topology.hpp"

using namespace sphmm;

namespace {

// The transition rule stated directly: self-loop or single step forward,
// plus the wrap for circular chains.
bool edge_allowed(TopologyKind kind, int n, int i, int j) {
  if (j == i || j == i + 1) return true;
  if (kind == TopologyKind::Circular && i == n - 1 && j == 0) return true;
  return false;
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("order-1 masks follow the written transition rule") {
  for (TopologyKind kind : {TopologyKind::LeftToRight, TopologyKind::Circular}) {
    for (int n : {1, 2, 3, 6, 9}) {
      const TransitionModel tm = build_topology({kind, 1, n});
      REQUIRE(tm.n == n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          CHECK(tm.allowed(i, j) == edge_allowed(kind, n, i, j));
          if (!tm.allowed(i, j)) CHECK(tm.a(i, j) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("order-2 masks are exactly the composition of order-1 edges") {
  for (TopologyKind kind : {TopologyKind::LeftToRight, TopologyKind::Circular}) {
    for (int n : {2, 3, 5}) {
      const TransitionModel tm = build_topology({kind, 2, n});
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          for (int k = 0; k < n; ++k) {
            const bool expect = edge_allowed(kind, n, i, j) && edge_allowed(kind, n, j, k);
            CHECK(tm.allowed(i, j, k) == expect);
            if (!expect) CHECK(tm.a(i, j, k) == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("rows and pair groups are stochastic after construction") {
  for (TopologyKind kind : {TopologyKind::LeftToRight, TopologyKind::Circular}) {
    const TransitionModel t1 = build_topology({kind, 1, 5});
    for (int i = 0; i < 5; ++i) {
      double row = 0.0;
      for (int j = 0; j < 5; ++j) row += t1.a(i, j);
      CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
    double init_total = 0.0;
    for (double v : t1.init) init_total += v;
    CHECK(init_total == doctest::Approx(1.0).epsilon(1e-12));

    const TransitionModel t2 = build_topology({kind, 2, 5});
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        double group = 0.0;
        bool any = false;
        for (int k = 0; k < 5; ++k) {
          group += t2.a(i, j, k);
          any = any || t2.allowed(i, j, k);
        }
        if (any) CHECK(group == doctest::Approx(1.0).epsilon(1e-12));
        else CHECK(group == 0.0);
      }
    }
    double init2 = 0.0;
    for (double v : t2.init) init2 += v;
    CHECK(init2 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("left-to-right chains start in state 0, circular chains anywhere") {
  const TransitionModel ltr = build_topology({TopologyKind::LeftToRight, 1, 4});
  CHECK(ltr.init[0] == 1.0);
  for (int i = 1; i < 4; ++i) CHECK(ltr.init[static_cast<std::size_t>(i)] == 0.0);

  const TransitionModel circ = build_topology({TopologyKind::Circular, 1, 4});
  for (int i = 0; i < 4; ++i) {
    CHECK(circ.init[static_cast<std::size_t>(i)] == doctest::Approx(0.25).epsilon(1e-15));
  }

  // Order-2 initial pairs only cover allowed first edges.
  const TransitionModel ltr2 = build_topology({TopologyKind::LeftToRight, 2, 4});
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (!edge_allowed(TopologyKind::LeftToRight, 4, i, j)) {
        CHECK(ltr2.init[ltr2.idx(i, j)] == 0.0);
      }
    }
  }
  CHECK(ltr2.init[ltr2.idx(0, 0)] > 0.0);
  CHECK(ltr2.init[ltr2.idx(0, 1)] > 0.0);
  CHECK(ltr2.init[ltr2.idx(1, 1)] == 0.0);  // chains cannot begin past state 0
}

TEST_CASE("circular chains are irreducible, left-to-right chains are not") {
  for (int order : {1, 2}) {
    CHECK(is_irreducible(build_topology({TopologyKind::Circular, order, 4})));
    CHECK_FALSE(is_irreducible(build_topology({TopologyKind::LeftToRight, order, 4})));
  }
  // Degenerate single state: the self-loop reaches everything there is.
  CHECK(is_irreducible(build_topology({TopologyKind::LeftToRight, 1, 1})));
}

TEST_CASE("topology kind names round-trip") {
  for (TopologyKind kind : {TopologyKind::LeftToRight, TopologyKind::Circular}) {
    CHECK(topology_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS((void)topology_kind_from_string("spiral"), std::invalid_argument);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS((void)build_topology({TopologyKind::LeftToRight, 3, 4}), std::invalid_argument);
  CHECK_THROWS_AS((void)build_topology({TopologyKind::LeftToRight, 1, 0}), std::invalid_argument);
  CHECK_THROWS_AS((void)build_topology({TopologyKind::Circular, 2, -2}), std::invalid_argument);
}

}  // TEST_SUITE
