// sphmm/topology.cpp

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

#include "sphmm/topology.hpp"

#include <stdexcept>

namespace sphmm {

std::string to_string(TopologyKind kind) {
  return kind == TopologyKind::LeftToRight ? "left-to-right" : "circular";
}

TopologyKind topology_kind_from_string(const std::string &s) {
  if (s == "left-to-right") return TopologyKind::LeftToRight;
  if (s == "circular") return TopologyKind::Circular;
  throw std::invalid_argument("unknown topology kind: " + s);
}

namespace {

void validate(const TopologySpec &spec) {
  if (spec.order != 1 && spec.order != 2) {
    throw std::invalid_argument("build_topology: order must be 1 or 2, got " +
                                std::to_string(spec.order));
  }
  if (spec.num_states < 1) {
    throw std::invalid_argument("build_topology: need at least one state");
  }
  if (spec.kind == TopologyKind::Circular && spec.num_states < 2) {
    throw std::invalid_argument("build_topology: a circular topology needs at least 2 states");
  }
}

// Self-loop + successor, closed into a ring for circular chains.
std::vector<std::uint8_t> order1_mask(const TopologySpec &spec) {
  const int n = spec.num_states;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    mask[static_cast<std::size_t>(i) * n + i] = 1;
    if (i + 1 < n) {
      mask[static_cast<std::size_t>(i) * n + i + 1] = 1;
    } else if (spec.kind == TopologyKind::Circular) {
      mask[static_cast<std::size_t>(i) * n + 0] = 1;
    }
  }
  return mask;
}

std::vector<double> order1_init(const TopologySpec &spec) {
  const int n = spec.num_states;
  std::vector<double> pi(static_cast<std::size_t>(n), 0.0);
  if (spec.kind == TopologyKind::LeftToRight) {
    pi[0] = 1.0;
  } else {
    for (auto &p : pi) p = 1.0 / n;
  }
  return pi;
}

}  // namespace

TransitionModel build_topology(const TopologySpec &spec) {
  validate(spec);
  const int n = spec.num_states;
  const auto m1 = order1_mask(spec);

  TransitionModel tm;
  tm.order = spec.order;
  tm.n = n;

  if (spec.order == 1) {
    tm.mask = m1;
    tm.prob.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
      int row_count = 0;
      for (int j = 0; j < n; ++j) row_count += m1[tm.idx(i, j)];
      for (int j = 0; j < n; ++j) {
        if (m1[tm.idx(i, j)]) tm.prob[tm.idx(i, j)] = 1.0 / row_count;
      }
    }
    tm.init = order1_init(spec);
    return tm;
  }

  tm.mask.assign(static_cast<std::size_t>(n) * n * n, 0);
  tm.prob.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!m1[static_cast<std::size_t>(i) * n + j]) continue;
      int group_count = 0;
      for (int k = 0; k < n; ++k) group_count += m1[static_cast<std::size_t>(j) * n + k];
      for (int k = 0; k < n; ++k) {
        if (m1[static_cast<std::size_t>(j) * n + k]) {
          tm.mask[tm.idx(i, j, k)] = 1;
          tm.prob[tm.idx(i, j, k)] = 1.0 / group_count;
        }
      }
    }
  }

  // First state pair: pi(i) * a(i,j) of the uniform order-1 model.
  const auto pi1 = order1_init(spec);
  tm.init.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    int row_count = 0;
    for (int j = 0; j < n; ++j) row_count += m1[static_cast<std::size_t>(i) * n + j];
    for (int j = 0; j < n; ++j) {
      if (m1[static_cast<std::size_t>(i) * n + j]) {
        tm.init[tm.idx(i, j)] = pi1[static_cast<std::size_t>(i)] / row_count;
      }
    }
  }
  return tm;
}

bool is_irreducible(const TransitionModel &tm) {
  const int n = tm.n;
  // Order-2 masks project onto pair reachability with the same support as
  // the order-1 mask they were composed from.
  auto edge = [&](int i, int j) {
    if (tm.order == 1) return tm.allowed(i, j);
    for (int k = 0; k < n; ++k) {
      if (tm.allowed(k, i, j)) return true;
    }
    // Pairs unreachable as (k,i) still encode i->j structure in groups (i,j,*).
    for (int k = 0; k < n; ++k) {
      if (tm.allowed(i, j, k)) return true;
    }
    return false;
  };
  for (int start = 0; start < n; ++start) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < n; ++j) {
        if (!seen[static_cast<std::size_t>(j)] && edge(i, j)) {
          seen[static_cast<std::size_t>(j)] = true;
          stack.push_back(j);
        }
      }
    }
    for (bool s : seen) {
      if (!s) return false;
    }
  }
  return true;
}

}  // namespace sphmm
