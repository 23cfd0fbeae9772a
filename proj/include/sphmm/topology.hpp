// sphmm/topology.hpp

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
#include <string>
#include <vector>

namespace sphmm {

enum class TopologyKind { LeftToRight, Circular };

std::string to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(const std::string &s);

/// Structural description of a chain: left-to-right or circular, first or
/// second order, N states.
struct TopologySpec {
  TopologyKind kind = TopologyKind::LeftToRight;
  int order = 1;      // 1 or 2
  int num_states = 1;

  bool operator==(const TopologySpec &) const = default;
};

/// Transition parameters plus the structural mask that pins which entries
/// may carry probability. States are 0-based throughout.
///
/// order 1:  prob/mask are N*N row-major a[i][j]; init is the N-vector pi.
/// order 2:  prob/mask are N*N*N row-major a[i][j][k]; init is the N*N
///           distribution over the first state pair (q1, q2).
///
/// Stochasticity: order-1 rows sum to 1; order-2 (i,j) groups with any
/// allowed mass sum to 1. Masked entries are exactly zero.
struct TransitionModel {
  int order = 1;
  int n = 0;
  std::vector<double> init;
  std::vector<std::uint8_t> mask;
  std::vector<double> prob;

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n + j) * n + k;
  }

  double a(int i, int j) const { return prob[idx(i, j)]; }
  double a(int i, int j, int k) const { return prob[idx(i, j, k)]; }
  bool allowed(int i, int j) const { return mask[idx(i, j)] != 0; }
  bool allowed(int i, int j, int k) const { return mask[idx(i, j, k)] != 0; }
};

/// Builds the structural mask for `spec` and fills the allowed entries
/// uniformly per normalization group.
///
/// Left-to-right order 1 allows self-loops and single steps forward;
/// circular additionally allows the wrap from the last state to the first.
/// Order-2 masks allow (i,j) -> k exactly when i -> j and j -> k are
/// allowed at order 1. The initial distribution puts left-to-right chains
/// in state 0 with certainty and circular chains uniformly over all
/// states; the order-2 pair initializer factorizes as pi(i) * a(i,j) of
/// the uniform order-1 model.
TransitionModel build_topology(const TopologySpec &spec);

/// True when every state can reach every other under the mask (order-1
/// reachability; order-2 masks are checked through their pair structure).
bool is_irreducible(const TransitionModel &tm);

}  // namespace sphmm
