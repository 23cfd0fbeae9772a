// sphmm/hmm.hpp

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

#include "sphmm/common.hpp"
#include "sphmm/gmm.hpp"
#include "sphmm/topology.hpp"

namespace sphmm {

/// A continuous-emission hidden Markov chain over the structural mask of
/// its topology. Second-order chains keep their 3-D transition tensor here
/// and are evaluated through an equivalent first-order chain over state
/// pairs, so one forward/backward kernel serves both orders.
struct Hmm {
  TopologySpec topology;
  TransitionModel trans;
  std::vector<GmmEmission> emissions;  // one per state

  int num_states() const { return topology.num_states; }
  int dim() const { return emissions.empty() ? 0 : emissions[0].dim(); }
};

/// Hmm with the given topology and flat (uninitialized) emissions of the
/// requested dimension; call init_emissions_kmeans or set them by hand.
Hmm make_hmm(const TopologySpec &spec, int dim);

/// Uniform-segmentation k-means initialization: every training sequence is
/// cut into num_states equal spans, frames pool per state, and each state
/// gets a k-means mixture with `components` components.
void init_emissions_kmeans(Hmm &hmm, const std::vector<Matrix> &sequences,
                           int components, std::uint64_t seed, double variance_floor);

/// log P(observations | hmm), natural log, computed entirely in log space.
/// Returns -infinity when no path explains the sequence.
double forward_log_likelihood(const Hmm &hmm, const Matrix &obs);

struct StateSegment {
  int state = 0;
  std::size_t begin = 0;  // first frame
  std::size_t end = 0;    // one past last frame
};

struct ViterbiResult {
  std::vector<int> states;             // best path, one state per frame
  double log_prob = kLogZero;          // joint log-probability of that path
  std::vector<StateSegment> segments;  // maximal runs of equal state
};

/// Most likely state path under the mask; ties break toward the lowest
/// state index (lexicographically lowest pair for second order).
ViterbiResult viterbi_segment(const Hmm &hmm, const Matrix &obs);

struct TrainOptions {
  int max_iters = 20;
  double rel_tol = 1e-4;        // stop when relative improvement drops below
  double variance_floor = 1e-4;
};

struct TrainResult {
  std::vector<double> loglik_trace;  // total data log-likelihood entering each iteration
  std::vector<std::string> warnings;
  int iterations = 0;
};

/// Baum-Welch over one or more sequences. Structural zeros stay exactly
/// zero; rows and (i,j) groups remain stochastic; states or transitions
/// with zero expected occupancy keep their previous parameters and leave a
/// warning. The trace is non-decreasing up to floating-point slack.
TrainResult train_em(Hmm &hmm, const std::vector<Matrix> &sequences,
                     const TrainOptions &opts);

}  // namespace sphmm
