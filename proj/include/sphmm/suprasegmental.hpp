// sphmm/suprasegmental.hpp

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

#include "sphmm/frontend.hpp"
#include "sphmm/hmm.hpp"

namespace sphmm {

/// Prosodic model layered over a trained acoustic model: an M-state chain
/// of the same topology kind and order, where each of its states covers
/// `group_size` consecutive acoustic states and emits segment-level
/// prosodic vectors.
struct SuprasegmentalHmm {
  Hmm hmm;
  int group_size = 3;

  int num_states() const { return hmm.num_states(); }
};

struct SuprasegmentalOptions {
  int group_size = 3;
  int mixture_components = 2;  // segment counts are small, keep mixtures lean
  std::uint64_t seed = 20100101ull;
  TrainOptions train;
};

/// Weighted fusion of the two model scores. fused is affine in alpha with
/// the pure scores at the endpoints; -inf on either side propagates.
struct CombinedScore {
  double acoustic_logp = 0.0;
  double prosodic_logp = 0.0;
  double alpha = 0.0;
  double fused = 0.0;
};

/// Maps an acoustic state path to exclusive segment-end frame indices,
/// merging consecutive frames whose states fall in the same group of
/// `group_size` acoustic states. State s belongs to group s / group_size,
/// so the mapping is order-preserving.
std::vector<std::size_t> suprasegmental_boundaries(const std::vector<int> &acoustic_states,
                                                   int group_size);

/// Derives the segment-level observation sequence one utterance feeds into
/// the prosodic model: Viterbi-decode the acoustic states, merge them into
/// groups, and measure prosody per merged segment. Throws when the acoustic
/// model cannot decode the utterance at all (empty path).
ProsodicSequence derive_suprasegmental_obs(const Hmm &acoustic, const FrameProsody &tracks,
                                           const ObservationSequence &obs, int group_size);

/// Convenience overload that analyzes the audio itself.
ProsodicSequence derive_suprasegmental_obs(const Hmm &acoustic, const AudioBuffer &audio,
                                           const ObservationSequence &obs, int group_size,
                                           const FrontendConfig &cfg);

/// Trains the prosodic model on top of a trained acoustic model. The chain
/// mirrors the acoustic topology kind and order with
/// acoustic states / group_size states. `obs_set` and `tracks_set` are
/// parallel per-utterance inputs. Throws "insufficient prosodic evidence"
/// when every derived sequence has fewer than 2 segments. Utterances the
/// acoustic model cannot decode are skipped with a warning.
SuprasegmentalHmm train_suprasegmental(const Hmm &acoustic,
                                       const std::vector<ObservationSequence> &obs_set,
                                       const std::vector<FrameProsody> &tracks_set,
                                       const SuprasegmentalOptions &opts,
                                       TrainResult *train_info = nullptr);

/// Log-likelihood of an utterance's derived prosody under the given
/// prosodic model, segmenting with the given acoustic model. Returns -inf
/// when the acoustic model cannot decode the utterance.
double suprasegmental_log_likelihood(const SuprasegmentalHmm &pros, const Hmm &acoustic,
                                     const ObservationSequence &obs,
                                     const FrameProsody &tracks);

/// fused = (1 - alpha) * acoustic + alpha * prosodic, with the endpoint
/// cases returned exactly. Throws when alpha lies outside [0, 1].
CombinedScore combined_log_score(double acoustic_logp, double prosodic_logp, double alpha);

}  // namespace sphmm
