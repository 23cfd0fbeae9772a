// sphmm/suprasegmental.cpp

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

#include "sphmm/suprasegmental.hpp"

#include <stdexcept>
#include <string>

namespace sphmm {

namespace {

void check_group_size(int num_states, int group_size) {
  if (group_size < 1) throw std::invalid_argument("suprasegmental: group size must be positive");
  if (num_states % group_size != 0) {
    throw std::invalid_argument("suprasegmental: group size " + std::to_string(group_size) +
                                " must divide the acoustic state count " +
                                std::to_string(num_states));
  }
}

}  // namespace

std::vector<std::size_t> suprasegmental_boundaries(const std::vector<int> &acoustic_states,
                                                   int group_size) {
  if (acoustic_states.empty()) {
    throw std::invalid_argument("suprasegmental_boundaries: empty state path");
  }
  if (group_size < 1) throw std::invalid_argument("suprasegmental: group size must be positive");
  std::vector<std::size_t> boundaries;
  int current = acoustic_states.front() / group_size;
  for (std::size_t t = 1; t < acoustic_states.size(); ++t) {
    const int label = acoustic_states[t] / group_size;
    if (label != current) {
      boundaries.push_back(t);
      current = label;
    }
  }
  boundaries.push_back(acoustic_states.size());
  return boundaries;
}

ProsodicSequence derive_suprasegmental_obs(const Hmm &acoustic, const FrameProsody &tracks,
                                           const ObservationSequence &obs, int group_size) {
  check_group_size(acoustic.num_states(), group_size);
  if (obs.size() != tracks.size()) {
    throw std::invalid_argument("derive_suprasegmental_obs: observation and prosody frame counts differ (" +
                                std::to_string(obs.size()) + " vs " + std::to_string(tracks.size()) + ")");
  }
  const ViterbiResult vit = viterbi_segment(acoustic, obs.frames);
  if (vit.states.empty()) {
    throw std::runtime_error("derive_suprasegmental_obs: empty decoding path; "
                             "utterance unscorable under the acoustic model");
  }
  return aggregate_prosody(tracks, suprasegmental_boundaries(vit.states, group_size));
}

ProsodicSequence derive_suprasegmental_obs(const Hmm &acoustic, const AudioBuffer &audio,
                                           const ObservationSequence &obs, int group_size,
                                           const FrontendConfig &cfg) {
  return derive_suprasegmental_obs(acoustic, analyze_prosody(audio, cfg), obs, group_size);
}

SuprasegmentalHmm train_suprasegmental(const Hmm &acoustic,
                                       const std::vector<ObservationSequence> &obs_set,
                                       const std::vector<FrameProsody> &tracks_set,
                                       const SuprasegmentalOptions &opts,
                                       TrainResult *train_info) {
  check_group_size(acoustic.num_states(), opts.group_size);
  if (obs_set.size() != tracks_set.size()) {
    throw std::invalid_argument("train_suprasegmental: observation and prosody sets differ in size");
  }
  if (obs_set.empty()) throw std::invalid_argument("train_suprasegmental: no training utterances");

  std::vector<Matrix> sequences;
  std::vector<std::string> derive_warnings;
  sequences.reserve(obs_set.size());
  for (std::size_t u = 0; u < obs_set.size(); ++u) {
    try {
      sequences.push_back(
          derive_suprasegmental_obs(acoustic, tracks_set[u], obs_set[u], opts.group_size).as_matrix());
    } catch (const std::runtime_error &) {
      derive_warnings.push_back("train_suprasegmental: utterance " + std::to_string(u) +
                                " undecodable under the acoustic model; skipped");
    }
  }

  bool any_usable = false;
  for (const auto &seq : sequences) any_usable = any_usable || seq.size() >= 2;
  if (!any_usable) throw std::runtime_error("insufficient prosodic evidence");

  const int m_states = acoustic.num_states() / opts.group_size;
  TopologySpec spec{acoustic.topology.kind, acoustic.topology.order, m_states};

  SuprasegmentalHmm pros;
  pros.group_size = opts.group_size;
  pros.hmm = make_hmm(spec, static_cast<int>(sequences.front().front().size()));
  init_emissions_kmeans(pros.hmm, sequences, opts.mixture_components,
                        derive_seed(opts.seed, "suprasegmental"), opts.train.variance_floor);
  TrainResult info = train_em(pros.hmm, sequences, opts.train);
  info.warnings.insert(info.warnings.begin(), derive_warnings.begin(), derive_warnings.end());
  if (train_info) *train_info = std::move(info);
  return pros;
}

double suprasegmental_log_likelihood(const SuprasegmentalHmm &pros, const Hmm &acoustic,
                                     const ObservationSequence &obs,
                                     const FrameProsody &tracks) {
  ProsodicSequence seq;
  try {
    seq = derive_suprasegmental_obs(acoustic, tracks, obs, pros.group_size);
  } catch (const std::runtime_error &) {
    return kLogZero;
  }
  return forward_log_likelihood(pros.hmm, seq.as_matrix());
}

CombinedScore combined_log_score(double acoustic_logp, double prosodic_logp, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("combined_log_score: alpha must lie in [0, 1], got " +
                                std::to_string(alpha));
  }
  CombinedScore score;
  score.acoustic_logp = acoustic_logp;
  score.prosodic_logp = prosodic_logp;
  score.alpha = alpha;
  if (alpha == 0.0) {
    score.fused = acoustic_logp;
  } else if (alpha == 1.0) {
    score.fused = prosodic_logp;
  } else {
    score.fused = (1.0 - alpha) * acoustic_logp + alpha * prosodic_logp;
  }
  return score;
}

}  // namespace sphmm
