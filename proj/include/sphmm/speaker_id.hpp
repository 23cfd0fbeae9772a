// sphmm/speaker_id.hpp

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

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sphmm/audio.hpp"
#include "sphmm/frontend.hpp"
#include "sphmm/hmm.hpp"
#include "sphmm/suprasegmental.hpp"

namespace sphmm {

/// The four model families: acoustic chain topology (left-to-right or
/// circular) crossed with transition order (1 or 2), each paired with a
/// prosodic layer of mirrored kind and order.
enum class Variant { LTRSPHMM1, LTRSPHMM2, CSPHMM1, CSPHMM2 };

constexpr std::array<Variant, 4> kAllVariants = {Variant::LTRSPHMM1, Variant::LTRSPHMM2,
                                                 Variant::CSPHMM1, Variant::CSPHMM2};

std::string to_string(Variant v);
Variant variant_from_string(const std::string &s);
TopologyKind variant_kind(Variant v);
int variant_order(Variant v);

/// One enrolled reference model: the acoustic chain and its prosodic layer
/// for a (speaker, sentence) pair, plus the front-end settings the model
/// was trained with.
struct SpeakerModel {
  std::string speaker_id;
  std::string sentence_id;
  Variant variant = Variant::LTRSPHMM1;
  FrontendConfig frontend;
  Hmm acoustic;
  SuprasegmentalHmm suprasegmental;
};

struct EnrollOptions {
  int num_states = 9;
  int group_size = 3;
  int acoustic_mixtures = 4;
  int prosodic_mixtures = 2;
  double variance_floor = 1e-4;
  int max_iters = 20;
  double rel_tol = 1e-4;
  std::uint64_t seed = 20100101ull;
  FrontendConfig frontend;
};

/// Trains the acoustic model, then the prosodic layer on top of it.
/// Deterministic: the same inputs and seed give a bit-identical model.
/// Throws with diagnostics when training fails outright.
SpeakerModel enroll(const std::string &speaker_id, const std::string &sentence_id,
                    Variant variant, const std::vector<AudioBuffer> &utterances,
                    const EnrollOptions &opts, std::vector<std::string> *warnings = nullptr);

/// Both model scores for one registered speaker on one utterance.
struct SpeakerScore {
  std::string speaker_id;
  double acoustic_logp = kLogZero;
  double prosodic_logp = kLogZero;
};

struct IdentificationResult {
  std::vector<std::pair<std::string, CombinedScore>> ranked;  // descending fused
  std::string winner;
  double margin = std::numeric_limits<double>::infinity();  // +inf for a single candidate
  bool tie = false;  // exact fused-score tie at the top, broken by speaker id
};

/// Closed-set store of reference models keyed by (speaker, sentence,
/// variant). Optionally backed by a directory of model documents plus an
/// index file; the index is rewritten atomically on every save.
class Registry {
 public:
  Registry() = default;
  explicit Registry(std::string dir) : dir_(std::move(dir)) {}

  /// Loads the index and every model document it lists.
  void open();

  /// Inserts or replaces in memory; persists when backed by a directory.
  void put(SpeakerModel model);

  const SpeakerModel *find(const std::string &speaker_id, const std::string &sentence_id,
                           Variant variant) const;

  /// Models for one (sentence, variant), ordered by speaker id.
  std::vector<const SpeakerModel *> models_for(const std::string &sentence_id,
                                               Variant variant) const;

  /// Every stored model, ordered by (speaker, sentence, variant).
  std::vector<const SpeakerModel *> all_models() const;

  std::vector<std::string> speaker_ids() const;
  std::size_t size() const { return models_.size(); }
  const std::string &directory() const { return dir_; }

 private:
  std::string dir_;  // empty = in-memory only
  std::map<std::tuple<std::string, std::string, std::string>, SpeakerModel> models_;
};

struct IdentifyOptions {
  bool per_frame_normalize = false;  // divide each score by its sequence length
  int threads = 0;                   // 0 = hardware concurrency
};

/// Acoustic and prosodic log-likelihoods of one utterance under every model
/// registered for (sentence, variant). Speakers are scored independently
/// (possibly in parallel); the result order is by speaker id regardless of
/// scheduling.
std::vector<SpeakerScore> score_all(const Registry &registry, const AudioBuffer &audio,
                                    const std::string &sentence_id, Variant variant,
                                    const IdentifyOptions &opts = {});

/// Pure fusion and ranking of precomputed scores; the alpha-sweep fast
/// path. Exact ties rank by speaker id and are flagged in the result.
IdentificationResult fuse_and_rank(const std::vector<SpeakerScore> &scores, double alpha);

/// score_all + fuse_and_rank. Throws when no model is registered for the
/// sentence and variant, or when every fused score is -inf.
IdentificationResult identify(const Registry &registry, const AudioBuffer &audio,
                              const std::string &sentence_id, Variant variant, double alpha,
                              const IdentifyOptions &opts = {});

nlohmann::json speaker_model_to_json(const SpeakerModel &model);
SpeakerModel speaker_model_from_json(const nlohmann::json &doc);

}  // namespace sphmm
