// sphmm/speaker_id.cpp

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

#include "sphmm/speaker_id.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <stdexcept>

#include "sphmm/model_io.hpp"

namespace sphmm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::LTRSPHMM1: return "ltrsphmm1";
    case Variant::LTRSPHMM2: return "ltrsphmm2";
    case Variant::CSPHMM1: return "csphmm1";
    case Variant::CSPHMM2: return "csphmm2";
  }
  throw std::logic_error("to_string: bad variant");
}

Variant variant_from_string(const std::string &s) {
  std::string low;
  low.reserve(s.size());
  for (char c : s) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Variant v : kAllVariants) {
    if (low == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown model variant '" + s +
                              "' (expected ltrsphmm1, ltrsphmm2, csphmm1 or csphmm2)");
}

TopologyKind variant_kind(Variant v) {
  return (v == Variant::CSPHMM1 || v == Variant::CSPHMM2) ? TopologyKind::Circular
                                                          : TopologyKind::LeftToRight;
}

int variant_order(Variant v) {
  return (v == Variant::LTRSPHMM2 || v == Variant::CSPHMM2) ? 2 : 1;
}

namespace {

void check_identifier(const std::string &id, const char *what) {
  if (id.empty()) throw std::invalid_argument(std::string(what) + " must not be empty");
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) {
      throw std::invalid_argument(std::string(what) + " '" + id +
                                  "' may only contain letters, digits, '_', '-' and '.'");
    }
  }
}

std::string model_filename(const SpeakerModel &m) {
  return m.speaker_id + "__" + m.sentence_id + "__" + to_string(m.variant) + ".json";
}

}  // namespace

SpeakerModel enroll(const std::string &speaker_id, const std::string &sentence_id,
                    Variant variant, const std::vector<AudioBuffer> &utterances,
                    const EnrollOptions &opts, std::vector<std::string> *warnings) {
  check_identifier(speaker_id, "speaker id");
  check_identifier(sentence_id, "sentence id");
  if (utterances.empty()) throw std::invalid_argument("enroll: no training utterances");
  if (opts.num_states % opts.group_size != 0) {
    throw std::invalid_argument("enroll: group size must divide the state count");
  }

  std::vector<ObservationSequence> obs_set;
  std::vector<FrameProsody> tracks_set;
  std::vector<Matrix> acoustic_seqs;
  obs_set.reserve(utterances.size());
  tracks_set.reserve(utterances.size());
  for (const auto &audio : utterances) {
    obs_set.push_back(compute_observations(audio, opts.frontend));
    tracks_set.push_back(analyze_prosody(audio, opts.frontend));
    acoustic_seqs.push_back(obs_set.back().frames);
  }

  SpeakerModel model;
  model.speaker_id = speaker_id;
  model.sentence_id = sentence_id;
  model.variant = variant;
  model.frontend = opts.frontend;

  const TopologySpec spec{variant_kind(variant), variant_order(variant), opts.num_states};
  model.acoustic = make_hmm(spec, static_cast<int>(acoustic_seqs.front().front().size()));

  TrainOptions train;
  train.max_iters = opts.max_iters;
  train.rel_tol = opts.rel_tol;
  train.variance_floor = opts.variance_floor;

  const std::uint64_t base =
      derive_seed(opts.seed, speaker_id, sentence_id, to_string(variant));
  init_emissions_kmeans(model.acoustic, acoustic_seqs, opts.acoustic_mixtures,
                        derive_seed(base, "acoustic"), opts.variance_floor);

  TrainResult acoustic_info;
  try {
    acoustic_info = train_em(model.acoustic, acoustic_seqs, train);
  } catch (const std::exception &e) {
    throw std::runtime_error("enroll: rejected for speaker '" + speaker_id + "', sentence '" +
                             sentence_id + "': acoustic training failed: " + e.what());
  }

  SuprasegmentalOptions sopt;
  sopt.group_size = opts.group_size;
  sopt.mixture_components = opts.prosodic_mixtures;
  sopt.seed = derive_seed(base, "prosodic");
  sopt.train = train;

  TrainResult prosodic_info;
  try {
    model.suprasegmental =
        train_suprasegmental(model.acoustic, obs_set, tracks_set, sopt, &prosodic_info);
  } catch (const std::exception &e) {
    throw std::runtime_error("enroll: rejected for speaker '" + speaker_id + "', sentence '" +
                             sentence_id + "': prosodic training failed: " + e.what());
  }

  if (warnings) {
    for (const auto &w : acoustic_info.warnings) warnings->push_back("acoustic: " + w);
    for (const auto &w : prosodic_info.warnings) warnings->push_back("prosodic: " + w);
  }
  return model;
}

void Registry::open() {
  if (dir_.empty()) throw std::logic_error("Registry::open: no backing directory");
  models_.clear();
  const fs::path index = fs::path(dir_) / "index.json";
  if (!fs::exists(index)) return;  // empty registry
  json doc = json::parse(read_text_file(index.string()));
  if (doc.value("format", "") != "sphmm-registry") {
    throw std::runtime_error("registry: " + index.string() + " is not a registry index");
  }
  for (const auto &entry : doc.at("entries")) {
    const fs::path file = fs::path(dir_) / entry.at("path").get<std::string>();
    SpeakerModel model = speaker_model_from_json(json::parse(read_text_file(file.string())));
    const auto key = std::make_tuple(model.speaker_id, model.sentence_id, to_string(model.variant));
    models_.insert_or_assign(key, std::move(model));
  }
}

void Registry::put(SpeakerModel model) {
  const auto key = std::make_tuple(model.speaker_id, model.sentence_id, to_string(model.variant));
  if (!dir_.empty()) {
    fs::create_directories(dir_);
    const std::string filename = model_filename(model);
    write_text_atomic((fs::path(dir_) / filename).string(),
                      canonical_json(speaker_model_to_json(model)));
  }
  models_.insert_or_assign(key, std::move(model));
  if (!dir_.empty()) {
    // Index lists every model; map order keeps the rewrite deterministic.
    json entries = json::array();
    for (const auto &[k, m] : models_) {
      entries.push_back(json{{"speaker", m.speaker_id},
                             {"sentence", m.sentence_id},
                             {"variant", to_string(m.variant)},
                             {"path", model_filename(m)}});
    }
    json index{{"format", "sphmm-registry"}, {"version", 1}, {"entries", entries}};
    write_text_atomic((fs::path(dir_) / "index.json").string(), canonical_json(index));
  }
}

const SpeakerModel *Registry::find(const std::string &speaker_id, const std::string &sentence_id,
                                   Variant variant) const {
  const auto it = models_.find(std::make_tuple(speaker_id, sentence_id, to_string(variant)));
  return it == models_.end() ? nullptr : &it->second;
}

std::vector<const SpeakerModel *> Registry::models_for(const std::string &sentence_id,
                                                       Variant variant) const {
  std::vector<const SpeakerModel *> out;
  for (const auto &[key, model] : models_) {
    if (model.sentence_id == sentence_id && model.variant == variant) out.push_back(&model);
  }
  // Map iteration is keyed by (speaker, sentence, variant), so `out` is
  // already sorted by speaker id.
  return out;
}

std::vector<const SpeakerModel *> Registry::all_models() const {
  std::vector<const SpeakerModel *> out;
  out.reserve(models_.size());
  for (const auto &[key, model] : models_) out.push_back(&model);
  return out;
}

std::vector<std::string> Registry::speaker_ids() const {
  std::vector<std::string> ids;
  for (const auto &[key, model] : models_) ids.push_back(model.speaker_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<SpeakerScore> score_all(const Registry &registry, const AudioBuffer &audio,
                                    const std::string &sentence_id, Variant variant,
                                    const IdentifyOptions &opts) {
  const auto models = registry.models_for(sentence_id, variant);
  if (models.empty()) {
    throw std::runtime_error("identify: no models registered for sentence '" + sentence_id +
                             "' and variant " + to_string(variant));
  }
  for (const auto *m : models) {
    if (!(m->frontend == models.front()->frontend)) {
      throw std::runtime_error("identify: registered models disagree on front-end settings");
    }
  }

  const FrontendConfig &cfg = models.front()->frontend;
  const ObservationSequence obs = compute_observations(audio, cfg);
  const FrameProsody tracks = analyze_prosody(audio, cfg);

  std::vector<SpeakerScore> scores(models.size());
  parallel_for(models.size(), opts.threads, [&](std::size_t i) {
    const SpeakerModel &m = *models[i];
    SpeakerScore s;
    s.speaker_id = m.speaker_id;
    s.acoustic_logp = forward_log_likelihood(m.acoustic, obs.frames);
    s.prosodic_logp = suprasegmental_log_likelihood(m.suprasegmental, m.acoustic, obs, tracks);
    if (opts.per_frame_normalize) {
      if (!obs.frames.empty() && s.acoustic_logp != kLogZero) {
        s.acoustic_logp /= static_cast<double>(obs.frames.size());
      }
      if (s.prosodic_logp != kLogZero) {
        const ViterbiResult vit = viterbi_segment(m.acoustic, obs.frames);
        const auto segs = suprasegmental_boundaries(vit.states, m.suprasegmental.group_size);
        s.prosodic_logp /= static_cast<double>(segs.size());
      }
    }
    scores[i] = std::move(s);
  });
  return scores;
}

IdentificationResult fuse_and_rank(const std::vector<SpeakerScore> &scores, double alpha) {
  if (scores.empty()) throw std::invalid_argument("fuse_and_rank: no scores");
  IdentificationResult res;
  res.ranked.reserve(scores.size());
  for (const auto &s : scores) {
    res.ranked.emplace_back(s.speaker_id,
                            combined_log_score(s.acoustic_logp, s.prosodic_logp, alpha));
  }
  std::sort(res.ranked.begin(), res.ranked.end(), [](const auto &a, const auto &b) {
    if (a.second.fused != b.second.fused) return a.second.fused > b.second.fused;
    return a.first < b.first;
  });
  res.winner = res.ranked.front().first;
  if (res.ranked.size() > 1) {
    res.margin = res.ranked[0].second.fused - res.ranked[1].second.fused;
    res.tie = res.ranked[0].second.fused == res.ranked[1].second.fused;
  }
  return res;
}

IdentificationResult identify(const Registry &registry, const AudioBuffer &audio,
                              const std::string &sentence_id, Variant variant, double alpha,
                              const IdentifyOptions &opts) {
  const auto scores = score_all(registry, audio, sentence_id, variant, opts);
  IdentificationResult res = fuse_and_rank(scores, alpha);
  bool any_finite = false;
  for (const auto &[id, score] : res.ranked) any_finite = any_finite || score.fused != kLogZero;
  if (!any_finite) throw std::runtime_error("identify: utterance unscorable (every fused score is -inf)");
  return res;
}

json speaker_model_to_json(const SpeakerModel &model) {
  return json{{"format", "sphmm-speaker-model"},
              {"version", 1},
              {"speaker_id", model.speaker_id},
              {"sentence_id", model.sentence_id},
              {"variant", to_string(model.variant)},
              {"frontend", frontend_to_json(model.frontend)},
              {"acoustic", hmm_to_json(model.acoustic)},
              {"suprasegmental", suprasegmental_to_json(model.suprasegmental)}};
}

SpeakerModel speaker_model_from_json(const json &doc) {
  if (doc.value("format", "") != "sphmm-speaker-model") {
    throw std::runtime_error("model_io: not a speaker model document");
  }
  SpeakerModel model;
  model.speaker_id = doc.at("speaker_id").get<std::string>();
  model.sentence_id = doc.at("sentence_id").get<std::string>();
  model.variant = variant_from_string(doc.at("variant").get<std::string>());
  model.frontend = frontend_from_json(doc.at("frontend"));
  model.acoustic = hmm_from_json(doc.at("acoustic"));
  model.suprasegmental = suprasegmental_from_json(doc.at("suprasegmental"));
  return model;
}

}  // namespace sphmm
