// sphmm/eval.cpp

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

#include "sphmm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sphmm {

namespace fs = std::filesystem;

AccuracyTable accuracy_table(const std::vector<TrialRecord> &records) {
  if (records.empty()) throw std::invalid_argument("accuracy_table: no trial records");
  AccuracyTable table;
  for (const auto &r : records) {
    AccuracyRow &row = table[{to_string(r.variant), to_string(r.environment)}];
    auto &cell = r.gender == Gender::Male ? row.male : row.female;
    if (!cell) cell = AccuracyCell{};
    cell->total += 1;
    cell->correct += r.correct ? 1 : 0;
  }
  for (auto &[key, row] : table) {
    // Average of the populated gender cells, the way a two-row table is
    // averaged (not a trial-weighted pool).
    if (row.male && row.female) {
      row.average = (row.male->percent() + row.female->percent()) / 2.0;
    } else if (row.male) {
      row.average = row.male->percent();
    } else if (row.female) {
      row.average = row.female->percent();
    }
  }
  return table;
}

namespace {

double sample_mean(const std::vector<double> &xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double> &xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

TTestResult t_statistic(const std::vector<double> &sample_a, const std::vector<double> &sample_b) {
  if (sample_a.size() != sample_b.size()) {
    throw std::invalid_argument("t_statistic: samples must be the same size");
  }
  if (sample_a.size() < 2) throw std::invalid_argument("t_statistic: need at least 2 values per sample");

  const auto n = static_cast<double>(sample_a.size());
  const double mean_a = sample_mean(sample_a);
  const double mean_b = sample_mean(sample_b);
  const double sd_a = sample_sd(sample_a, mean_a);
  const double sd_b = sample_sd(sample_b, mean_b);

  TTestResult res;
  res.n = static_cast<int>(sample_a.size());
  // Divides the summed variances by the sample count, not by the combined
  // degrees of freedom a textbook pooled estimate would use.
  res.sd_pooled = std::sqrt((sd_a * sd_a + sd_b * sd_b) / n);
  if (res.sd_pooled == 0.0) {
    if (mean_a == mean_b) {
      res.t_value = 0.0;
    } else {
      res.t_value = mean_a > mean_b ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
    }
  } else {
    res.t_value = (mean_a - mean_b) / res.sd_pooled;
  }
  res.significant = res.t_value > kTCritical;
  return res;
}

std::vector<ScoredUtterance> score_corpus(const Registry &registry, const CorpusManifest &manifest,
                                          Variant variant, const EvalOptions &opts) {
  std::vector<const ManifestEntry *> test_entries;
  for (const auto &e : manifest.entries) {
    if (e.session == Session::Test) test_entries.push_back(&e);
  }

  std::vector<ScoredUtterance> scored(test_entries.size());
  IdentifyOptions inner = opts.identify;
  inner.threads = 1;  // parallelism lives at the utterance level here
  parallel_for(test_entries.size(), opts.threads, [&](std::size_t i) {
    const ManifestEntry &e = *test_entries[i];
    ScoredUtterance &out = scored[i];
    out.meta = e;
    const AudioBuffer audio = read_wav((fs::path(manifest.root) / e.path).string());
    try {
      out.scores = score_all(registry, audio, e.sentence, variant, inner);
    } catch (const std::runtime_error &) {
      out.scores.clear();  // nothing registered for this sentence
    }
  });
  return scored;
}

std::vector<TrialRecord> trials_at_alpha(const std::vector<ScoredUtterance> &scored,
                                         Variant variant, double alpha) {
  std::vector<TrialRecord> trials;
  trials.reserve(scored.size());
  for (const auto &s : scored) {
    TrialRecord r;
    r.path = s.meta.path;
    r.true_speaker = s.meta.speaker;
    r.sentence = s.meta.sentence;
    r.environment = s.meta.environment;
    r.gender = s.meta.gender;
    r.variant = variant;
    r.alpha = alpha;
    if (!s.scores.empty()) {
      const IdentificationResult id = fuse_and_rank(s.scores, alpha);
      if (id.ranked.front().second.fused != kLogZero) {
        r.predicted_speaker = id.winner;
        r.tie = id.tie;
        r.margin = id.margin;
      }
    }
    r.correct = !r.predicted_speaker.empty() && r.predicted_speaker == r.true_speaker;
    trials.push_back(std::move(r));
  }
  return trials;
}

std::vector<TrialRecord> evaluate_corpus(const Registry &registry, const CorpusManifest &manifest,
                                         Variant variant, const std::vector<double> &alphas,
                                         const EvalOptions &opts) {
  if (alphas.empty()) throw std::invalid_argument("evaluate_corpus: no alphas given");
  const auto scored = score_corpus(registry, manifest, variant, opts);
  std::vector<TrialRecord> trials;
  for (double alpha : alphas) {
    auto batch = trials_at_alpha(scored, variant, alpha);
    trials.insert(trials.end(), batch.begin(), batch.end());
  }
  return trials;
}

AlphaSweepResult sweep_from_scored(const std::vector<ScoredUtterance> &scored, Variant variant,
                                   const std::vector<double> &alphas) {
  AlphaSweepResult res;
  for (double alpha : alphas) {
    auto batch = trials_at_alpha(scored, variant, alpha);
    res.trials.insert(res.trials.end(), batch.begin(), batch.end());
  }
  std::map<std::pair<std::string, double>, SweepPoint> points;
  for (const auto &t : res.trials) {
    SweepPoint &p = points[{to_string(t.environment), t.alpha}];
    p.alpha = t.alpha;
    p.total += 1;
    p.correct += t.correct ? 1 : 0;
  }
  for (const auto &[key, p] : points) res.curves[key.first].push_back(p);
  return res;
}

AlphaSweepResult alpha_sweep(const Registry &registry, const CorpusManifest &manifest,
                             Variant variant, const std::vector<double> &alphas,
                             const EvalOptions &opts) {
  if (alphas.empty()) throw std::invalid_argument("alpha_sweep: no alphas given");
  return sweep_from_scored(score_corpus(registry, manifest, variant, opts), variant, alphas);
}

std::vector<std::vector<std::size_t>> partition_indices(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("partition_indices: need at least 2 subsets");
  if (n < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("partition_indices: cannot split " + std::to_string(n) +
                                " items into " + std::to_string(k) +
                                " subsets; need at least " + std::to_string(k));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "partition"));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> subsets(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    subsets[i % static_cast<std::size_t>(k)].push_back(order[i]);
  }
  for (auto &s : subsets) std::sort(s.begin(), s.end());
  return subsets;
}

CrossValResult cross_validate(const CorpusManifest &manifest, Variant variant,
                              const CrossValOptions &opts) {
  const std::size_t n = manifest.entries.size();
  const auto k = static_cast<std::size_t>(opts.num_subsets);
  if (n < 2 * k) {
    throw std::runtime_error("cross_validate: corpus has " + std::to_string(n) +
                             " utterances; " + std::to_string(opts.num_subsets) +
                             " subsets need at least " + std::to_string(2 * k));
  }

  CrossValResult res;
  res.subsets = partition_indices(n, opts.num_subsets, opts.seed);
  res.per_subset_trials.resize(k);
  std::vector<std::vector<std::string>> subset_warnings(k);

  parallel_for(k, opts.eval.threads, [&](std::size_t si) {
    const auto &subset = res.subsets[si];

    // Training takes of this subset, grouped per (speaker, sentence).
    std::map<std::pair<std::string, std::string>, std::vector<const ManifestEntry *>> cells;
    CorpusManifest test_part;
    test_part.root = manifest.root;
    for (std::size_t idx : subset) {
      const ManifestEntry &e = manifest.entries[idx];
      if (e.session == Session::Train) {
        cells[{e.speaker, e.sentence}].push_back(&e);
      } else {
        test_part.entries.push_back(e);
      }
    }
    if (cells.empty() || test_part.entries.empty()) {
      subset_warnings[si].push_back("subset " + std::to_string(si) +
                                    ": no training or no test utterances; subset skipped");
      return;
    }

    Registry registry;
    for (auto &[cell, takes] : cells) {
      std::sort(takes.begin(), takes.end(),
                [](const ManifestEntry *a, const ManifestEntry *b) { return a->take < b->take; });
      if (opts.train_per_cell > 0 && static_cast<int>(takes.size()) > opts.train_per_cell) {
        takes.resize(static_cast<std::size_t>(opts.train_per_cell));
      }
      std::vector<AudioBuffer> audio;
      audio.reserve(takes.size());
      for (const auto *e : takes) {
        audio.push_back(read_wav((fs::path(manifest.root) / e->path).string()));
      }
      try {
        registry.put(enroll(cell.first, cell.second, variant, audio, opts.enroll));
      } catch (const std::exception &ex) {
        subset_warnings[si].push_back("subset " + std::to_string(si) + ": cannot enroll speaker " +
                                      cell.first + ", sentence " + cell.second + ": " + ex.what());
      }
    }

    EvalOptions eval_opts = opts.eval;
    eval_opts.threads = 1;  // subsets already run in parallel
    res.per_subset_trials[si] = evaluate_corpus(registry, test_part, variant, {opts.alpha}, eval_opts);
  });

  for (auto &w : subset_warnings) {
    res.warnings.insert(res.warnings.end(), w.begin(), w.end());
  }

  // Per-environment and overall accuracy per subset; subsets with no trials
  // in an environment are excluded from that environment's statistics.
  const std::vector<std::string> groups = {"neutral", "shouted", "overall"};
  for (const auto &group : groups) {
    CrossValEnvStats stats;
    for (std::size_t si = 0; si < k; ++si) {
      int correct = 0, total = 0;
      for (const auto &t : res.per_subset_trials[si]) {
        if (group != "overall" && to_string(t.environment) != group) continue;
        total += 1;
        correct += t.correct ? 1 : 0;
      }
      if (total > 0) stats.per_subset.push_back(100.0 * correct / total);
    }
    if (stats.per_subset.empty()) continue;
    stats.mean = sample_mean(stats.per_subset);
    stats.sd = stats.per_subset.size() > 1 ? sample_sd(stats.per_subset, stats.mean) : 0.0;
    res.stats[group] = std::move(stats);
  }
  return res;
}

}  // namespace sphmm
