// sphmm/experiment.cpp

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

#include "sphmm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace sphmm {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x, int decimals) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

std::string fmt_alpha(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("report: cannot open " + path + " for writing");
  return out;
}

template <typename Fn>
auto stage(const std::string &name, Fn fn) {
  try {
    return fn();
  } catch (const std::exception &e) {
    throw std::runtime_error("stage " + name + ": " + e.what());
  }
}

std::string pad(const std::string &s, std::size_t width) {
  std::string out = s;
  while (out.size() < width) out.push_back(' ');
  return out;
}

}  // namespace

Registry enroll_manifest(const CorpusManifest &manifest, Variant variant,
                         const EnrollOptions &opts, int threads,
                         std::vector<std::string> *warnings) {
  std::map<std::pair<std::string, std::string>, std::vector<const ManifestEntry *>> cells;
  for (const auto &e : manifest.entries) {
    if (e.session == Session::Train) cells[{e.speaker, e.sentence}].push_back(&e);
  }
  if (cells.empty()) throw std::runtime_error("enroll: manifest has no training utterances");

  std::vector<std::pair<std::string, std::string>> keys;
  keys.reserve(cells.size());
  for (const auto &[key, takes] : cells) keys.push_back(key);

  std::vector<std::optional<SpeakerModel>> models(keys.size());
  std::vector<std::string> cell_warnings(keys.size());
  parallel_for(keys.size(), threads, [&](std::size_t i) {
    auto takes = cells[keys[i]];
    std::sort(takes.begin(), takes.end(),
              [](const ManifestEntry *a, const ManifestEntry *b) { return a->take < b->take; });
    std::vector<AudioBuffer> audio;
    audio.reserve(takes.size());
    for (const auto *e : takes) {
      audio.push_back(read_wav((fs::path(manifest.root) / e->path).string()));
    }
    try {
      models[i] = enroll(keys[i].first, keys[i].second, variant, audio, opts);
    } catch (const std::exception &ex) {
      cell_warnings[i] = std::string("enroll failed: ") + ex.what();
    }
  });

  Registry registry;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (models[i]) {
      registry.put(std::move(*models[i]));
    } else if (warnings) {
      warnings->push_back(cell_warnings[i]);
    }
  }
  if (registry.size() == 0) throw std::runtime_error("enroll: no speaker could be enrolled");
  return registry;
}

ExperimentReport run_experiment(const ExperimentConfig &cfg) {
  if (cfg.corpus_dir.empty()) throw std::runtime_error("run_experiment: no corpus directory configured");
  if (cfg.variants.empty()) throw std::runtime_error("run_experiment: no variants configured");

  const CorpusManifest manifest = stage("ingest", [&] {
    return ingest_corpus(cfg.corpus_dir, (fs::path(cfg.corpus_dir) / cfg.manifest_name).string());
  });

  ExperimentReport report;
  std::vector<TrialRecord> all_trials;

  for (Variant variant : cfg.variants) {
    const std::string vname = to_string(variant);
    VariantOutcome outcome;
    outcome.variant = variant;

    const Registry registry = stage("enroll (" + vname + ")", [&] {
      return enroll_manifest(manifest, variant, cfg.enroll, cfg.eval.threads, &outcome.warnings);
    });

    const auto scored = stage("evaluate (" + vname + ")", [&] {
      return score_corpus(registry, manifest, variant, cfg.eval);
    });
    outcome.trials = trials_at_alpha(scored, variant, cfg.alpha);

    if (cfg.run_sweep) {
      outcome.sweep = stage("sweep (" + vname + ")",
                            [&] { return sweep_from_scored(scored, variant, cfg.sweep_alphas); });
      outcome.has_sweep = true;
    }

    if (cfg.run_crossval || cfg.run_ttests) {
      CrossValOptions cv;
      cv.num_subsets = cfg.crossval_subsets;
      cv.seed = cfg.seed;
      cv.alpha = cfg.alpha;
      cv.train_per_cell = cfg.crossval_train_per_cell;
      cv.enroll = cfg.enroll;
      cv.eval = cfg.eval;
      outcome.crossval = stage("crossval (" + vname + ")",
                               [&] { return cross_validate(manifest, variant, cv); });
      outcome.has_crossval = true;
      for (const auto &w : outcome.crossval.warnings) outcome.warnings.push_back("crossval: " + w);
    }

    all_trials.insert(all_trials.end(), outcome.trials.begin(), outcome.trials.end());
    report.variants.push_back(std::move(outcome));
  }

  report.table = stage("tabulate", [&] { return accuracy_table(all_trials); });

  if (cfg.run_ttests) {
    stage("ttests", [&]() -> int {
      for (const char *group : {"neutral", "shouted", "overall"}) {
        for (std::size_t a = 0; a < report.variants.size(); ++a) {
          for (std::size_t b = a + 1; b < report.variants.size(); ++b) {
            const auto &ca = report.variants[a].crossval.stats;
            const auto &cb = report.variants[b].crossval.stats;
            const auto ia = ca.find(group), ib = cb.find(group);
            if (ia == ca.end() || ib == cb.end()) continue;
            if (ia->second.per_subset.size() != ib->second.per_subset.size()) {
              report.warnings.push_back(std::string("ttests: unequal subset samples for group ") +
                                        group + "; pair skipped");
              continue;
            }
            PairwiseTTest t;
            t.variant_a = report.variants[a].variant;
            t.variant_b = report.variants[b].variant;
            t.group = group;
            t.test = t_statistic(ia->second.per_subset, ib->second.per_subset);
            report.ttests.push_back(t);
          }
        }
      }
      return 0;
    });
  }

  for (const auto &v : report.variants) {
    for (const auto &w : v.warnings) {
      report.warnings.push_back(to_string(v.variant) + ": " + w);
    }
  }

  stage("write", [&]() -> int {
    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    write_trials_csv((out / "trials.csv").string(), all_trials);
    write_accuracy_csv((out / "accuracy.csv").string(), report.table);
    if (cfg.run_ttests) write_ttests_csv((out / "ttests.csv").string(), report.ttests);
    if (cfg.run_sweep) write_sweep_csv((out / "sweep.csv").string(), report.variants);
    if (cfg.run_crossval || cfg.run_ttests) {
      write_crossval_csv((out / "crossval.csv").string(), report.variants);
    }
    auto report_txt = open_out((out / "report.txt").string());
    report_txt << render_report_text(report, cfg);
    return 0;
  });

  return report;
}

void write_trials_csv(const std::string &path, const std::vector<TrialRecord> &trials) {
  auto out = open_out(path);
  out << "variant,alpha,path,speaker,gender,sentence,environment,predicted,correct,tie,margin\n";
  for (const auto &t : trials) {
    out << to_string(t.variant) << ',' << fmt_alpha(t.alpha) << ',' << t.path << ','
        << t.true_speaker << ',' << to_string(t.gender) << ',' << t.sentence << ','
        << to_string(t.environment) << ',' << t.predicted_speaker << ',' << (t.correct ? 1 : 0)
        << ',' << (t.tie ? 1 : 0) << ',' << fmt(t.margin, 6) << "\n";
  }
}

void write_accuracy_csv(const std::string &path, const AccuracyTable &table) {
  auto out = open_out(path);
  out << "variant,environment,gender,correct,total,percent\n";
  for (const auto &[key, row] : table) {
    if (row.male) {
      out << key.first << ',' << key.second << ",male," << row.male->correct << ','
          << row.male->total << ',' << fmt(row.male->percent(), 4) << "\n";
    }
    if (row.female) {
      out << key.first << ',' << key.second << ",female," << row.female->correct << ','
          << row.female->total << ',' << fmt(row.female->percent(), 4) << "\n";
    }
    if (row.average) {
      out << key.first << ',' << key.second << ",average,,," << fmt(*row.average, 4) << "\n";
    }
  }
}

void write_ttests_csv(const std::string &path, const std::vector<PairwiseTTest> &tests) {
  auto out = open_out(path);
  out << "group,variant_a,variant_b,n,t_value,sd_pooled,significant\n";
  for (const auto &t : tests) {
    out << t.group << ',' << to_string(t.variant_a) << ',' << to_string(t.variant_b) << ','
        << t.test.n << ',' << fmt(t.test.t_value, 6) << ',' << fmt(t.test.sd_pooled, 6) << ','
        << (t.test.significant ? 1 : 0) << "\n";
  }
}

void write_sweep_csv(const std::string &path, const std::vector<VariantOutcome> &outcomes) {
  auto out = open_out(path);
  out << "variant,environment,alpha,correct,total,percent\n";
  for (const auto &o : outcomes) {
    if (!o.has_sweep) continue;
    for (const auto &[env, points] : o.sweep.curves) {
      for (const auto &p : points) {
        out << to_string(o.variant) << ',' << env << ',' << fmt_alpha(p.alpha) << ',' << p.correct
            << ',' << p.total << ',' << fmt(p.percent(), 4) << "\n";
      }
    }
  }
}

void write_crossval_csv(const std::string &path, const std::vector<VariantOutcome> &outcomes) {
  auto out = open_out(path);
  out << "variant,group,measure,value\n";
  for (const auto &o : outcomes) {
    if (!o.has_crossval) continue;
    for (const auto &[group, stats] : o.crossval.stats) {
      for (std::size_t i = 0; i < stats.per_subset.size(); ++i) {
        out << to_string(o.variant) << ',' << group << ",subset" << i << ','
            << fmt(stats.per_subset[i], 4) << "\n";
      }
      out << to_string(o.variant) << ',' << group << ",mean," << fmt(stats.mean, 4) << "\n";
      out << to_string(o.variant) << ',' << group << ",sd," << fmt(stats.sd, 4) << "\n";
    }
  }
}

std::string render_report_text(const ExperimentReport &report, const ExperimentConfig &cfg) {
  std::ostringstream out;
  out << "speaker identification report\n";
  out << "=============================\n\n";
  out << "corpus: " << cfg.corpus_dir << "\n";
  out << "alpha:  " << fmt_alpha(cfg.alpha) << "\n";
  out << "seed:   " << cfg.seed << "\n\n";

  out << "accuracy (percent correct)\n";
  out << pad("variant", 12) << pad("environment", 13) << pad("male", 9) << pad("female", 9)
      << "average\n";
  for (const auto &[key, row] : report.table) {
    out << pad(key.first, 12) << pad(key.second, 13)
        << pad(row.male ? fmt(row.male->percent(), 2) : "-", 9)
        << pad(row.female ? fmt(row.female->percent(), 2) : "-", 9)
        << (row.average ? fmt(*row.average, 2) : "-") << "\n";
  }
  out << "\n";

  bool any_crossval = false;
  for (const auto &o : report.variants) any_crossval = any_crossval || o.has_crossval;
  if (any_crossval) {
    out << "cross-validation accuracy over subsets (percent)\n";
    out << pad("variant", 12) << pad("group", 10) << pad("mean", 9) << pad("sd", 9) << "subsets\n";
    for (const auto &o : report.variants) {
      if (!o.has_crossval) continue;
      for (const auto &[group, stats] : o.crossval.stats) {
        out << pad(to_string(o.variant), 12) << pad(group, 10) << pad(fmt(stats.mean, 2), 9)
            << pad(fmt(stats.sd, 2), 9);
        for (std::size_t i = 0; i < stats.per_subset.size(); ++i) {
          out << (i ? " " : "") << fmt(stats.per_subset[i], 2);
        }
        out << "\n";
      }
    }
    out << "\n";
  }

  if (!report.ttests.empty()) {
    out << "pairwise t tests (threshold " << fmt(kTCritical, 3) << ")\n";
    out << pad("group", 10) << pad("a", 12) << pad("b", 12) << pad("t", 10) << "significant\n";
    for (const auto &t : report.ttests) {
      out << pad(t.group, 10) << pad(to_string(t.variant_a), 12) << pad(to_string(t.variant_b), 12)
          << pad(fmt(t.test.t_value, 3), 10) << (t.test.significant ? "yes" : "no") << "\n";
    }
    out << "\n";
  }

  bool any_sweep = false;
  for (const auto &o : report.variants) any_sweep = any_sweep || o.has_sweep;
  if (any_sweep) {
    out << "alpha sweep (percent correct)\n";
    out << pad("variant", 12) << pad("environment", 13) << pad("alpha", 8) << "percent\n";
    for (const auto &o : report.variants) {
      if (!o.has_sweep) continue;
      for (const auto &[env, points] : o.sweep.curves) {
        for (const auto &p : points) {
          out << pad(to_string(o.variant), 12) << pad(env, 13) << pad(fmt_alpha(p.alpha), 8)
              << fmt(p.percent(), 2) << "\n";
        }
      }
    }
    out << "\n";
  }

  if (!report.warnings.empty()) {
    out << "warnings\n";
    for (const auto &w : report.warnings) out << "  - " << w << "\n";
  }
  return out.str();
}

}  // namespace sphmm
