// sphmm/config.cpp

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

#include "sphmm/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sphmm {

namespace {

std::string trim(const std::string &s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail_at(const std::string &origin, std::size_t line, const std::string &msg) {
  throw std::runtime_error("config: " + origin + ":" + std::to_string(line) + ": " + msg);
}

// Consumes keys out of a mutable copy of the parsed map so that anything
// left over at the end is, by construction, unknown.
class Cursor {
 public:
  Cursor(const ConfigMap &map, std::set<std::string> foreign)
      : map_(map), foreign_(std::move(foreign)) {}

  bool take(const std::string &section, const std::string &key, std::string *value) {
    auto sec = map_.find(section);
    if (sec == map_.end()) return false;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return false;
    *value = it->second;
    sec->second.erase(it);
    return true;
  }

  std::string get_string(const std::string &sec, const std::string &key, std::string def) {
    std::string v;
    return take(sec, key, &v) ? v : def;
  }

  double get_double(const std::string &sec, const std::string &key, double def) {
    std::string v;
    if (!take(sec, key, &v)) return def;
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception &) {
      bad_value(sec, key, v, "a number");
    }
  }

  int get_int(const std::string &sec, const std::string &key, int def) {
    std::string v;
    if (!take(sec, key, &v)) return def;
    try {
      std::size_t used = 0;
      const int x = std::stoi(v, &used);
      if (used != v.size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception &) {
      bad_value(sec, key, v, "an integer");
    }
  }

  std::uint64_t get_u64(const std::string &sec, const std::string &key, std::uint64_t def) {
    std::string v;
    if (!take(sec, key, &v)) return def;
    try {
      std::size_t used = 0;
      const unsigned long long x = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception &) {
      bad_value(sec, key, v, "an unsigned integer");
    }
  }

  bool get_bool(const std::string &sec, const std::string &key, bool def) {
    std::string v;
    if (!take(sec, key, &v)) return def;
    std::string low;
    for (char c : v) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (low == "true" || low == "1" || low == "yes" || low == "on") return true;
    if (low == "false" || low == "0" || low == "no" || low == "off") return false;
    bad_value(sec, key, v, "a boolean");
  }

  std::vector<double> get_double_list(const std::string &sec, const std::string &key,
                                      std::vector<double> def) {
    std::string v;
    if (!take(sec, key, &v)) return def;
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception &) {
        bad_value(sec, key, v, "a comma-separated list of numbers");
      }
    }
    if (out.empty()) bad_value(sec, key, v, "a comma-separated list of numbers");
    return out;
  }

  std::vector<Variant> get_variants(const std::string &sec, const std::string &key,
                                    std::vector<Variant> def) {
    std::string v;
    if (!take(sec, key, &v)) return def;
    if (trim(v) == "all") return {kAllVariants.begin(), kAllVariants.end()};
    std::vector<Variant> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(variant_from_string(item));
    }
    if (out.empty()) bad_value(sec, key, v, "'all' or a comma-separated list of variants");
    return out;
  }

  /// Errors on any key not consumed, except in foreign sections.
  void finish() const {
    std::vector<std::string> leftovers;
    for (const auto &[sec, keys] : map_) {
      if (foreign_.count(sec)) continue;
      for (const auto &[key, value] : keys) {
        leftovers.push_back(sec.empty() ? key : "[" + sec + "] " + key);
      }
    }
    if (!leftovers.empty()) {
      std::string msg = "config: unknown key(s):";
      for (const auto &l : leftovers) msg += " " + l + ";";
      msg.pop_back();
      throw std::runtime_error(msg);
    }
  }

 private:
  [[noreturn]] void bad_value(const std::string &sec, const std::string &key,
                              const std::string &value, const char *expected) {
    throw std::runtime_error("config: [" + sec + "] " + key + ": cannot parse '" + value +
                             "' as " + expected);
  }

  ConfigMap map_;
  std::set<std::string> foreign_;
};

const std::set<std::string> kSynthSections = {"synth", "shout"};
const std::set<std::string> kExperimentSections = {"",          "corpus", "output", "frontend",
                                                   "enroll",    "identify", "evaluate",
                                                   "sweep",     "crossval"};

void check_known_sections(const ConfigMap &map) {
  for (const auto &[sec, keys] : map) {
    if (!kExperimentSections.count(sec) && !kSynthSections.count(sec)) {
      throw std::runtime_error("config: unknown section [" + sec + "]");
    }
  }
}

}  // namespace

ConfigMap parse_config_text(const std::string &text, const std::string &origin) {
  ConfigMap map;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_at(origin, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail_at(origin, lineno, "empty section name");
      map[section];  // a section may legitimately stay empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail_at(origin, lineno, "expected 'key = value' or '[section]'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail_at(origin, lineno, "empty key");
    if (!map[section].emplace(key, value).second) {
      fail_at(origin, lineno, "duplicate key '" + key + "' in section [" + section + "]");
    }
  }
  return map;
}

ConfigMap parse_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

ExperimentConfig experiment_config_from(const ConfigMap &map) {
  check_known_sections(map);
  Cursor c(map, kSynthSections);
  ExperimentConfig cfg;

  cfg.seed = c.get_u64("", "seed", cfg.seed);
  cfg.eval.threads = c.get_int("", "threads", cfg.eval.threads);

  cfg.corpus_dir = c.get_string("corpus", "dir", cfg.corpus_dir);
  cfg.manifest_name = c.get_string("corpus", "manifest", cfg.manifest_name);
  cfg.output_dir = c.get_string("output", "dir", cfg.output_dir);

  FrontendConfig &f = cfg.enroll.frontend;
  f.frame_len = c.get_double("frontend", "frame_len", f.frame_len);
  f.frame_hop = c.get_double("frontend", "frame_hop", f.frame_hop);
  f.num_filters = c.get_int("frontend", "num_filters", f.num_filters);
  f.num_cepstra = c.get_int("frontend", "num_cepstra", f.num_cepstra);
  f.delta_halfwidth = c.get_int("frontend", "delta_halfwidth", f.delta_halfwidth);
  f.preemphasis = c.get_double("frontend", "preemphasis", f.preemphasis);
  f.f0_min = c.get_double("frontend", "f0_min", f.f0_min);
  f.f0_max = c.get_double("frontend", "f0_max", f.f0_max);
  f.voicing_threshold = c.get_double("frontend", "voicing_threshold", f.voicing_threshold);
  f.log_floor = c.get_double("frontend", "log_floor", f.log_floor);

  EnrollOptions &e = cfg.enroll;
  e.num_states = c.get_int("enroll", "num_states", e.num_states);
  e.group_size = c.get_int("enroll", "group_size", e.group_size);
  e.acoustic_mixtures = c.get_int("enroll", "acoustic_mixtures", e.acoustic_mixtures);
  e.prosodic_mixtures = c.get_int("enroll", "prosodic_mixtures", e.prosodic_mixtures);
  e.variance_floor = c.get_double("enroll", "variance_floor", e.variance_floor);
  e.max_iters = c.get_int("enroll", "max_iters", e.max_iters);
  e.rel_tol = c.get_double("enroll", "rel_tol", e.rel_tol);
  e.seed = c.get_u64("enroll", "seed", cfg.seed);

  cfg.alpha = c.get_double("identify", "alpha", cfg.alpha);
  cfg.eval.identify.per_frame_normalize =
      c.get_bool("identify", "per_frame_normalize", cfg.eval.identify.per_frame_normalize);
  cfg.eval.identify.threads = c.get_int("identify", "threads", cfg.eval.identify.threads);

  cfg.variants = c.get_variants("evaluate", "variants", cfg.variants);
  cfg.run_ttests = c.get_bool("evaluate", "ttests", cfg.run_ttests);

  cfg.run_sweep = c.get_bool("sweep", "enabled", cfg.run_sweep);
  cfg.sweep_alphas = c.get_double_list("sweep", "alphas", cfg.sweep_alphas);

  cfg.run_crossval = c.get_bool("crossval", "enabled", cfg.run_crossval);
  cfg.crossval_subsets = c.get_int("crossval", "subsets", cfg.crossval_subsets);
  cfg.crossval_train_per_cell = c.get_int("crossval", "train_per_cell", cfg.crossval_train_per_cell);

  c.finish();

  for (double a : cfg.sweep_alphas) {
    if (a < 0.0 || a > 1.0) throw std::runtime_error("config: [sweep] alphas must lie in [0, 1]");
  }
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) {
    throw std::runtime_error("config: [identify] alpha must lie in [0, 1]");
  }
  return cfg;
}

SynthConfig synth_config_from(const ConfigMap &map) {
  check_known_sections(map);
  Cursor c(map, kExperimentSections);
  SynthConfig cfg;

  // The global seed applies unless [synth] pins its own.
  std::uint64_t global_seed = cfg.seed;
  {
    Cursor peek(map, kSynthSections);
    global_seed = peek.get_u64("", "seed", cfg.seed);
  }

  cfg.num_speakers = c.get_int("synth", "speakers", cfg.num_speakers);
  cfg.num_sentences = c.get_int("synth", "sentences", cfg.num_sentences);
  cfg.seed = c.get_u64("synth", "seed", global_seed);
  cfg.sample_rate = c.get_int("synth", "sample_rate", cfg.sample_rate);
  cfg.neutral_train_takes = c.get_int("synth", "neutral_train_takes", cfg.neutral_train_takes);
  cfg.neutral_test_takes = c.get_int("synth", "neutral_test_takes", cfg.neutral_test_takes);
  cfg.shouted_test_takes = c.get_int("synth", "shouted_test_takes", cfg.shouted_test_takes);
  cfg.f0_jitter = c.get_double("synth", "f0_jitter", cfg.f0_jitter);
  cfg.energy_jitter = c.get_double("synth", "energy_jitter", cfg.energy_jitter);
  cfg.duration_jitter = c.get_double("synth", "duration_jitter", cfg.duration_jitter);
  cfg.f0_contour_jitter = c.get_double("synth", "f0_contour_jitter", cfg.f0_contour_jitter);
  cfg.segment_duration_jitter =
      c.get_double("synth", "segment_duration_jitter", cfg.segment_duration_jitter);
  cfg.threads = c.get_int("synth", "threads", cfg.threads);

  ShoutTransform &s = cfg.shout;
  s.f0_scale = c.get_double("shout", "f0_scale", s.f0_scale);
  s.energy_gain_db = c.get_double("shout", "energy_gain_db", s.energy_gain_db);
  s.duration_scale = c.get_double("shout", "duration_scale", s.duration_scale);
  s.tilt_shift = c.get_double("shout", "tilt_shift", s.tilt_shift);
  s.formant_scale = c.get_double("shout", "formant_scale", s.formant_scale);
  s.formant_scatter = c.get_double("shout", "formant_scatter", s.formant_scatter);

  c.finish();
  return cfg;
}

}  // namespace sphmm
