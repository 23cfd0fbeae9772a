// sphmm/model_io.cpp

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

#include "sphmm/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sphmm {

namespace {

using nlohmann::json;

json gmm_to_json(const GmmEmission &gmm) {
  return json{{"weights", gmm.weights}, {"means", gmm.means}, {"vars", gmm.vars}};
}

GmmEmission gmm_from_json(const json &doc) {
  GmmEmission gmm;
  gmm.weights = doc.at("weights").get<std::vector<double>>();
  gmm.means = doc.at("means").get<Matrix>();
  gmm.vars = doc.at("vars").get<Matrix>();
  if (gmm.means.size() != gmm.weights.size() || gmm.vars.size() != gmm.weights.size()) {
    throw std::runtime_error("model_io: mixture component counts disagree");
  }
  return gmm;
}

}  // namespace

json frontend_to_json(const FrontendConfig &cfg) {
  return json{{"frame_len", cfg.frame_len},
              {"frame_hop", cfg.frame_hop},
              {"num_filters", cfg.num_filters},
              {"num_cepstra", cfg.num_cepstra},
              {"delta_halfwidth", cfg.delta_halfwidth},
              {"preemphasis", cfg.preemphasis},
              {"f0_min", cfg.f0_min},
              {"f0_max", cfg.f0_max},
              {"voicing_threshold", cfg.voicing_threshold},
              {"log_floor", cfg.log_floor}};
}

FrontendConfig frontend_from_json(const json &doc) {
  FrontendConfig cfg;
  cfg.frame_len = doc.at("frame_len").get<double>();
  cfg.frame_hop = doc.at("frame_hop").get<double>();
  cfg.num_filters = doc.at("num_filters").get<int>();
  cfg.num_cepstra = doc.at("num_cepstra").get<int>();
  cfg.delta_halfwidth = doc.at("delta_halfwidth").get<int>();
  cfg.preemphasis = doc.at("preemphasis").get<double>();
  cfg.f0_min = doc.at("f0_min").get<double>();
  cfg.f0_max = doc.at("f0_max").get<double>();
  cfg.voicing_threshold = doc.at("voicing_threshold").get<double>();
  cfg.log_floor = doc.at("log_floor").get<double>();
  return cfg;
}

json hmm_to_json(const Hmm &hmm) {
  json emissions = json::array();
  for (const auto &gmm : hmm.emissions) emissions.push_back(gmm_to_json(gmm));
  return json{{"topology",
               {{"kind", to_string(hmm.topology.kind)},
                {"order", hmm.topology.order},
                {"num_states", hmm.topology.num_states}}},
              {"init", hmm.trans.init},
              {"trans", hmm.trans.prob},
              {"emissions", emissions}};
}

Hmm hmm_from_json(const json &doc) {
  const auto &topo = doc.at("topology");
  TopologySpec spec;
  spec.kind = topology_kind_from_string(topo.at("kind").get<std::string>());
  spec.order = topo.at("order").get<int>();
  spec.num_states = topo.at("num_states").get<int>();

  Hmm hmm;
  hmm.topology = spec;
  hmm.trans = build_topology(spec);
  auto init = doc.at("init").get<std::vector<double>>();
  auto prob = doc.at("trans").get<std::vector<double>>();
  if (init.size() != hmm.trans.init.size() || prob.size() != hmm.trans.prob.size()) {
    throw std::runtime_error("model_io: transition table size does not match the topology");
  }
  hmm.trans.init = std::move(init);
  hmm.trans.prob = std::move(prob);

  hmm.emissions.clear();
  for (const auto &e : doc.at("emissions")) hmm.emissions.push_back(gmm_from_json(e));
  if (static_cast<int>(hmm.emissions.size()) != spec.num_states) {
    throw std::runtime_error("model_io: emission count does not match the state count");
  }
  return hmm;
}

json suprasegmental_to_json(const SuprasegmentalHmm &pros) {
  return json{{"group_size", pros.group_size}, {"model", hmm_to_json(pros.hmm)}};
}

SuprasegmentalHmm suprasegmental_from_json(const json &doc) {
  SuprasegmentalHmm pros;
  pros.group_size = doc.at("group_size").get<int>();
  pros.hmm = hmm_from_json(doc.at("model"));
  return pros;
}

std::string canonical_json(const json &doc) { return doc.dump(2) + "\n"; }

void write_text_atomic(const std::string &path, const std::string &content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("model_io: cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("model_io: short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("model_io: cannot move " + tmp + " into place");
  }
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("model_io: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace sphmm
