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

#include <filesystem>
#include <stdexcept>
#include <string>

#include <doctest.h>
#include <unistd.h>

#include "sphmm/common.hpp"
#include "sphmm/model_io.hpp"
#include "sphmm/topology.hpp"

#include "test_util.hpp"

using namespace sphmm;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("sphmm_model_io_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("every chain variant round-trips to byte-identical text") {
  Rng rng(5150);
  for (TopologyKind kind : {TopologyKind::LeftToRight, TopologyKind::Circular}) {
    for (int order : {1, 2}) {
      const Hmm hmm = testutil::random_hmm(kind, order, 4, 3, 2, rng);
      const std::string text = canonical_json(hmm_to_json(hmm));
      const Hmm back = hmm_from_json(nlohmann::json::parse(text));
      CHECK(back.topology.kind == hmm.topology.kind);
      CHECK(back.topology.order == hmm.topology.order);
      CHECK(back.num_states() == hmm.num_states());
      CHECK(canonical_json(hmm_to_json(back)) == text);
    }
  }
}

TEST_CASE("reloaded chains score observations bit-identically") {
  Rng rng(747);
  const Hmm hmm = testutil::random_hmm(TopologyKind::Circular, 2, 3, 4, 2, rng);
  const Matrix obs = testutil::random_obs(7, 4, rng);
  const Hmm back = hmm_from_json(hmm_to_json(hmm));
  CHECK(forward_log_likelihood(back, obs) == forward_log_likelihood(hmm, obs));
}

TEST_CASE("structural masks are rebuilt from the topology on load") {
  Rng rng(31);
  const Hmm hmm = testutil::random_hmm(TopologyKind::LeftToRight, 1, 4, 2, 1, rng);
  nlohmann::json doc = hmm_to_json(hmm);
  const Hmm back = hmm_from_json(doc);
  // A left-to-right chain forbids the backward jump no matter what text says.
  CHECK(back.trans.a(2, 1) == 0.0);
  CHECK(back.trans.a(3, 0) == 0.0);
}

TEST_CASE("the prosodic wrapper keeps its group size") {
  Rng rng(88);
  SuprasegmentalHmm pros;
  pros.group_size = 3;
  pros.hmm = testutil::random_hmm(TopologyKind::Circular, 1, 3, 5, 2, rng);
  const std::string text = canonical_json(suprasegmental_to_json(pros));
  const SuprasegmentalHmm back = suprasegmental_from_json(nlohmann::json::parse(text));
  CHECK(back.group_size == 3);
  CHECK(back.num_states() == 3);
  CHECK(canonical_json(suprasegmental_to_json(back)) == text);
}

TEST_CASE("front-end settings round-trip exactly") {
  FrontendConfig cfg;
  cfg.num_filters = 20;
  cfg.num_cepstra = 12;
  cfg.f0_max = 450.0;
  cfg.preemphasis = 0.97;
  const FrontendConfig back = frontend_from_json(frontend_to_json(cfg));
  CHECK(back == cfg);
  CHECK(canonical_json(frontend_to_json(back)) == canonical_json(frontend_to_json(cfg)));
}

TEST_CASE("canonical text ends in a newline and uses two-space indent") {
  const nlohmann::json doc = {{"b", 1}, {"a", 2}};
  const std::string text = canonical_json(doc);
  CHECK(text.back() == '\n');
  CHECK(text.find("  \"a\": 2") != std::string::npos);
  // Keys serialize sorted, so equal documents give equal text.
  CHECK(text.find("\"a\"") < text.find("\"b\""));
}

TEST_CASE("atomic writes land complete and reads report missing files") {
  TempDir tmp;
  const std::string path = (tmp.path / "doc.json").string();
  write_text_atomic(path, "hello\n");
  CHECK(read_text_file(path) == "hello\n");
  write_text_atomic(path, "replaced\n");
  CHECK(read_text_file(path) == "replaced\n");
  // The temp file used for staging does not linger.
  std::size_t entries = 0;
  for (const auto &e : std::filesystem::directory_iterator(tmp.path)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
  CHECK_THROWS_AS((void)read_text_file((tmp.path / "absent.json").string()), std::runtime_error);
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS((void)hmm_from_json(nlohmann::json::parse(R"({"kind": "spiral"})")));
  CHECK_THROWS((void)hmm_from_json(nlohmann::json::object()));
  CHECK_THROWS((void)suprasegmental_from_json(nlohmann::json::object()));
}

}  // TEST_SUITE
