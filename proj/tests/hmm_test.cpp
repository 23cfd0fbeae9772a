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

#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "sphmm/hmm.hpp"
#include "test_util.hpp"

using namespace sphmm;
using namespace sphmm::testutil;

namespace {

constexpr TopologyKind kKinds[] = {TopologyKind::LeftToRight, TopologyKind::Circular};

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_SUITE("hmm") {

TEST_CASE("forward likelihood matches brute-force path enumeration") {
  Rng rng(31337);
  for (TopologyKind kind : kKinds) {
    for (int order : {1, 2}) {
      for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(3));      // 2..4
        const auto t_len = 1 + rng.uniform_int(6);                   // 1..6
        const Hmm hmm = random_hmm(kind, order, n, 2, 2, rng);
        const Matrix obs = random_obs(t_len, 2, rng);
        const double got = forward_log_likelihood(hmm, obs);
        const double want = brute_force_log_likelihood(hmm, obs);
        if (want == kLogZero) {
          CHECK(got == kLogZero);
        } else {
          CHECK(rel_err(got, want) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("a second-order chain that ignores its first lag collapses to first order") {
  Rng rng(555);
  for (TopologyKind kind : kKinds) {
    for (int trial = 0; trial < 25; ++trial) {
      const int n = 2 + static_cast<int>(rng.uniform_int(3));
      Hmm h1 = random_hmm(kind, 1, n, 2, 1, rng);

      Hmm h2 = make_hmm(TopologySpec{kind, 2, n}, 2);
      h2.emissions = h1.emissions;
      TransitionModel &t2 = h2.trans;
      const TransitionModel &t1 = h1.trans;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          t2.init[t2.idx(i, j)] = t1.init[static_cast<std::size_t>(i)] * t1.a(i, j);
          for (int k = 0; k < n; ++k) {
            t2.prob[t2.idx(i, j, k)] = t2.allowed(i, j, k) ? t1.a(j, k) : 0.0;
          }
        }
      }

      for (std::size_t t_len : {1, 2, 3, 5, 6}) {
        const Matrix obs = random_obs(t_len, 2, rng);
        const double l1 = forward_log_likelihood(h1, obs);
        const double l2 = forward_log_likelihood(h2, obs);
        if (l1 == kLogZero) {
          CHECK(l2 == kLogZero);
        } else {
          CHECK(rel_err(l2, l1) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("viterbi agrees with brute-force best path") {
  Rng rng(909);
  for (TopologyKind kind : kKinds) {
    for (int order : {1, 2}) {
      for (int trial = 0; trial < 15; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(3));
        const auto t_len = 1 + rng.uniform_int(6);
        const Hmm hmm = random_hmm(kind, order, n, 2, 1, rng);
        const Matrix obs = random_obs(t_len, 2, rng);
        const ViterbiResult got = viterbi_segment(hmm, obs);
        const BrutePath want = brute_force_viterbi(hmm, obs);
        if (want.log_prob == kLogZero) {
          CHECK(got.log_prob == kLogZero);
          continue;
        }
        CHECK(rel_err(got.log_prob, want.log_prob) < 1e-9);
        CHECK(got.states == want.states);
      }
    }
  }
}

TEST_CASE("viterbi ties break toward the lowest state") {
  // Circular 2-state chain, uniform everywhere, identical emissions: every
  // path has the same probability, so the reported path must be all zeros.
  Hmm hmm = make_hmm(TopologySpec{TopologyKind::Circular, 1, 2}, 1);
  GmmEmission g;
  g.weights = {1.0};
  g.means = {{0.0}};
  g.vars = {{1.0}};
  hmm.emissions = {g, g};
  const Matrix obs(4, std::vector<double>{0.3});
  const ViterbiResult r = viterbi_segment(hmm, obs);
  CHECK(r.states == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("viterbi segments are maximal runs covering the utterance") {
  Rng rng(2718);
  const Hmm hmm = random_hmm(TopologyKind::Circular, 1, 4, 2, 1, rng);
  const Matrix obs = random_obs(12, 2, rng);
  const ViterbiResult r = viterbi_segment(hmm, obs);
  REQUIRE_FALSE(r.segments.empty());
  CHECK(r.segments.front().begin == 0);
  CHECK(r.segments.back().end == obs.size());
  for (std::size_t s = 0; s < r.segments.size(); ++s) {
    const auto &seg = r.segments[s];
    CHECK(seg.begin < seg.end);
    for (std::size_t t = seg.begin; t < seg.end; ++t) CHECK(r.states[t] == seg.state);
    if (s > 0) {
      CHECK(seg.begin == r.segments[s - 1].end);
      CHECK(seg.state != r.segments[s - 1].state);  // runs are maximal
    }
  }
}

TEST_CASE("left-to-right chains assign zero likelihood to impossible sequences") {
  // Two frames, second only explicable by state 0, but LTR cannot return.
  Hmm hmm = make_hmm(TopologySpec{TopologyKind::LeftToRight, 1, 2}, 1);
  GmmEmission g0, g1;
  g0.weights = {1.0};
  g0.means = {{0.0}};
  g0.vars = {{1e-4}};
  g1.weights = {1.0};
  g1.means = {{100.0}};
  g1.vars = {{1e-4}};
  hmm.emissions = {g0, g1};
  // Not structurally zero, only astronomically unlikely; the kernel must
  // stay finite and well-ordered.
  const Matrix good = {{0.0}, {100.0}};
  const Matrix bad = {{100.0}, {0.0}};
  CHECK(forward_log_likelihood(hmm, good) > forward_log_likelihood(hmm, bad));
}

TEST_CASE("training improves likelihood monotonically and keeps masked zeros") {
  Rng rng(13);
  for (TopologyKind kind : kKinds) {
    for (int order : {1, 2}) {
      const int n = 3;
      Hmm hmm = random_hmm(kind, order, n, 2, 2, rng);
      std::vector<Matrix> seqs;
      for (int s = 0; s < 4; ++s) seqs.push_back(random_obs(12, 2, rng));

      TrainOptions opts;
      opts.max_iters = 8;
      opts.rel_tol = 0.0;  // run all iterations
      const TrainResult res = train_em(hmm, seqs, opts);

      REQUIRE(res.loglik_trace.size() >= 2);
      for (std::size_t i = 1; i < res.loglik_trace.size(); ++i) {
        CHECK(res.loglik_trace[i] >= res.loglik_trace[i - 1] - 1e-8);
      }

      const TransitionModel &tm = hmm.trans;
      if (order == 1) {
        for (int i = 0; i < n; ++i) {
          double row = 0.0;
          for (int j = 0; j < n; ++j) {
            if (!tm.allowed(i, j)) CHECK(tm.a(i, j) == 0.0);
            row += tm.a(i, j);
          }
          CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
        }
      } else {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            double group = 0.0;
            bool any = false;
            for (int k = 0; k < n; ++k) {
              if (!tm.allowed(i, j, k)) CHECK(tm.a(i, j, k) == 0.0);
              group += tm.a(i, j, k);
              any = any || tm.allowed(i, j, k);
            }
            if (any) CHECK(group == doctest::Approx(1.0).epsilon(1e-9));
          }
        }
      }
    }
  }
}

TEST_CASE("training recovers well-separated emission means") {
  // Two states, clearly bimodal data along the path 0 -> 1.
  Rng rng(77);
  Hmm hmm = make_hmm(TopologySpec{TopologyKind::LeftToRight, 1, 2}, 1);
  std::vector<Matrix> seqs;
  for (int s = 0; s < 6; ++s) {
    Matrix m;
    for (int t = 0; t < 10; ++t) m.push_back({-4.0 + 0.25 * rng.normal()});
    for (int t = 0; t < 10; ++t) m.push_back({4.0 + 0.25 * rng.normal()});
    seqs.push_back(m);
  }
  init_emissions_kmeans(hmm, seqs, 1, 42, 1e-4);
  TrainOptions opts;
  opts.max_iters = 15;
  train_em(hmm, seqs, opts);
  CHECK(hmm.emissions[0].means[0][0] == doctest::Approx(-4.0).epsilon(0.05));
  CHECK(hmm.emissions[1].means[0][0] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(hmm.emissions[0].vars[0][0] == doctest::Approx(0.0625).epsilon(0.5));
}

TEST_CASE("variances never fall below the training floor") {
  Rng rng(8);
  Hmm hmm = make_hmm(TopologySpec{TopologyKind::LeftToRight, 1, 2}, 1);
  // Constant-valued data would collapse variances without the floor.
  std::vector<Matrix> seqs = {Matrix(8, {1.0}), Matrix(8, {1.0})};
  init_emissions_kmeans(hmm, seqs, 1, 3, 1e-3);
  TrainOptions opts;
  opts.max_iters = 5;
  opts.variance_floor = 1e-3;
  train_em(hmm, seqs, opts);
  for (const auto &e : hmm.emissions) {
    for (const auto &row : e.vars) {
      for (double v : row) CHECK(v >= 1e-3);
    }
  }
}

TEST_CASE("convergence stop leaves parameters in sync with the last trace entry") {
  Rng rng(19);
  Hmm hmm = random_hmm(TopologyKind::Circular, 1, 3, 2, 1, rng);
  std::vector<Matrix> seqs = {random_obs(20, 2, rng), random_obs(18, 2, rng)};
  TrainOptions opts;
  opts.max_iters = 50;
  opts.rel_tol = 1e-6;
  const TrainResult res = train_em(hmm, seqs, opts);
  REQUIRE(res.iterations < 50);  // must actually converge on this data
  double total = 0.0;
  for (const auto &s : seqs) total += forward_log_likelihood(hmm, s);
  CHECK(total == doctest::Approx(res.loglik_trace.back()).epsilon(1e-12));
}

TEST_CASE("second-order training skips single-frame sequences with a warning") {
  Rng rng(3);
  Hmm hmm = random_hmm(TopologyKind::Circular, 2, 3, 2, 1, rng);
  std::vector<Matrix> seqs = {random_obs(1, 2, rng), random_obs(10, 2, rng),
                              random_obs(12, 2, rng)};
  TrainOptions opts;
  opts.max_iters = 3;
  const TrainResult res = train_em(hmm, seqs, opts);
  REQUIRE_FALSE(res.warnings.empty());
  bool mentioned = false;
  for (const auto &w : res.warnings) {
    mentioned = mentioned || w.find("fewer than 2 frames") != std::string::npos;
  }
  CHECK(mentioned);
}

TEST_CASE("training throws when no sequence is scorable") {
  Hmm hmm = make_hmm(TopologySpec{TopologyKind::LeftToRight, 1, 2}, 1);
  CHECK_THROWS_AS((void)train_em(hmm, {}, TrainOptions{}), std::invalid_argument);
}

TEST_CASE("kmeans emission init is deterministic and spans the sequence") {
  Rng rng(121);
  std::vector<Matrix> seqs = {random_obs(30, 2, rng), random_obs(24, 2, rng)};
  Hmm a = make_hmm(TopologySpec{TopologyKind::LeftToRight, 1, 3}, 2);
  Hmm b = make_hmm(TopologySpec{TopologyKind::LeftToRight, 1, 3}, 2);
  init_emissions_kmeans(a, seqs, 2, 9, 1e-4);
  init_emissions_kmeans(b, seqs, 2, 9, 1e-4);
  for (int s = 0; s < 3; ++s) {
    CHECK(a.emissions[static_cast<std::size_t>(s)].means ==
          b.emissions[static_cast<std::size_t>(s)].means);
    CHECK(a.emissions[static_cast<std::size_t>(s)].weights ==
          b.emissions[static_cast<std::size_t>(s)].weights);
  }
}

TEST_CASE("single-frame likelihood marginalizes the order-2 initial pair") {
  Rng rng(44);
  const Hmm hmm = random_hmm(TopologyKind::Circular, 2, 3, 2, 1, rng);
  const Matrix obs = random_obs(1, 2, rng);
  const double got = forward_log_likelihood(hmm, obs);
  // Direct marginal: sum_i (sum_j init(i, j)) b_i(o0).
  std::vector<double> terms;
  for (int i = 0; i < 3; ++i) {
    double marg = 0.0;
    for (int j = 0; j < 3; ++j) marg += hmm.trans.init[hmm.trans.idx(i, j)];
    if (marg > 0.0) {
      terms.push_back(std::log(marg) + hmm.emissions[static_cast<std::size_t>(i)].log_density(obs[0]));
    }
  }
  CHECK(got == doctest::Approx(log_sum_exp(terms)).epsilon(1e-12));
}

TEST_CASE("empty observation input is rejected") {
  Rng rng(5);
  const Hmm hmm = random_hmm(TopologyKind::LeftToRight, 1, 2, 2, 1, rng);
  CHECK_THROWS_AS((void)forward_log_likelihood(hmm, Matrix{}), std::invalid_argument);
  CHECK_THROWS_AS((void)viterbi_segment(hmm, Matrix{}), std::invalid_argument);
}

}  // TEST_SUITE
