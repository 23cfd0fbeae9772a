// sphmm/hmm.cpp

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

#include "sphmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sphmm {

namespace {

void check_obs(const Hmm &hmm, const Matrix &obs) {
  if (obs.empty()) throw std::invalid_argument("hmm: empty observation sequence");
  for (const auto &frame : obs) {
    if (static_cast<int>(frame.size()) != hmm.dim()) {
      throw std::invalid_argument("hmm: observation dimension " + std::to_string(frame.size()) +
                                  " does not match model dimension " + std::to_string(hmm.dim()));
    }
  }
  if (static_cast<int>(hmm.emissions.size()) != hmm.num_states()) {
    throw std::invalid_argument("hmm: emissions not initialized for every state");
  }
}

// Per-frame, per-state GMM log-densities.
Matrix log_emissions(const Hmm &hmm, const Matrix &obs) {
  const int n = hmm.num_states();
  Matrix log_b(obs.size(), std::vector<double>(static_cast<std::size_t>(n)));
  for (std::size_t t = 0; t < obs.size(); ++t) {
    for (int i = 0; i < n; ++i) {
      log_b[t][static_cast<std::size_t>(i)] = hmm.emissions[static_cast<std::size_t>(i)].log_density(obs[t]);
    }
  }
  return log_b;
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kLogZero; }

// ---------------------------------------------------------------------------
// First-order kernels.

struct Order1Chain {
  int n = 0;
  std::vector<double> log_pi;
  std::vector<double> log_a;  // n*n, -inf where masked or zero

  explicit Order1Chain(const TransitionModel &tm) : n(tm.n) {
    log_pi.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) log_pi[static_cast<std::size_t>(i)] = safe_log(tm.init[static_cast<std::size_t>(i)]);
    log_a.assign(static_cast<std::size_t>(n) * n, kLogZero);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (tm.mask[tm.idx(i, j)]) log_a[tm.idx(i, j)] = safe_log(tm.prob[tm.idx(i, j)]);
      }
    }
  }
};

Matrix forward_o1(const Order1Chain &c, const Matrix &log_b) {
  const std::size_t t_count = log_b.size();
  const int n = c.n;
  Matrix la(t_count, std::vector<double>(static_cast<std::size_t>(n), kLogZero));
  for (int i = 0; i < n; ++i) la[0][static_cast<std::size_t>(i)] = c.log_pi[static_cast<std::size_t>(i)] + log_b[0][static_cast<std::size_t>(i)];
  for (std::size_t t = 1; t < t_count; ++t) {
    for (int j = 0; j < n; ++j) {
      double acc = kLogZero;
      for (int i = 0; i < n; ++i) {
        const double e = c.log_a[static_cast<std::size_t>(i) * n + j];
        if (e == kLogZero) continue;
        acc = log_sum_exp(acc, la[t - 1][static_cast<std::size_t>(i)] + e);
      }
      la[t][static_cast<std::size_t>(j)] = acc + log_b[t][static_cast<std::size_t>(j)];
    }
  }
  return la;
}

Matrix backward_o1(const Order1Chain &c, const Matrix &log_b) {
  const std::size_t t_count = log_b.size();
  const int n = c.n;
  Matrix lb(t_count, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (std::size_t t = t_count - 1; t-- > 0;) {
    for (int i = 0; i < n; ++i) {
      double acc = kLogZero;
      for (int j = 0; j < n; ++j) {
        const double e = c.log_a[static_cast<std::size_t>(i) * n + j];
        if (e == kLogZero) continue;
        acc = log_sum_exp(acc, e + log_b[t + 1][static_cast<std::size_t>(j)] + lb[t + 1][static_cast<std::size_t>(j)]);
      }
      lb[t][static_cast<std::size_t>(i)] = acc;
    }
  }
  return lb;
}

// ---------------------------------------------------------------------------
// Second-order kernels: an equivalent first-order chain over state pairs.
// The pair at pair-time t covers observations t-1 and t (0-based); the
// chain starts at pair-time 1 with the pair (q0, q1).

struct PairChain {
  struct Edge {
    int from = 0, to = 0;  // pair positions
    int i = 0, j = 0, k = 0;
    double log_a = kLogZero;
  };

  int n = 0;
  std::vector<int> pair_i, pair_j;   // per pair position
  std::vector<int> pair_pos;         // n*n -> position or -1
  std::vector<double> log_init;      // per pair position
  std::vector<Edge> edges;
  std::vector<std::vector<int>> in_edges;   // per `to` position
  std::vector<std::vector<int>> out_edges;  // per `from` position

  explicit PairChain(const TransitionModel &tm) : n(tm.n) {
    pair_pos.assign(static_cast<std::size_t>(n) * n, -1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        bool used = tm.init[tm.idx(i, j)] > 0.0;
        for (int k = 0; !used && k < n; ++k) used = tm.mask[tm.idx(i, j, k)] != 0;
        for (int k = 0; !used && k < n; ++k) used = tm.mask[tm.idx(k, i, j)] != 0;
        if (used) {
          pair_pos[tm.idx(i, j)] = static_cast<int>(pair_i.size());
          pair_i.push_back(i);
          pair_j.push_back(j);
        }
      }
    }
    const std::size_t p_count = pair_i.size();
    log_init.assign(p_count, kLogZero);
    for (std::size_t p = 0; p < p_count; ++p) {
      log_init[p] = safe_log(tm.init[tm.idx(pair_i[p], pair_j[p])]);
    }
    in_edges.assign(p_count, {});
    out_edges.assign(p_count, {});
    for (std::size_t p = 0; p < p_count; ++p) {
      const int i = pair_i[p], j = pair_j[p];
      for (int k = 0; k < n; ++k) {
        if (!tm.mask[tm.idx(i, j, k)]) continue;
        const int to = pair_pos[tm.idx(j, k)];
        if (to < 0) continue;
        Edge e;
        e.from = static_cast<int>(p);
        e.to = to;
        e.i = i;
        e.j = j;
        e.k = k;
        e.log_a = safe_log(tm.prob[tm.idx(i, j, k)]);
        out_edges[p].push_back(static_cast<int>(edges.size()));
        in_edges[static_cast<std::size_t>(to)].push_back(static_cast<int>(edges.size()));
        edges.push_back(e);
      }
    }
  }

  std::size_t size() const { return pair_i.size(); }
};

// Alpha over pair positions for pair-times 1..T-1, stored at rows 0..T-2.
Matrix forward_pairs(const PairChain &c, const Matrix &log_b) {
  const std::size_t t_count = log_b.size();
  const std::size_t p_count = c.size();
  Matrix la(t_count - 1, std::vector<double>(p_count, kLogZero));
  for (std::size_t p = 0; p < p_count; ++p) {
    la[0][p] = c.log_init[p] + log_b[0][static_cast<std::size_t>(c.pair_i[p])] +
               log_b[1][static_cast<std::size_t>(c.pair_j[p])];
  }
  for (std::size_t t = 2; t < t_count; ++t) {
    auto &row = la[t - 1];
    for (std::size_t p = 0; p < p_count; ++p) {
      double acc = kLogZero;
      for (int ei : c.in_edges[p]) {
        const auto &e = c.edges[static_cast<std::size_t>(ei)];
        if (e.log_a == kLogZero) continue;
        acc = log_sum_exp(acc, la[t - 2][static_cast<std::size_t>(e.from)] + e.log_a);
      }
      row[p] = acc + log_b[t][static_cast<std::size_t>(c.pair_j[p])];
    }
  }
  return la;
}

Matrix backward_pairs(const PairChain &c, const Matrix &log_b) {
  const std::size_t t_count = log_b.size();
  const std::size_t p_count = c.size();
  Matrix lb(t_count - 1, std::vector<double>(p_count, 0.0));
  for (std::size_t t = t_count - 1; t-- > 1;) {
    auto &row = lb[t - 1];
    for (std::size_t p = 0; p < p_count; ++p) {
      double acc = kLogZero;
      for (int ei : c.out_edges[p]) {
        const auto &e = c.edges[static_cast<std::size_t>(ei)];
        if (e.log_a == kLogZero) continue;
        acc = log_sum_exp(acc, e.log_a + log_b[t + 1][static_cast<std::size_t>(e.k)] +
                                    lb[t][static_cast<std::size_t>(e.to)]);
      }
      row[p] = acc;
    }
  }
  return lb;
}

// Marginal initial distribution of the first state for T=1 sequences.
double single_frame_log_likelihood(const Hmm &hmm, const std::vector<double> &log_b0) {
  const TransitionModel &tm = hmm.trans;
  const int n = tm.n;
  double acc = kLogZero;
  if (tm.order == 1) {
    for (int i = 0; i < n; ++i) acc = log_sum_exp(acc, safe_log(tm.init[static_cast<std::size_t>(i)]) + log_b0[static_cast<std::size_t>(i)]);
  } else {
    for (int i = 0; i < n; ++i) {
      double pi1 = 0.0;
      for (int j = 0; j < n; ++j) pi1 += tm.init[tm.idx(i, j)];
      acc = log_sum_exp(acc, safe_log(pi1) + log_b0[static_cast<std::size_t>(i)]);
    }
  }
  return acc;
}

}  // namespace

Hmm make_hmm(const TopologySpec &spec, int dim) {
  Hmm hmm;
  hmm.topology = spec;
  hmm.trans = build_topology(spec);
  GmmEmission unit;
  unit.weights = {1.0};
  unit.means = {std::vector<double>(static_cast<std::size_t>(dim), 0.0)};
  unit.vars = {std::vector<double>(static_cast<std::size_t>(dim), 1.0)};
  hmm.emissions.assign(static_cast<std::size_t>(spec.num_states), unit);
  return hmm;
}

void init_emissions_kmeans(Hmm &hmm, const std::vector<Matrix> &sequences,
                           int components, std::uint64_t seed, double variance_floor) {
  const int n = hmm.num_states();
  std::vector<std::vector<const std::vector<double> *>> pools(static_cast<std::size_t>(n));
  std::vector<const std::vector<double> *> all;
  for (const auto &seq : sequences) {
    const std::size_t t_count = seq.size();
    for (std::size_t t = 0; t < t_count; ++t) {
      // Uniform segmentation: state s owns the span [s*T/N, (s+1)*T/N).
      const int s = std::min<int>(n - 1, static_cast<int>(t * static_cast<std::size_t>(n) / std::max<std::size_t>(t_count, 1)));
      pools[static_cast<std::size_t>(s)].push_back(&seq[t]);
      all.push_back(&seq[t]);
    }
  }
  const int dim = all.empty() ? hmm.dim() : static_cast<int>(all.front()->size());
  for (int s = 0; s < n; ++s) {
    const auto &pool = pools[static_cast<std::size_t>(s)].empty() ? all : pools[static_cast<std::size_t>(s)];
    hmm.emissions[static_cast<std::size_t>(s)] =
        init_gmm_kmeans(pool, components, dim, derive_seed(seed, "kmeans", static_cast<std::uint64_t>(s)), variance_floor);
  }
}

double forward_log_likelihood(const Hmm &hmm, const Matrix &obs) {
  check_obs(hmm, obs);
  const Matrix log_b = log_emissions(hmm, obs);
  if (obs.size() == 1) return single_frame_log_likelihood(hmm, log_b[0]);
  if (hmm.trans.order == 1) {
    const Order1Chain chain(hmm.trans);
    const Matrix la = forward_o1(chain, log_b);
    return log_sum_exp(la.back());
  }
  const PairChain chain(hmm.trans);
  const Matrix la = forward_pairs(chain, log_b);
  return log_sum_exp(la.back());
}

ViterbiResult viterbi_segment(const Hmm &hmm, const Matrix &obs) {
  check_obs(hmm, obs);
  const Matrix log_b = log_emissions(hmm, obs);
  const std::size_t t_count = obs.size();
  const int n = hmm.num_states();

  ViterbiResult res;

  if (t_count == 1) {
    const TransitionModel &tm = hmm.trans;
    double best = kLogZero;
    int best_i = -1;
    for (int i = 0; i < n; ++i) {
      double pi1;
      if (tm.order == 1) {
        pi1 = tm.init[static_cast<std::size_t>(i)];
      } else {
        pi1 = 0.0;
        for (int j = 0; j < n; ++j) pi1 += tm.init[tm.idx(i, j)];
      }
      const double score = safe_log(pi1) + log_b[0][static_cast<std::size_t>(i)];
      if (score > best) {
        best = score;
        best_i = i;
      }
    }
    res.log_prob = best;
    if (best_i >= 0 && best > kLogZero) {
      res.states = {best_i};
      res.segments = {{best_i, 0, 1}};
    }
    return res;
  }

  if (hmm.trans.order == 1) {
    const Order1Chain chain(hmm.trans);
    Matrix delta(t_count, std::vector<double>(static_cast<std::size_t>(n), kLogZero));
    std::vector<std::vector<int>> back(t_count, std::vector<int>(static_cast<std::size_t>(n), -1));
    for (int i = 0; i < n; ++i) delta[0][static_cast<std::size_t>(i)] = chain.log_pi[static_cast<std::size_t>(i)] + log_b[0][static_cast<std::size_t>(i)];
    for (std::size_t t = 1; t < t_count; ++t) {
      for (int j = 0; j < n; ++j) {
        double best = kLogZero;
        int arg = -1;
        for (int i = 0; i < n; ++i) {
          const double e = chain.log_a[static_cast<std::size_t>(i) * n + j];
          if (e == kLogZero) continue;
          const double cand = delta[t - 1][static_cast<std::size_t>(i)] + e;
          if (cand > best) {
            best = cand;
            arg = i;
          }
        }
        delta[t][static_cast<std::size_t>(j)] = (arg < 0) ? kLogZero : best + log_b[t][static_cast<std::size_t>(j)];
        back[t][static_cast<std::size_t>(j)] = arg;
      }
    }
    double best = kLogZero;
    int arg = -1;
    for (int j = 0; j < n; ++j) {
      if (delta[t_count - 1][static_cast<std::size_t>(j)] > best) {
        best = delta[t_count - 1][static_cast<std::size_t>(j)];
        arg = j;
      }
    }
    res.log_prob = best;
    if (arg < 0 || best == kLogZero) return res;
    res.states.assign(t_count, 0);
    res.states[t_count - 1] = arg;
    for (std::size_t t = t_count - 1; t > 0; --t) {
      arg = back[t][static_cast<std::size_t>(arg)];
      res.states[t - 1] = arg;
    }
  } else {
    const PairChain chain(hmm.trans);
    const std::size_t p_count = chain.size();
    Matrix delta(t_count - 1, std::vector<double>(p_count, kLogZero));
    std::vector<std::vector<int>> back(t_count - 1, std::vector<int>(p_count, -1));
    for (std::size_t p = 0; p < p_count; ++p) {
      delta[0][p] = chain.log_init[p] + log_b[0][static_cast<std::size_t>(chain.pair_i[p])] +
                    log_b[1][static_cast<std::size_t>(chain.pair_j[p])];
    }
    for (std::size_t t = 2; t < t_count; ++t) {
      for (std::size_t p = 0; p < p_count; ++p) {
        double best = kLogZero;
        int arg = -1;
        for (int ei : chain.in_edges[p]) {
          const auto &e = chain.edges[static_cast<std::size_t>(ei)];
          if (e.log_a == kLogZero) continue;
          const double cand = delta[t - 2][static_cast<std::size_t>(e.from)] + e.log_a;
          if (cand > best) {
            best = cand;
            arg = e.from;
          }
        }
        delta[t - 1][p] = (arg < 0) ? kLogZero : best + log_b[t][static_cast<std::size_t>(chain.pair_j[p])];
        back[t - 1][p] = arg;
      }
    }
    double best = kLogZero;
    int arg = -1;
    for (std::size_t p = 0; p < p_count; ++p) {
      if (delta[t_count - 2][p] > best) {
        best = delta[t_count - 2][p];
        arg = static_cast<int>(p);
      }
    }
    res.log_prob = best;
    if (arg < 0 || best == kLogZero) return res;
    std::vector<int> pair_path(t_count - 1, 0);
    pair_path[t_count - 2] = arg;
    for (std::size_t t = t_count - 2; t > 0; --t) {
      arg = back[t][static_cast<std::size_t>(pair_path[t])];
      pair_path[t - 1] = arg;
    }
    res.states.assign(t_count, 0);
    res.states[0] = chain.pair_i[static_cast<std::size_t>(pair_path[0])];
    for (std::size_t t = 0; t + 1 < t_count; ++t) {
      res.states[t + 1] = chain.pair_j[static_cast<std::size_t>(pair_path[t])];
    }
  }

  StateSegment seg{res.states[0], 0, 1};
  for (std::size_t t = 1; t < t_count; ++t) {
    if (res.states[t] == seg.state) {
      seg.end = t + 1;
    } else {
      res.segments.push_back(seg);
      seg = {res.states[t], t, t + 1};
    }
  }
  res.segments.push_back(seg);
  return res;
}

namespace {

struct Accumulators {
  std::vector<double> init_acc;
  std::vector<double> trans_acc;
  Matrix comp_w;                  // [state][component]
  std::vector<Matrix> comp_x;     // [state][component][dim]
  std::vector<Matrix> comp_x2;    // [state][component][dim]

  Accumulators(const Hmm &hmm) {
    const int n = hmm.num_states();
    init_acc.assign(hmm.trans.init.size(), 0.0);
    trans_acc.assign(hmm.trans.prob.size(), 0.0);
    comp_w.resize(static_cast<std::size_t>(n));
    comp_x.resize(static_cast<std::size_t>(n));
    comp_x2.resize(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
      const int m = hmm.emissions[static_cast<std::size_t>(s)].components();
      const int d = hmm.emissions[static_cast<std::size_t>(s)].dim();
      comp_w[static_cast<std::size_t>(s)].assign(static_cast<std::size_t>(m), 0.0);
      comp_x[static_cast<std::size_t>(s)].assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d), 0.0));
      comp_x2[static_cast<std::size_t>(s)].assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    }
  }
};

// Component-level accumulation shared by both orders: spread the state
// occupancy over mixture components by their posteriors at this frame.
void accumulate_emission(const Hmm &hmm, Accumulators &acc, int state,
                         const std::vector<double> &x,
                         const std::vector<double> &comp_logs, double total_log,
                         double occupancy) {
  if (occupancy <= 0.0 || total_log == kLogZero) return;
  const auto s = static_cast<std::size_t>(state);
  const int m_count = hmm.emissions[s].components();
  for (int m = 0; m < m_count; ++m) {
    const double lp = comp_logs[static_cast<std::size_t>(m)];
    if (lp == kLogZero) continue;
    const double r = occupancy * std::exp(lp - total_log);
    acc.comp_w[s][static_cast<std::size_t>(m)] += r;
    auto &xs = acc.comp_x[s][static_cast<std::size_t>(m)];
    auto &x2s = acc.comp_x2[s][static_cast<std::size_t>(m)];
    for (std::size_t d = 0; d < x.size(); ++d) {
      xs[d] += r * x[d];
      x2s[d] += r * x[d] * x[d];
    }
  }
}

}  // namespace

TrainResult train_em(Hmm &hmm, const std::vector<Matrix> &sequences,
                     const TrainOptions &opts) {
  if (sequences.empty()) throw std::invalid_argument("train_em: no training sequences");
  for (const auto &seq : sequences) check_obs(hmm, seq);

  TrainResult res;
  const int n = hmm.num_states();
  const int order = hmm.trans.order;
  double prev_ll = kLogZero;
  bool warned_short = false, warned_skip = false;
  std::vector<bool> warned_state(static_cast<std::size_t>(n), false);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    Accumulators acc(hmm);
    double total_ll = 0.0;
    int valid = 0;

    for (const auto &seq : sequences) {
      const std::size_t t_count = seq.size();
      if (order == 2 && t_count < 2) {
        if (!warned_short) {
          res.warnings.push_back("train_em: sequence with fewer than 2 frames skipped for order-2 training");
          warned_short = true;
        }
        continue;
      }

      // Per-frame per-state component log densities; log_b is their LSE.
      const auto t_sz = t_count;
      std::vector<Matrix> comp_logs(t_sz);
      Matrix log_b(t_sz, std::vector<double>(static_cast<std::size_t>(n)));
      for (std::size_t t = 0; t < t_sz; ++t) {
        comp_logs[t].resize(static_cast<std::size_t>(n));
        for (int s = 0; s < n; ++s) {
          comp_logs[t][static_cast<std::size_t>(s)] = hmm.emissions[static_cast<std::size_t>(s)].component_log_densities(seq[t]);
          log_b[t][static_cast<std::size_t>(s)] = log_sum_exp(comp_logs[t][static_cast<std::size_t>(s)]);
        }
      }

      if (order == 1) {
        const Order1Chain chain(hmm.trans);
        Matrix la, lb;
        double ll;
        if (t_count == 1) {
          ll = single_frame_log_likelihood(hmm, log_b[0]);
        } else {
          la = forward_o1(chain, log_b);
          lb = backward_o1(chain, log_b);
          ll = log_sum_exp(la.back());
        }
        if (ll == kLogZero || !std::isfinite(ll)) {
          if (!warned_skip) {
            res.warnings.push_back("train_em: unscorable sequence skipped (zero probability)");
            warned_skip = true;
          }
          continue;
        }
        ++valid;
        total_ll += ll;
        if (t_count == 1) {
          for (int i = 0; i < n; ++i) {
            const double g = std::exp(chain.log_pi[static_cast<std::size_t>(i)] + log_b[0][static_cast<std::size_t>(i)] - ll);
            acc.init_acc[static_cast<std::size_t>(i)] += g;
            accumulate_emission(hmm, acc, i, seq[0], comp_logs[0][static_cast<std::size_t>(i)], log_b[0][static_cast<std::size_t>(i)], g);
          }
          continue;
        }
        for (std::size_t t = 0; t < t_count; ++t) {
          for (int i = 0; i < n; ++i) {
            const double lg = la[t][static_cast<std::size_t>(i)] + lb[t][static_cast<std::size_t>(i)] - ll;
            if (lg == kLogZero) continue;
            const double g = std::exp(lg);
            if (t == 0) acc.init_acc[static_cast<std::size_t>(i)] += g;
            accumulate_emission(hmm, acc, i, seq[t], comp_logs[t][static_cast<std::size_t>(i)], log_b[t][static_cast<std::size_t>(i)], g);
          }
        }
        for (std::size_t t = 0; t + 1 < t_count; ++t) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const double e = chain.log_a[static_cast<std::size_t>(i) * n + j];
              if (e == kLogZero) continue;
              const double lxi = la[t][static_cast<std::size_t>(i)] + e + log_b[t + 1][static_cast<std::size_t>(j)] + lb[t + 1][static_cast<std::size_t>(j)] - ll;
              if (lxi > -700.0) acc.trans_acc[hmm.trans.idx(i, j)] += std::exp(lxi);
            }
          }
        }
      } else {
        const PairChain chain(hmm.trans);
        const Matrix la = forward_pairs(chain, log_b);
        const Matrix lb = backward_pairs(chain, log_b);
        const double ll = log_sum_exp(la.back());
        if (ll == kLogZero || !std::isfinite(ll)) {
          if (!warned_skip) {
            res.warnings.push_back("train_em: unscorable sequence skipped (zero probability)");
            warned_skip = true;
          }
          continue;
        }
        ++valid;
        total_ll += ll;
        const std::size_t p_count = chain.size();
        // Pair occupancies; pair-time t covers observations t-1 and t.
        for (std::size_t pt = 0; pt + 1 < t_count; ++pt) {
          for (std::size_t p = 0; p < p_count; ++p) {
            const double lg = la[pt][p] + lb[pt][p] - ll;
            if (lg == kLogZero) continue;
            const double g = std::exp(lg);
            const int i = chain.pair_i[p], j = chain.pair_j[p];
            const std::size_t t_obs = pt + 1;
            if (pt == 0) {
              acc.init_acc[hmm.trans.idx(i, j)] += g;
              accumulate_emission(hmm, acc, i, seq[0], comp_logs[0][static_cast<std::size_t>(i)], log_b[0][static_cast<std::size_t>(i)], g);
            }
            accumulate_emission(hmm, acc, j, seq[t_obs], comp_logs[t_obs][static_cast<std::size_t>(j)], log_b[t_obs][static_cast<std::size_t>(j)], g);
          }
        }
        for (std::size_t pt = 0; pt + 2 < t_count; ++pt) {
          for (const auto &e : chain.edges) {
            if (e.log_a == kLogZero) continue;
            const double lxi = la[pt][static_cast<std::size_t>(e.from)] + e.log_a +
                               log_b[pt + 2][static_cast<std::size_t>(e.k)] +
                               lb[pt + 1][static_cast<std::size_t>(e.to)] - ll;
            if (lxi > -700.0) acc.trans_acc[hmm.trans.idx(e.i, e.j, e.k)] += std::exp(lxi);
          }
        }
      }
    }

    if (valid == 0) {
      throw std::runtime_error("train_em: every training sequence has zero probability under the model");
    }
    res.loglik_trace.push_back(total_ll);
    res.iterations = iter + 1;

    if (iter > 0) {
      const double improvement = total_ll - prev_ll;
      if (improvement < opts.rel_tol * std::max(1.0, std::abs(prev_ll))) break;
    }
    prev_ll = total_ll;

    // ---- M-step ----
    double init_total = 0.0;
    for (double v : acc.init_acc) init_total += v;
    if (init_total > 0.0) {
      for (std::size_t i = 0; i < acc.init_acc.size(); ++i) {
        hmm.trans.init[i] = acc.init_acc[i] / init_total;
      }
    }

    if (order == 1) {
      for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += acc.trans_acc[hmm.trans.idx(i, j)];
        if (row <= 0.0) continue;  // unvisited state keeps its row
        for (int j = 0; j < n; ++j) {
          if (hmm.trans.mask[hmm.trans.idx(i, j)]) {
            hmm.trans.prob[hmm.trans.idx(i, j)] = acc.trans_acc[hmm.trans.idx(i, j)] / row;
          }
        }
      }
    } else {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double group = 0.0;
          for (int k = 0; k < n; ++k) group += acc.trans_acc[hmm.trans.idx(i, j, k)];
          if (group <= 0.0) continue;
          for (int k = 0; k < n; ++k) {
            if (hmm.trans.mask[hmm.trans.idx(i, j, k)]) {
              hmm.trans.prob[hmm.trans.idx(i, j, k)] = acc.trans_acc[hmm.trans.idx(i, j, k)] / group;
            }
          }
        }
      }
    }

    for (int s = 0; s < n; ++s) {
      const auto ss = static_cast<std::size_t>(s);
      double occ = 0.0;
      for (double w : acc.comp_w[ss]) occ += w;
      if (occ <= 0.0) {
        if (!warned_state[ss]) {
          res.warnings.push_back("train_em: state " + std::to_string(s) +
                                 " received zero occupancy; emission left unchanged");
          warned_state[ss] = true;
        }
        continue;
      }
      auto &gmm = hmm.emissions[ss];
      const int m_count = gmm.components();
      for (int m = 0; m < m_count; ++m) {
        const auto mm = static_cast<std::size_t>(m);
        const double w = acc.comp_w[ss][mm];
        gmm.weights[mm] = w / occ;
        if (w <= 0.0) continue;  // component keeps mean/variance, weight is 0
        for (std::size_t d = 0; d < gmm.means[mm].size(); ++d) {
          const double mean = acc.comp_x[ss][mm][d] / w;
          const double var = acc.comp_x2[ss][mm][d] / w - mean * mean;
          gmm.means[mm][d] = mean;
          gmm.vars[mm][d] = std::max(var, opts.variance_floor);
        }
      }
    }
  }

  return res;
}

}  // namespace sphmm
