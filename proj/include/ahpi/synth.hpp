// Copyright 2026 The AHPI Ranking Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Synthetic interaction data with known ground truth, and parameter-recovery
// experiments on it.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ahpi/em.hpp"
#include "ahpi/errors.hpp"
#include "ahpi/graph_trim.hpp"
#include "ahpi/model.hpp"
#include "ahpi/rank.hpp"
#include "ahpi/rng.hpp"

namespace ahpi {

struct SynthConfig {
  std::size_t n_interactions = 0;
  std::size_t n_entities = 0;
  std::vector<std::string> type_names;
  std::vector<double> type_weights;
  std::vector<double> true_eps;
  std::vector<double> true_q;
  // Explicit per-entity scores. When empty, scores are drawn with replacement
  // from score_pool, or from logistic(0, 1) when the pool is empty too.
  std::vector<double> true_scores;
  std::vector<double> score_pool;
  // Entity k takes part with weight (k + 1)^-activity_exponent; 0 samples
  // ordered pairs uniformly.
  double activity_exponent = 0.0;
  std::uint64_t rng_seed = 0;

  std::size_t type_count() const { return type_weights.size(); }

  void validate() const {
    if (n_entities < 2) throw InvalidArgument("synth: need at least two entities");
    const std::size_t m = type_weights.size();
    if (m == 0) throw InvalidArgument("synth: need at least one interaction type");
    if (true_eps.size() != m || true_q.size() != m || type_names.size() != m)
      throw InvalidArgument("synth: per-type vectors must all have one entry per type");
    double total = 0.0;
    for (double w : type_weights) {
      if (!(w >= 0.0)) throw InvalidArgument("synth: negative type weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("synth: type weights must sum to 1");
    for (double q : true_q)
      if (!(q >= 0.5 && q <= 1.0)) throw InvalidArgument("synth: valences must lie in [0.5, 1]");
    for (double e : true_eps)
      if (!std::isfinite(e)) throw InvalidArgument("synth: non-finite privilege");
    if (!(activity_exponent >= 0.0) || !std::isfinite(activity_exponent))
      throw InvalidArgument("synth: activity exponent must be non-negative");
    if (!true_scores.empty() && true_scores.size() != n_entities)
      throw InvalidArgument("synth: true_scores must have one entry per entity");
    for (double s : true_scores)
      if (!std::isfinite(s)) throw InvalidArgument("synth: non-finite score");
  }
};

// Five litigation case types with their shares (renormalised to sum to one),
// privileges and valences as fitted on the Q = 30 court data.
inline SynthConfig litigation_config(std::size_t n_interactions, std::size_t n_entities,
                                     std::uint64_t seed) {
  SynthConfig c;
  c.n_interactions = n_interactions;
  c.n_entities = n_entities;
  c.type_names = {"civil rights", "contract", "torts", "labor", "other"};
  c.type_weights = {0.229, 0.186, 0.132, 0.088, 0.364};
  const double total = std::accumulate(c.type_weights.begin(), c.type_weights.end(), 0.0);
  for (double& w : c.type_weights) w /= total;
  c.true_eps = {2.03, 1.66, 0.32, 1.99, 1.90};
  c.true_q = {0.86, 0.96, 1.00, 0.96, 1.00};
  c.rng_seed = seed;
  return c;
}

struct SynthData {
  Dataset data;
  ModelParams truth;
};

inline Date synth_epoch() { return std::chrono::sys_days{std::chrono::year{1990} / 1 / 1}; }

inline std::string padded_label(const char* prefix, std::size_t i, std::size_t count) {
  const int width = static_cast<int>(std::to_string(count > 0 ? count - 1 : 0).size());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

// Draws entity scores, then for every interaction an ordered pair of distinct
// entities (plaintiff, defendant), a type, the favored side and the winner.
// Record n is dated n days after the epoch.
inline SynthData generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.rng_seed);
  const std::size_t k_count = config.n_entities;
  const std::size_t m_count = config.type_count();

  SynthData out;
  std::vector<double> scores = config.true_scores;
  if (scores.empty()) {
    scores.resize(k_count);
    for (double& s : scores)
      s = config.score_pool.empty() ? rng.logistic()
                                    : config.score_pool[rng.below(config.score_pool.size())];
  }
  out.truth = ModelParams(std::move(scores), config.true_eps, config.true_q);

  std::vector<double> cumulative(m_count);
  std::partial_sum(config.type_weights.begin(), config.type_weights.end(), cumulative.begin());

  std::vector<double> activity;
  if (config.activity_exponent > 0.0) {
    activity.resize(k_count);
    double total = 0.0;
    for (std::size_t k = 0; k < k_count; ++k)
      activity[k] = total += std::pow(static_cast<double>(k + 1), -config.activity_exponent);
  }
  auto draw_entity = [&] {
    const double u = rng.uniform() * activity.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(activity.begin(), activity.end(), u) -
                                            activity.begin());
    return std::min(k, k_count - 1);
  };

  auto& data = out.data;
  data.type_names = config.type_names;
  data.entity_labels.reserve(k_count);
  for (std::size_t k = 0; k < k_count; ++k) data.entity_labels.push_back(padded_label("e", k, k_count));
  data.records.reserve(config.n_interactions);
  for (std::size_t n = 0; n < config.n_interactions; ++n) {
    std::size_t pl, df;
    if (activity.empty()) {
      pl = static_cast<std::size_t>(rng.below(k_count));
      df = static_cast<std::size_t>(rng.below(k_count - 1));
      if (df >= pl) ++df;
    } else {
      pl = draw_entity();
      do df = draw_entity();
      while (df == pl);
    }
    const double u = rng.uniform() * cumulative.back();
    std::size_t m = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    m = std::min(m, m_count - 1);

    const bool plaintiff_favored = rng.bernoulli(
        favored_probability(out.truth.scores[pl], out.truth.scores[df], out.truth.privileges[m]));
    const bool favored_wins = rng.bernoulli(out.truth.valences[m]);
    const bool plaintiff_wins = plaintiff_favored == favored_wins;

    InteractionRecord r;
    r.plaintiff = EntityId(pl);
    r.defendant = EntityId(df);
    r.itype = TypeId(m);
    r.winner = plaintiff_wins ? Side::Plaintiff : Side::Defendant;
    r.timestamp = synth_epoch() + std::chrono::days{static_cast<int>(n)};
    r.case_id = padded_label("syn", n, config.n_interactions);
    data.records.push_back(std::move(r));
  }
  return out;
}

struct ReplicateResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double kendall_tau = 0.0;
  std::vector<double> eps_hat, q_hat;
  std::vector<double> eps_errors, q_errors;  // fitted - true
  bool converged = false;
  bool symmetry_flipped = false;
  std::size_t iterations = 0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

inline MeanSd mean_sd(std::span<const double> v) {
  MeanSd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

struct RecoveryReport {
  std::vector<ReplicateResult> replicates;
  std::size_t succeeded = 0;
  MeanSd kendall_tau_scores;
  std::vector<MeanSd> eps_hat, q_hat;
  std::vector<MeanSd> eps_errors, q_errors;
};

namespace detail {

inline ReplicateResult compare_fit(const ModelParams& truth, const FitResult& fitted,
                                   std::span<const EntityId> original_id = {}) {
  ReplicateResult r;
  std::vector<double> true_scores;
  if (original_id.empty()) {
    true_scores = truth.scores;
  } else {
    for (EntityId k : original_id) true_scores.push_back(truth.scores[k.index()]);
  }
  r.kendall_tau = kendall_tau_b(true_scores, fitted.params.scores);
  r.eps_hat = fitted.params.privileges;
  r.q_hat = fitted.params.valences;
  for (std::size_t m = 0; m < truth.type_count(); ++m) {
    r.eps_errors.push_back(r.eps_hat[m] - truth.privileges[m]);
    r.q_errors.push_back(r.q_hat[m] - truth.valences[m]);
  }
  r.converged = fitted.trace.converged;
  r.symmetry_flipped = fitted.trace.symmetry_flipped;
  r.iterations = fitted.trace.iterations;
  r.ok = true;
  return r;
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

inline std::size_t default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace detail

// Generates `replicates` datasets (replicate r seeded with
// derive_seed(config.rng_seed, r)), fits each and compares with the truth.
// Fit failures are recorded per replicate.
inline RecoveryReport recovery_experiment(const SynthConfig& config, std::size_t replicates,
                                          const FitConfig& fit_config = {},
                                          std::size_t threads = detail::default_threads()) {
  if (replicates < 1) throw InvalidArgument("recovery_experiment: need at least one replicate");
  config.validate();
  fit_config.validate();

  RecoveryReport report;
  report.replicates.resize(replicates);
  detail::parallel_for(replicates, threads, [&](std::size_t r) {
    SynthConfig cfg = config;
    cfg.rng_seed = derive_seed(config.rng_seed, r);
    ReplicateResult res;
    try {
      const auto synth = generate(cfg);
      res = detail::compare_fit(synth.truth, fit(synth.data, fit_config));
    } catch (const Error& e) {
      res.ok = false;
      res.error = e.what();
    }
    res.seed = cfg.rng_seed;
    report.replicates[r] = std::move(res);
  });

  const std::size_t m_count = config.type_count();
  std::vector<double> taus;
  std::vector<std::vector<double>> eh(m_count), qh(m_count), ee(m_count), qe(m_count);
  for (const auto& r : report.replicates) {
    if (!r.ok) continue;
    ++report.succeeded;
    taus.push_back(r.kendall_tau);
    for (std::size_t m = 0; m < m_count; ++m) {
      eh[m].push_back(r.eps_hat[m]);
      qh[m].push_back(r.q_hat[m]);
      ee[m].push_back(r.eps_errors[m]);
      qe[m].push_back(r.q_errors[m]);
    }
  }
  report.kendall_tau_scores = mean_sd(taus);
  for (std::size_t m = 0; m < m_count; ++m) {
    report.eps_hat.push_back(mean_sd(eh[m]));
    report.q_hat.push_back(mean_sd(qh[m]));
    report.eps_errors.push_back(mean_sd(ee[m]));
    report.q_errors.push_back(mean_sd(qe[m]));
  }
  return report;
}

struct QSweepRow {
  double q_target = 0.0;
  bool feasible = false;
  double q_achieved = 0.0;
  std::size_t n_interactions = 0;
  std::size_t k_entities = 0;
  ReplicateResult fit;
};

// One dataset (seeded like replicate 0 of recovery_experiment), trimmed to
// each target in turn and refitted.
inline std::vector<QSweepRow> q_sweep(const SynthConfig& base, std::span<const double> q_targets,
                                      const FitConfig& fit_config = {}) {
  if (!std::is_sorted(q_targets.begin(), q_targets.end()))
    throw InvalidArgument("q_sweep: targets must be sorted ascending");
  SynthConfig cfg = base;
  cfg.rng_seed = derive_seed(base.rng_seed, 0);
  const auto synth = generate(cfg);
  const auto full = InteractionNetwork::from_dataset(synth.data);

  std::vector<QSweepRow> rows;
  for (double target : q_targets) {
    QSweepRow row;
    row.q_target = target;
    try {
      const auto trimmed = trim_to_q(full, target);
      row.feasible = true;
      row.q_achieved = trimmed.report.q_achieved;
      row.n_interactions = trimmed.report.n_interactions;
      row.k_entities = trimmed.report.k_entities;
      const auto sub = compact(synth.data, trimmed.network);
      row.fit = detail::compare_fit(synth.truth, fit(sub.data, fit_config), sub.original_id);
    } catch (const InfeasibleTarget&) {
      row.feasible = false;
    } catch (const Error& e) {
      row.fit.ok = false;
      row.fit.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string q_sweep_csv(std::span<const QSweepRow> rows,
                               std::span<const std::string> type_names) {
  std::ostringstream os;
  os.precision(12);
  os << "q_target,feasible,q_achieved,n,k,kendall_tau";
  for (const auto& t : type_names) os << ",eps_" << t;
  for (const auto& t : type_names) os << ",q_" << t;
  os << '\n';
  for (const auto& r : rows) {
    os << r.q_target << ',' << (r.feasible ? "true" : "false");
    if (!r.feasible || !r.fit.ok) {
      os << ",,,,";
      for (std::size_t i = 0; i < 2 * type_names.size(); ++i) os << ',';
      os << '\n';
      continue;
    }
    os << ',' << r.q_achieved << ',' << r.n_interactions << ',' << r.k_entities << ','
       << r.fit.kendall_tau;
    for (double e : r.fit.eps_hat) os << ',' << e;
    for (double q : r.fit.q_hat) os << ',' << q;
    os << '\n';
  }
  return os.str();
}

}  // namespace ahpi
