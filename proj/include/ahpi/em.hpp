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

// Bayesian expectation-maximization for the two-stage pairwise model.
//
// The latent stance of interaction n is which side was favored. Given the
// current parameters, the E-step computes
//
//   pi_n = w_u q / (w_u q + w_v (1 - q))
//
// where w_u, w_v are the effective strengths (lambda, times e^eps on the
// defendant side) of the winner and the loser. The M-step maximizes the
// expected complete-data log-posterior
//
//   sum_n [ t_n log w_D + (1 - t_n) log w_P - log(w_P + w_D) ]
//     + sum_n [ pi_n log q + (1 - pi_n) log(1 - q) ]
//     + sum_k log logistic(S_k) + sum_m log logistic(eps_m)
//
// (t_n is the posterior probability that the defendant was favored) block by
// block: valences in closed form, each privilege by bracketed root finding,
// scores by a fixed-point iteration. Every block is a concave maximization
// of the same surrogate, so the marginal log-posterior never decreases.

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ahpi/errors.hpp"
#include "ahpi/model.hpp"
#include "ahpi/rank.hpp"

namespace ahpi {

struct FitConfig {
  double init_lambda = 0.9;
  // 0.5 is an exact fixed point of the EM map (every pi_n stays 0.5), so the
  // default starts on the "favored usually wins" side instead.
  double init_q = 0.75;
  double init_eps = 0.0;
  double rank_corr_threshold = 0.999;
  double param_abs_tol = 0.01;
  std::size_t max_iters = 10000;
  double eps_root_tol = 1e-10;
  double lambda_inner_tol = 1e-10;
  std::size_t lambda_max_sweeps = 100000;
  // Hold privileges / valences at their initial values.
  bool fix_privileges = false;
  bool fix_valences = false;

  void validate() const {
    if (!(init_lambda > 0.0) || !std::isfinite(init_lambda))
      throw InvalidArgument("init_lambda must be positive");
    if (!(init_q >= 0.0 && init_q <= 1.0)) throw InvalidArgument("init_q must lie in [0, 1]");
    if (!std::isfinite(init_eps)) throw InvalidArgument("init_eps must be finite");
    if (!(rank_corr_threshold > 0.0) || !(param_abs_tol > 0.0) || !(eps_root_tol > 0.0) ||
        !(lambda_inner_tol > 0.0))
      throw InvalidArgument("fit thresholds must be positive");
    if (max_iters < 1 || lambda_max_sweeps < 1) throw InvalidArgument("iteration caps must be >= 1");
  }
};

struct FitTrace {
  std::size_t iterations = 0;
  // Marginal log-posterior; entry 0 is the initial point, entry i follows iteration i.
  std::vector<double> log_posterior;
  std::vector<double> max_delta;
  bool converged = false;
  bool symmetry_flipped = false;
  std::vector<std::string> warnings;
};

struct FitResult {
  ModelParams params;
  FitTrace trace;
};

using WarningSink = std::function<void(std::string_view)>;

namespace detail {

inline void check_record(const InteractionRecord& r, const ModelParams& p) {
  if (r.plaintiff.index() >= p.entity_count() || r.defendant.index() >= p.entity_count())
    throw LookupError("record references an unknown entity");
  if (r.itype.index() >= p.type_count()) throw LookupError("record references an unknown type");
}

// Posterior probability that the winner was favored, from log-strengths.
inline double stance_from_logs(double log_w_winner, double log_w_loser, double q) {
  if (q >= 1.0) return 1.0;
  if (q <= 0.0) return 0.0;
  return sigmoid((log_w_winner + std::log(q)) - (log_w_loser + std::log1p(-q)));
}

// P(defendant favored | outcome) from P(winner favored | outcome).
inline double defendant_favored(const InteractionRecord& r, double pi) {
  return r.defendant_won() ? pi : 1.0 - pi;
}

}  // namespace detail

// E-step for a single record: posterior probability that the winner was the
// favored side.
inline double posterior_stance(const InteractionRecord& r, const ModelParams& p) {
  detail::check_record(r, p);
  const double lw = effective_score(r, r.winner, p);
  const double ll = effective_score(r, opposite(r.winner), p);
  return detail::stance_from_logs(lw, ll, p.valences[r.itype.index()]);
}

inline std::vector<double> posterior_stances(std::span<const InteractionRecord> records,
                                             const ModelParams& p) {
  std::vector<double> pis(records.size());
  for (std::size_t n = 0; n < records.size(); ++n) pis[n] = posterior_stance(records[n], p);
  return pis;
}

// Closed-form valence update: per-type mean of the stance posteriors. Types
// without records keep previous_q.
inline std::vector<double> update_valences(std::span<const InteractionRecord> records,
                                           std::span<const double> pis,
                                           std::span<const double> previous_q,
                                           const WarningSink& warn = {}) {
  if (pis.size() != records.size()) throw InvalidArgument("update_valences: one pi per record");
  const std::size_t types = previous_q.size();
  std::vector<detail::CompensatedSum> sums(types);
  std::vector<std::size_t> counts(types, 0);
  for (std::size_t n = 0; n < records.size(); ++n) {
    const std::size_t m = records[n].itype.index();
    if (m >= types) throw LookupError("update_valences: unknown type");
    sums[m].add(pis[n]);
    ++counts[m];
  }
  std::vector<double> q(previous_q.begin(), previous_q.end());
  for (std::size_t m = 0; m < types; ++m) {
    if (counts[m] == 0) {
      if (warn) warn("type " + std::to_string(m) + " has no records; valence left unchanged");
      continue;
    }
    q[m] = std::clamp(sums[m].value() / static_cast<double>(counts[m]), 0.0, 1.0);
  }
  return q;
}

namespace detail {

// Stationarity condition of the surrogate in eps_m, decreasing in eps:
//   -tanh(eps / 2) + sum_n [ t_n - sigmoid(d_n + eps) ]
// with d_n = S_D - S_P and t_n = P(defendant favored | outcome).
struct PrivilegeEquation {
  std::vector<double> score_gap;
  double target_mass = 0.0;

  double operator()(double eps) const {
    CompensatedSum acc;
    acc.add(-std::tanh(0.5 * eps));
    acc.add(target_mass);
    for (double d : score_gap) acc.add(-sigmoid(d + eps));
    return acc.value();
  }
};

inline double solve_privilege(const PrivilegeEquation& eq, double tol) {
  if (eq.score_gap.empty()) return 0.0;
  constexpr double lo = -20.0, hi = 20.0;
  const double f_lo = eq(lo), f_hi = eq(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    std::ostringstream msg;
    msg << "privilege root not bracketed in [-20, 20]: f(-20)=" << f_lo << " f(20)=" << f_hi
        << " records=" << eq.score_gap.size() << " target_mass=" << eq.target_mass;
    throw NumericalFailure(msg.str());
  }
  std::uintmax_t max_iter = 200;
  auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  const auto [a, b] = boost::math::tools::toms748_solve(eq, lo, hi, f_lo, f_hi, stop, max_iter);
  return 0.5 * (a + b);
}

}  // namespace detail

// M-step for one privilege: the root of the surrogate's stationarity
// condition in eps_m, with all scores and stance posteriors held fixed.
inline double update_privilege(TypeId m, std::span<const InteractionRecord> records,
                               std::span<const double> pis, const ModelParams& p,
                               double root_tol = 1e-10) {
  if (pis.size() != records.size()) throw InvalidArgument("update_privilege: one pi per record");
  if (m.index() >= p.type_count()) throw LookupError("update_privilege: unknown type");
  detail::PrivilegeEquation eq;
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& r = records[n];
    if (r.itype != m) continue;
    detail::check_record(r, p);
    eq.score_gap.push_back(p.scores[r.defendant.index()] - p.scores[r.plaintiff.index()]);
    eq.target_mass += detail::defendant_favored(r, pis[n]);
  }
  return detail::solve_privilege(eq, root_tol);
}

namespace detail {

// Games of one entity, seen from its side: the record, the posterior mass of
// this entity being favored, and whether it is the defendant.
struct Incidence {
  std::vector<std::size_t> offset;  // games of k are [offset[k], offset[k + 1])
  std::vector<std::uint32_t> record;
  std::vector<double> favored_mass;
  std::vector<char> is_defendant;

  Incidence(std::span<const InteractionRecord> records, std::span<const double> defendant_mass,
            std::size_t entities)
      : offset(entities + 1, 0) {
    for (const auto& r : records) {
      ++offset[r.plaintiff.index() + 1];
      ++offset[r.defendant.index() + 1];
    }
    for (std::size_t k = 0; k < entities; ++k) offset[k + 1] += offset[k];
    record.resize(offset.back());
    favored_mass.resize(offset.back());
    is_defendant.resize(offset.back());
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    for (std::size_t n = 0; n < records.size(); ++n) {
      std::size_t i = fill[records[n].plaintiff.index()]++;
      record[i] = static_cast<std::uint32_t>(n);
      favored_mass[i] = 1.0 - defendant_mass[n];
      is_defendant[i] = 0;
      i = fill[records[n].defendant.index()]++;
      record[i] = static_cast<std::uint32_t>(n);
      favored_mass[i] = defendant_mass[n];
      is_defendant[i] = 1;
    }
  }
};

// One Gauss-Seidel sweep of the score fixed point, entities in id order. The
// prior acts as one virtual game against an entity with lambda = 1 counted
// once as a win and once as a loss:
//
//   lambda_k <- [1/(1+lambda_k) + sum_n a_nk o_n / (b_nk lambda_k + o_n)]
//             / [1/(1+lambda_k) + sum_n (1 - a_nk) b_nk / (b_nk lambda_k + o_n)]
//
// where a_nk is the posterior mass of k being favored in n, b_nk = e^eps if k
// is the defendant (else 1) and o_n is the opponent's effective strength.
// Updating in place matters: the simultaneous (Jacobi) form oscillates when
// two entities meet many times.
inline void lambda_sweep(std::span<const InteractionRecord> records, const Incidence& inc,
                         std::span<const double> boost, std::vector<double>& lam) {
  for (std::size_t k = 0; k < lam.size(); ++k) {
    const double prior = 1.0 / (1.0 + lam[k]);
    CompensatedSum num, den;
    num.add(prior);
    den.add(prior);
    for (std::size_t i = inc.offset[k]; i < inc.offset[k + 1]; ++i) {
      const auto& r = records[inc.record[i]];
      const double b = boost[r.itype.index()];
      double own, opp;
      if (inc.is_defendant[i]) {
        own = b;
        opp = lam[r.plaintiff.index()];
      } else {
        own = 1.0;
        opp = lam[r.defendant.index()] * b;
      }
      const double inv_total = 1.0 / (own * lam[k] + opp);
      num.add(inc.favored_mass[i] * opp * inv_total);
      den.add((1.0 - inc.favored_mass[i]) * own * inv_total);
    }
    const double next = num.value() / den.value();
    if (!(next >= 1e-12 && next <= 1e12))
      throw NumericalFailure("lambda fixed point left [1e-12, 1e12] for entity " +
                             std::to_string(k));
    lam[k] = next;
  }
}

// The data term is unchanged when every lambda is multiplied by the same
// factor, so only the prior pins the overall level. With many records per
// entity the sweep barely moves that direction; this maximizes along it
// exactly: the shift t solves sum_k (1 - 2 sigmoid(S_k + t)) = 0.
inline void rescale_to_prior(std::vector<double>& lam) {
  std::vector<double> s(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k) s[k] = std::log(lam[k]);
  auto g = [&](double t) {
    CompensatedSum acc;
    for (double x : s) acc.add(1.0 - 2.0 * sigmoid(x + t));
    return acc.value();
  };
  double lo = -60.0, hi = 60.0;
  const double g_lo = g(lo), g_hi = g(hi);
  if (!(g_lo > 0.0 && g_hi < 0.0)) return;
  std::uintmax_t max_iter = 100;
  auto stop = [](double a, double b) { return std::abs(b - a) <= 1e-14; };
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, stop, max_iter);
  const double factor = std::exp(0.5 * (a + b));
  for (double& l : lam) l *= factor;
}

}  // namespace detail

// M-step for the scores: iterates the fixed point until the largest relative
// lambda change drops below tol. Returns lambdas; throws NumericalFailure on
// divergence. A sink, when given, is told if the sweep cap is hit.
inline std::vector<double> update_lambdas(std::span<const InteractionRecord> records,
                                          std::span<const double> pis, const ModelParams& p,
                                          double tol = 1e-10, std::size_t max_sweeps = 100000,
                                          const WarningSink& warn = {}) {
  if (pis.size() != records.size()) throw InvalidArgument("update_lambdas: one pi per record");
  std::vector<double> mass(records.size());
  for (std::size_t n = 0; n < records.size(); ++n) {
    detail::check_record(records[n], p);
    mass[n] = detail::defendant_favored(records[n], pis[n]);
  }
  std::vector<double> boost(p.type_count());
  for (std::size_t m = 0; m < boost.size(); ++m) boost[m] = std::exp(p.privileges[m]);
  auto lam = p.lambdas();
  const detail::Incidence inc(records, mass, lam.size());
  std::vector<double> before;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    before = lam;
    detail::lambda_sweep(records, inc, boost, lam);
    detail::rescale_to_prior(lam);
    double max_rel = 0.0;
    for (std::size_t k = 0; k < lam.size(); ++k)
      max_rel = std::max(max_rel, std::abs(lam[k] - before[k]) / before[k]);
    if (max_rel < tol) return lam;
  }
  if (warn) warn("score fixed point hit the sweep cap before reaching tolerance");
  return lam;
}

namespace detail {

inline double max_abs_change(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Record-weighted mean valence.
inline double weighted_mean_valence(std::span<const InteractionRecord> records,
                                    const ModelParams& p) {
  if (records.empty()) return 0.5;
  CompensatedSum acc;
  for (const auto& r : records) acc.add(p.valences[r.itype.index()]);
  return acc.value() / static_cast<double>(records.size());
}

}  // namespace detail

// Runs EM from the given starting point. The result is oriented so that the
// record-weighted mean valence is at least 0.5.
inline FitResult fit_from(std::span<const InteractionRecord> records, ModelParams params,
                          const FitConfig& config) {
  config.validate();
  params.validate();
  if (records.empty()) throw InvalidArgument("fit: no records");
  for (const auto& r : records) detail::check_record(r, params);

  FitResult result;
  FitTrace& trace = result.trace;
  std::set<std::string> warned;
  WarningSink warn = [&](std::string_view w) {
    if (warned.emplace(w).second) trace.warnings.emplace_back(w);
  };

  const std::size_t types = params.type_count();
  std::vector<std::vector<std::size_t>> by_type(types);
  for (std::size_t n = 0; n < records.size(); ++n) by_type[records[n].itype.index()].push_back(n);

  trace.log_posterior.push_back(log_posterior(records, params));
  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    const ModelParams prev = params;
    const auto pis = posterior_stances(records, params);

    if (!config.fix_valences) params.valences = update_valences(records, pis, params.valences, warn);

    if (!config.fix_privileges) {
      for (std::size_t m = 0; m < types; ++m) {
        if (by_type[m].empty()) {
          warn("type " + std::to_string(m) + " has no records; privilege set to prior mode 0");
          params.privileges[m] = 0.0;
          continue;
        }
        detail::PrivilegeEquation eq;
        eq.score_gap.reserve(by_type[m].size());
        for (std::size_t n : by_type[m]) {
          const auto& r = records[n];
          eq.score_gap.push_back(params.scores[r.defendant.index()] -
                                 params.scores[r.plaintiff.index()]);
          eq.target_mass += detail::defendant_favored(r, pis[n]);
        }
        params.privileges[m] = detail::solve_privilege(eq, config.eps_root_tol);
      }
    }

    params.set_lambdas(update_lambdas(records, pis, params, config.lambda_inner_tol,
                                      config.lambda_max_sweeps, warn));

    const double delta = std::max({detail::max_abs_change(prev.scores, params.scores),
                                   detail::max_abs_change(prev.valences, params.valences),
                                   detail::max_abs_change(prev.privileges, params.privileges)});
    trace.log_posterior.push_back(log_posterior(records, params));
    trace.max_delta.push_back(delta);
    trace.iterations = it;
    if (delta < config.param_abs_tol &&
        rank_agreement(prev.scores, params.scores) > config.rank_corr_threshold) {
      trace.converged = true;
      break;
    }
  }

  if (detail::weighted_mean_valence(records, params) < 0.5) {
    params = symmetry_map(params);
    trace.symmetry_flipped = true;
  }
  result.params = std::move(params);
  return result;
}

// EM from the configured initial values.
inline FitResult fit(std::span<const InteractionRecord> records, std::size_t entity_count,
                     std::size_t type_count, const FitConfig& config = {}) {
  config.validate();
  if (type_count == 0) throw InvalidArgument("fit: need at least one interaction type");
  return fit_from(records,
                  ModelParams::uniform(entity_count, type_count, std::log(config.init_lambda),
                                       config.init_eps, config.init_q),
                  config);
}

inline FitResult fit(const Dataset& data, const FitConfig& config = {}) {
  data.validate();
  return fit(data.records, data.entity_count(), data.type_count(), config);
}

}  // namespace ahpi
