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

// Forward model for asymmetric, heterogeneous pairwise interactions.
//
// Each interaction n of type m pits an unprivileged entity A (plaintiff side)
// against a privileged entity B (defendant side). The outcome is drawn in two
// stages:
//
//   rho_n(A) = sigmoid(S_A - (S_B + eps_m))          A is favored
//   p_n(A)   = q_m * rho_n(A) + (1 - q_m) * (1 - rho_n(A))   A wins
//
// Scores S are stored in log space; lambda_k = exp(S_k) is derived on demand.
// Scores and privileges carry logistic(0, 1) priors.

#include <chrono>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ahpi/errors.hpp"

namespace ahpi {

template <class Tag>
struct StrongIndex {
  std::uint32_t value = 0;

  constexpr StrongIndex() = default;
  constexpr explicit StrongIndex(std::uint32_t v) : value(v) {}
  constexpr explicit StrongIndex(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
  constexpr explicit StrongIndex(int v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(StrongIndex, StrongIndex) = default;
};

struct EntityTag {};
struct TypeTag {};
using EntityId = StrongIndex<EntityTag>;
using TypeId = StrongIndex<TypeTag>;

enum class Side : std::uint8_t { Plaintiff, Defendant };

inline constexpr Side opposite(Side s) {
  return s == Side::Plaintiff ? Side::Defendant : Side::Plaintiff;
}

using Date = std::chrono::sys_days;

// One pairwise game. The defendant is the privileged side.
struct InteractionRecord {
  EntityId plaintiff;
  EntityId defendant;
  TypeId itype;
  Side winner = Side::Defendant;
  Date timestamp{};
  std::string case_id;

  EntityId winner_id() const { return winner == Side::Plaintiff ? plaintiff : defendant; }
  EntityId loser_id() const { return winner == Side::Plaintiff ? defendant : plaintiff; }
  bool defendant_won() const { return winner == Side::Defendant; }
};

// Records plus the label tables that give the dense ids their meaning.
struct Dataset {
  std::vector<std::string> entity_labels;
  std::vector<std::string> type_names;
  std::vector<InteractionRecord> records;

  std::size_t entity_count() const { return entity_labels.size(); }
  std::size_t type_count() const { return type_names.size(); }

  // Throws InvalidArgument on the first record that breaks an invariant.
  void validate() const {
    if (type_names.empty()) throw InvalidArgument("dataset needs at least one interaction type");
    for (std::size_t n = 0; n < records.size(); ++n) {
      const auto& r = records[n];
      if (r.plaintiff.index() >= entity_count() || r.defendant.index() >= entity_count())
        throw LookupError("record " + std::to_string(n) + " references an unknown entity");
      if (r.itype.index() >= type_count())
        throw LookupError("record " + std::to_string(n) + " references an unknown type");
      if (r.plaintiff == r.defendant)
        throw InvalidArgument("record " + std::to_string(n) + " pits an entity against itself");
    }
  }
};

struct ModelParams {
  std::vector<double> scores;      // S_k
  std::vector<double> privileges;  // eps_m
  std::vector<double> valences;    // q_m

  ModelParams() = default;
  ModelParams(std::vector<double> s, std::vector<double> eps, std::vector<double> q)
      : scores(std::move(s)), privileges(std::move(eps)), valences(std::move(q)) {}

  static ModelParams uniform(std::size_t entities, std::size_t types, double score, double eps,
                             double q) {
    return ModelParams(std::vector<double>(entities, score), std::vector<double>(types, eps),
                       std::vector<double>(types, q));
  }

  std::size_t entity_count() const { return scores.size(); }
  std::size_t type_count() const { return privileges.size(); }

  double lambda(EntityId k) const { return std::exp(scores.at(k.index())); }
  double score(EntityId k) const { return scores.at(k.index()); }
  double privilege(TypeId m) const { return privileges.at(m.index()); }
  double valence(TypeId m) const { return valences.at(m.index()); }

  std::vector<double> lambdas() const {
    std::vector<double> out(scores.size());
    for (std::size_t k = 0; k < scores.size(); ++k) out[k] = std::exp(scores[k]);
    return out;
  }

  void set_lambdas(std::span<const double> lam) {
    scores.resize(lam.size());
    for (std::size_t k = 0; k < lam.size(); ++k) {
      if (!(lam[k] > 0.0) || !std::isfinite(lam[k]))
        throw NumericalFailure("lambda must be positive and finite");
      scores[k] = std::log(lam[k]);
    }
  }

  void validate() const {
    if (privileges.size() != valences.size())
      throw InvalidArgument("privileges and valences must have one entry per type");
    for (double s : scores)
      if (!std::isfinite(s)) throw InvalidArgument("non-finite score");
    for (double e : privileges)
      if (!std::isfinite(e)) throw InvalidArgument("non-finite privilege");
    for (double q : valences)
      if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("valence outside [0, 1]");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Branch-stable logistic function.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double log_sigmoid(double x) { return -softplus(-x); }

// Probability that the unprivileged side (score s_a) is favored over the
// privileged side (score s_b, privilege eps).
inline double favored_probability(double s_a, double s_b, double eps) {
  if (!std::isfinite(s_a) || !std::isfinite(s_b) || !std::isfinite(eps))
    throw InvalidArgument("favored_probability: non-finite input");
  return sigmoid(s_a - (s_b + eps));
}

// Probability that a side favored with probability rho_a wins, given valence q.
inline double win_probability(double rho_a, double q) {
  if (!(rho_a >= 0.0 && rho_a <= 1.0)) throw InvalidArgument("win_probability: rho outside [0, 1]");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("win_probability: q outside [0, 1]");
  return q * rho_a + (1.0 - q) * (1.0 - rho_a);
}

// (S, eps, q) -> (-S, -eps, 1 - q). An involution that leaves every
// likelihood unchanged.
inline ModelParams symmetry_map(const ModelParams& p) {
  ModelParams out = p;
  for (double& s : out.scores) s = -s;
  for (double& e : out.privileges) e = -e;
  for (double& q : out.valences) q = 1.0 - q;
  return out;
}

// Effective log-strength of one side of a record: S_k, plus eps_m for the defendant.
inline double effective_score(const InteractionRecord& r, Side side, const ModelParams& p) {
  if (side == Side::Plaintiff) return p.scores[r.plaintiff.index()];
  return p.scores[r.defendant.index()] + p.privileges[r.itype.index()];
}

namespace detail {

inline double log_or_neg_inf(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

// log(exp(a) + exp(b)) with -inf handling.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

// log P(observed winner of r | params), marginalised over the favored side.
inline double record_log_likelihood(const InteractionRecord& r, const ModelParams& p) {
  const double x = effective_score(r, r.winner, p) - effective_score(r, opposite(r.winner), p);
  const double q = p.valences[r.itype.index()];
  // winner favored and favored wins, or loser favored and favored loses
  return detail::log_add_exp(detail::log_or_neg_inf(q) + log_sigmoid(x),
                             detail::log_or_neg_inf(1.0 - q) + log_sigmoid(-x));
}

// Log density of the standard logistic distribution.
inline double logistic_log_density(double x) { return -softplus(x) - softplus(-x); }

inline double log_likelihood(std::span<const InteractionRecord> records, const ModelParams& p) {
  detail::CompensatedSum acc;
  for (const auto& r : records) acc.add(record_log_likelihood(r, p));
  return acc.value();
}

inline double log_prior(const ModelParams& p) {
  detail::CompensatedSum acc;
  for (double s : p.scores) acc.add(logistic_log_density(s));
  for (double e : p.privileges) acc.add(logistic_log_density(e));
  return acc.value();
}

// Marginal log-posterior (up to the evidence constant).
inline double log_posterior(std::span<const InteractionRecord> records, const ModelParams& p) {
  return log_likelihood(records, p) + log_prior(p);
}

}  // namespace ahpi
