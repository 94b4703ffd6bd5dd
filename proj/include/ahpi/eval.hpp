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

// Out-of-sample evaluation: temporal split, propensity calibration bins,
// balanced accuracy against external rankings, and bootstrap dispersion.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ahpi/errors.hpp"
#include "ahpi/model.hpp"
#include "ahpi/rank.hpp"
#include "ahpi/rng.hpp"

namespace ahpi {

struct TemporalSplit {
  std::vector<std::size_t> train;  // indices into the input, in temporal order
  std::vector<std::size_t> test;
};

// Stable sort by timestamp (ties by position), first ceil(f N) to train.
inline TemporalSplit temporal_split(std::span<const InteractionRecord> records,
                                    double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("temporal_split: train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].timestamp < records[b].timestamp;
  });
  const auto cut = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(records.size()) - 1e-9));
  TemporalSplit out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  return out;
}

inline Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.entity_labels = data.entity_labels;
  out.type_names = data.type_names;
  out.records.reserve(indices.size());
  for (std::size_t i : indices) out.records.push_back(data.records.at(i));
  return out;
}

// Test records translated into a model's id space by label. Records whose
// entities (or type) the model has no parameters for are excluded and counted.
struct AlignedRecords {
  std::vector<InteractionRecord> records;
  std::size_t excluded = 0;
};

inline AlignedRecords align_to_model(const Dataset& data,
                                     std::span<const std::string> model_entities,
                                     std::span<const std::string> model_types) {
  std::unordered_map<std::string, std::uint32_t> ent, typ;
  for (std::size_t k = 0; k < model_entities.size(); ++k)
    ent.emplace(model_entities[k], static_cast<std::uint32_t>(k));
  for (std::size_t m = 0; m < model_types.size(); ++m)
    typ.emplace(model_types[m], static_cast<std::uint32_t>(m));
  AlignedRecords out;
  for (const auto& r : data.records) {
    auto p = ent.find(data.entity_labels.at(r.plaintiff.index()));
    auto d = ent.find(data.entity_labels.at(r.defendant.index()));
    auto t = typ.find(data.type_names.at(r.itype.index()));
    if (p == ent.end() || d == ent.end() || t == typ.end()) {
      ++out.excluded;
      continue;
    }
    InteractionRecord x = r;
    x.plaintiff = EntityId(p->second);
    x.defendant = EntityId(d->second);
    x.itype = TypeId(t->second);
    out.records.push_back(std::move(x));
  }
  return out;
}

// Full two-stage probability that the defendant wins.
inline double predict_defendant_propensity(const InteractionRecord& r, const ModelParams& p) {
  if (r.plaintiff.index() >= p.entity_count() || r.defendant.index() >= p.entity_count() ||
      r.itype.index() >= p.type_count())
    throw LookupError("predict_defendant_propensity: record outside the model");
  const double plaintiff_favored = favored_probability(
      p.score(r.plaintiff), p.score(r.defendant), p.privilege(r.itype));
  return win_probability(1.0 - plaintiff_favored, p.valence(r.itype));
}

struct CalibrationBin {
  double lo = 0.0;  // propensity range [lo, hi)
  double hi = 1.0;
  std::size_t n_cases = 0;
  double mean_predicted = 0.0;
  double empirical_defendant_winrate = 0.0;
  double bootstrap_sd = 0.0;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double baseline_winrate = 0.0;
  std::vector<std::string> warnings;
};

struct CalibrationOptions {
  std::size_t n_bins = 6;
  std::size_t n_bootstrap = 100;
  std::uint64_t seed = 0;
};

namespace detail {

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

// Equal-count bins over sorted propensities; a run of equal propensities is
// never split, so fewer than n_bins bins can result (reported as a warning).
// Per-bin sd is over n_bootstrap case resamples within the bin.
inline CalibrationReport calibration_from_propensities(std::span<const double> propensity,
                                                       std::span<const char> defendant_won,
                                                       const CalibrationOptions& opt = {}) {
  const std::size_t n = propensity.size();
  if (n == 0) throw InvalidArgument("calibration_report: empty test set");
  if (defendant_won.size() != n) throw InvalidArgument("calibration_report: length mismatch");
  if (opt.n_bins < 1) throw InvalidArgument("calibration_report: need at least one bin");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return propensity[a] < propensity[b]; });

  std::vector<std::size_t> cuts{0};
  for (std::size_t b = 1; b < opt.n_bins; ++b) {
    std::size_t t = (b * n + opt.n_bins / 2) / opt.n_bins;
    t = std::max(t, cuts.back());
    while (t > 0 && t < n && propensity[order[t - 1]] == propensity[order[t]]) ++t;
    if (t > cuts.back() && t < n) cuts.push_back(t);
  }
  cuts.push_back(n);

  CalibrationReport report;
  std::size_t wins = 0;
  for (char w : defendant_won) wins += w ? 1 : 0;
  report.baseline_winrate = static_cast<double>(wins) / static_cast<double>(n);

  for (std::size_t b = 0; b + 1 < cuts.size(); ++b) {
    CalibrationBin bin;
    const std::size_t from = cuts[b], to = cuts[b + 1];
    bin.lo = b == 0 ? 0.0 : propensity[order[from]];
    bin.hi = b + 2 == cuts.size() ? 1.0 : propensity[order[to]];
    bin.n_cases = to - from;
    double sum_p = 0.0;
    std::size_t bin_wins = 0;
    for (std::size_t i = from; i < to; ++i) {
      sum_p += propensity[order[i]];
      bin_wins += defendant_won[order[i]] ? 1 : 0;
    }
    bin.mean_predicted = sum_p / static_cast<double>(bin.n_cases);
    bin.empirical_defendant_winrate =
        static_cast<double>(bin_wins) / static_cast<double>(bin.n_cases);

    Rng rng(derive_seed(opt.seed, b));
    std::vector<double> rates;
    rates.reserve(opt.n_bootstrap);
    for (std::size_t rep = 0; rep < opt.n_bootstrap; ++rep) {
      std::size_t w = 0;
      for (std::size_t i = 0; i < bin.n_cases; ++i)
        w += defendant_won[order[from + rng.below(bin.n_cases)]] ? 1 : 0;
      rates.push_back(static_cast<double>(w) / static_cast<double>(bin.n_cases));
    }
    bin.bootstrap_sd = detail::sample_sd(rates);
    report.bins.push_back(bin);
  }
  if (report.bins.size() < opt.n_bins)
    report.warnings.push_back("only " + std::to_string(report.bins.size()) +
                              " distinct propensity bins could be formed (requested " +
                              std::to_string(opt.n_bins) + ")");
  return report;
}

inline CalibrationReport calibration_report(std::span<const InteractionRecord> test,
                                            const ModelParams& params,
                                            const CalibrationOptions& opt = {}) {
  std::vector<double> prop;
  std::vector<char> won;
  prop.reserve(test.size());
  for (const auto& r : test) {
    prop.push_back(predict_defendant_propensity(r, params));
    won.push_back(r.defendant_won() ? 1 : 0);
  }
  return calibration_from_propensities(prop, won, opt);
}

// Predicted winner of a record: true = defendant, nullopt = cannot score.
using Predictor = std::function<std::optional<bool>(const InteractionRecord&)>;

// Defendant predicted to win unless S_P > S_D + eps_m.
inline Predictor score_predictor(ModelParams params) {
  return [p = std::move(params)](const InteractionRecord& r) -> std::optional<bool> {
    if (r.plaintiff.index() >= p.entity_count() || r.defendant.index() >= p.entity_count() ||
        r.itype.index() >= p.type_count())
      return std::nullopt;
    return !(p.score(r.plaintiff) > p.score(r.defendant) + p.privilege(r.itype));
  };
}

// Rank-as-score with no privilege: the better placed (smaller rank) side wins.
// rank_of[k] is the rank of entity k or nullopt when unranked.
inline Predictor rank_predictor(std::vector<std::optional<double>> rank_of) {
  return [ranks = std::move(rank_of)](const InteractionRecord& r) -> std::optional<bool> {
    if (r.plaintiff.index() >= ranks.size() || r.defendant.index() >= ranks.size())
      return std::nullopt;
    const auto& rp = ranks[r.plaintiff.index()];
    const auto& rd = ranks[r.defendant.index()];
    if (!rp || !rd) return std::nullopt;
    return !(*rp < *rd);
  };
}

struct AccuracyResult {
  double accuracy = 0.0;
  double sd = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_excluded = 0;
};

// Accuracy on class-balanced data. Each of n_bootstrap rounds resamples the
// scored cases with replacement and then downsamples the majority outcome to
// the minority count; accuracy is the mean over rounds and sd their spread.
// With n_bootstrap = 0 a single downsample of the original cases is used.
inline AccuracyResult balanced_accuracy(std::span<const InteractionRecord> test,
                                        const Predictor& predict, std::size_t n_bootstrap,
                                        std::uint64_t seed) {
  AccuracyResult out;
  std::vector<char> correct_def, correct_pla;  // per class: was the prediction right
  for (const auto& r : test) {
    const auto pred = predict(r);
    if (!pred) {
      ++out.n_excluded;
      continue;
    }
    (r.defendant_won() ? correct_def : correct_pla).push_back(*pred == r.defendant_won() ? 1 : 0);
  }
  out.n_scored = correct_def.size() + correct_pla.size();
  if (correct_def.empty() || correct_pla.empty())
    throw InvalidArgument("balanced_accuracy: both outcome classes must be present");

  Rng rng(seed);
  // Draw k of the class without replacement (partial Fisher-Yates) and count hits.
  auto downsample_hits = [&](std::vector<char>& cls, std::size_t k) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(cls.size() - i));
      std::swap(cls[i], cls[j]);
      hits += cls[i] ? 1 : 0;
    }
    return hits;
  };
  auto balanced_round = [&](std::vector<char> def, std::vector<char> pla) {
    const std::size_t k = std::min(def.size(), pla.size());
    const std::size_t hits = downsample_hits(def, k) + downsample_hits(pla, k);
    return static_cast<double>(hits) / static_cast<double>(2 * k);
  };

  if (n_bootstrap == 0) {
    out.accuracy = balanced_round(correct_def, correct_pla);
    return out;
  }
  std::vector<double> accs;
  accs.reserve(n_bootstrap);
  const std::size_t total = out.n_scored;
  while (accs.size() < n_bootstrap) {
    std::vector<char> def, pla;
    for (std::size_t i = 0; i < total; ++i) {
      const std::size_t j = static_cast<std::size_t>(rng.below(total));
      if (j < correct_def.size())
        def.push_back(correct_def[j]);
      else
        pla.push_back(correct_pla[j - correct_def.size()]);
    }
    if (def.empty() || pla.empty()) continue;
    accs.push_back(balanced_round(std::move(def), std::move(pla)));
  }
  out.accuracy = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
  out.sd = detail::sample_sd(accs);
  return out;
}

// Baseline for a scorer that knows nothing. Every round draws fresh logistic
// scores (no privilege) and evaluates them on one resample of the cases, so
// the sd covers the choice of random scorer as well as case sampling.
inline AccuracyResult random_score_control(std::span<const InteractionRecord> test,
                                           std::size_t entity_count, std::size_t type_count,
                                           std::size_t rounds, std::uint64_t seed) {
  if (rounds == 0) rounds = 1;
  AccuracyResult out;
  std::vector<double> accs;
  accs.reserve(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    Rng rng(derive_seed(seed, 2 * r));
    ModelParams random = ModelParams::uniform(entity_count, type_count, 0.0, 0.0, 1.0);
    for (double& s : random.scores) s = rng.logistic();
    const auto one = balanced_accuracy(test, score_predictor(std::move(random)), 1,
                                       derive_seed(seed, 2 * r + 1));
    out.n_scored = one.n_scored;
    out.n_excluded = one.n_excluded;
    accs.push_back(one.accuracy);
  }
  out.accuracy = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
  out.sd = detail::sample_sd(accs);
  return out;
}

struct ExternalRanking {
  std::string name;
  std::vector<std::pair<std::string, double>> entries;  // (canonical firm, rank)

  void validate() const {
    std::unordered_map<double, bool> seen;
    for (const auto& [firm, rank] : entries)
      if (!seen.emplace(rank, true).second)
        throw InvalidArgument("ranking '" + name + "' repeats rank " + std::to_string(rank));
  }

  // Firm names best first.
  std::vector<std::string> ordered() const {
    auto e = entries;
    std::stable_sort(e.begin(), e.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    std::vector<std::string> out;
    for (auto& [firm, rank] : e) out.push_back(std::move(firm));
    return out;
  }

  // Rank per label of `labels`, nullopt when the firm is unranked.
  std::vector<std::optional<double>> ranks_for(std::span<const std::string> labels) const {
    std::unordered_map<std::string, double> by_name;
    for (const auto& [firm, rank] : entries) by_name.emplace(firm, rank);
    std::vector<std::optional<double>> out(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (auto it = by_name.find(labels[k]); it != by_name.end()) out[k] = it->second;
    return out;
  }
};

// Entity labels ordered by descending fitted score (ties by label).
inline std::vector<std::string> score_order(std::span<const std::string> labels,
                                            std::span<const double> scores) {
  std::vector<std::size_t> idx(labels.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return labels[a] < labels[b];
  });
  std::vector<std::string> out;
  for (std::size_t i : idx) out.push_back(labels[i]);
  return out;
}

inline std::string calibration_csv(const CalibrationReport& report) {
  std::ostringstream os;
  os.precision(12);
  os << "bin,lo,hi,n_cases,mean_predicted,empirical_defendant_winrate,bootstrap_sd\n";
  for (std::size_t b = 0; b < report.bins.size(); ++b) {
    const auto& x = report.bins[b];
    os << b << ',' << x.lo << ',' << x.hi << ',' << x.n_cases << ',' << x.mean_predicted << ','
       << x.empirical_defendant_winrate << ',' << x.bootstrap_sd << '\n';
  }
  return os.str();
}

}  // namespace ahpi
