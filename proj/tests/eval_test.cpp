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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "ahpi/eval.hpp"
#include "ahpi/graph_trim.hpp"
#include "ahpi/synth.hpp"
#include "test_support.hpp"

namespace ahpi {
namespace {

using testing::rec;

std::vector<double> propensities(std::span<const InteractionRecord> rs, const ModelParams& p) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(predict_defendant_propensity(r, p));
  return out;
}

std::vector<InteractionRecord> pick(const Dataset& d, std::span<const std::size_t> idx) {
  std::vector<InteractionRecord> out;
  for (auto i : idx) out.push_back(d.records[i]);
  return out;
}

TEST(TemporalSplit, EightTwoSplitInDateOrder) {
  std::vector<InteractionRecord> rs;
  const int days[] = {5, 1, 9, 3, 7, 0, 8, 2, 6, 4};
  for (int d : days) rs.push_back(rec(0, 1, 0, Side::Defendant, d));
  const auto s = temporal_split(rs, 0.8);
  ASSERT_EQ(s.train.size(), 8u);
  ASSERT_EQ(s.test.size(), 2u);
  for (auto i : s.train)
    for (auto j : s.test) EXPECT_LT(rs[i].timestamp, rs[j].timestamp);
  EXPECT_EQ(s.test, (std::vector<std::size_t>{6, 2}));
}

TEST(TemporalSplit, SameDateFallsBackToRecordOrder) {
  std::vector<InteractionRecord> rs(7, rec(0, 1, 0, Side::Plaintiff, 3));
  const auto a = temporal_split(rs, 0.5);
  EXPECT_EQ(a.train, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(a.test, (std::vector<std::size_t>{4, 5, 6}));
  const auto b = temporal_split(rs, 0.5);
  EXPECT_EQ(a.train, b.train);
}

TEST(TemporalSplit, RejectsFractionOutsideOpenInterval) {
  std::vector<InteractionRecord> rs(3, rec(0, 1, 0, Side::Plaintiff));
  EXPECT_THROW(temporal_split(rs, 0.0), InvalidArgument);
  EXPECT_THROW(temporal_split(rs, 1.0), InvalidArgument);
  EXPECT_THROW(temporal_split(rs, std::nan("")), InvalidArgument);
}

TEST(TemporalSplit, ExclusionCountMatchesRecount) {
  // A long tail of rarely active firms leaves some only in the test period.
  auto c = litigation_config(63115, 20000, 21);
  c.activity_exponent = 1.0;
  const auto s = generate(c);
  const auto split = temporal_split(s.data.records, 0.8);
  const auto train = subset(s.data, split.train);
  const auto test = subset(s.data, split.test);

  std::vector<char> seen(train.entity_count(), 0);
  for (const auto& r : train.records) seen[r.plaintiff.index()] = seen[r.defendant.index()] = 1;
  const auto model = compact(train, InteractionNetwork(train.entity_count(), train.records, seen)).data;

  const auto aligned = align_to_model(test, model.entity_labels, model.type_names);
  std::set<std::string> known(model.entity_labels.begin(), model.entity_labels.end());
  std::size_t recount = 0;
  for (const auto& r : test.records)
    if (!known.count(test.entity_labels[r.plaintiff.index()]) ||
        !known.count(test.entity_labels[r.defendant.index()]))
      ++recount;
  EXPECT_GT(recount, 0u);
  EXPECT_EQ(aligned.excluded, recount);
  EXPECT_EQ(aligned.records.size() + aligned.excluded, test.records.size());
  for (const auto& r : aligned.records) {
    EXPECT_LT(r.plaintiff.index(), model.entity_count());
    EXPECT_LT(r.defendant.index(), model.entity_count());
  }
}

TEST(Propensity, ClosedFormValues) {
  const auto r = rec(0, 1, 0, Side::Defendant);
  EXPECT_DOUBLE_EQ(predict_defendant_propensity(r, ModelParams({0.3, 0.3}, {0.0}, {1.0})), 0.5);
  EXPECT_NEAR(predict_defendant_propensity(r, ModelParams({0.3, 0.3}, {2.03}, {0.86})), 0.7766, 2e-4);
  // Stronger plaintiff lowers the defendant's chances.
  EXPECT_LT(predict_defendant_propensity(r, ModelParams({1.0, 0.0}, {0.0}, {0.9})), 0.5);
  EXPECT_THROW(predict_defendant_propensity(rec(0, 2, 0, Side::Defendant),
                                            ModelParams({0.0, 0.0}, {0.0}, {0.9})),
               LookupError);
}

TEST(Propensity, MatchesSimulatedWinFrequency) {
  SynthConfig c;
  c.n_interactions = 200000;
  c.n_entities = 40;
  c.type_names = {"t"};
  c.type_weights = {1.0};
  c.true_eps = {2.03};
  c.true_q = {0.86};
  c.rng_seed = 4;
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (std::size_t k = 0; k < c.n_entities; ++k) c.true_scores.push_back(u(g));
  const auto s = generate(c);

  const auto p = propensities(s.data.records, s.truth);
  double expected = 0.0, var = 0.0;
  std::size_t wins = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    expected += p[i];
    var += p[i] * (1 - p[i]);
    wins += s.data.records[i].defendant_won() ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(wins), expected, 3 * std::sqrt(var));

  std::size_t same = 0, same_wins = 0;
  c.true_scores.assign(c.n_entities, 0.0);
  const auto flat = generate(c);
  for (const auto& r : flat.data.records) {
    ++same;
    same_wins += r.defendant_won() ? 1 : 0;
  }
  const double p0 = predict_defendant_propensity(flat.data.records[0], flat.truth);
  EXPECT_NEAR(static_cast<double>(same_wins) / static_cast<double>(same), p0,
              3 * std::sqrt(p0 * (1 - p0) / static_cast<double>(same)));
}

TEST(Calibration, BinsPartitionTheTestSet) {
  Rng rng(2);
  std::vector<double> p;
  std::vector<char> w;
  for (int i = 0; i < 997; ++i) {
    p.push_back(std::round(rng.uniform() * 40) / 40);
    w.push_back(rng.bernoulli(p.back()) ? 1 : 0);
  }
  const auto rep = calibration_from_propensities(p, w, {6, 50, 1});
  std::size_t total = 0;
  for (std::size_t b = 0; b < rep.bins.size(); ++b) {
    total += rep.bins[b].n_cases;
    EXPECT_LE(rep.bins[b].lo, rep.bins[b].hi);
    if (b > 0) {
      EXPECT_EQ(rep.bins[b].lo, rep.bins[b - 1].hi);
    }
  }
  EXPECT_EQ(total, p.size());
  EXPECT_EQ(rep.bins.front().lo, 0.0);
  EXPECT_EQ(rep.bins.back().hi, 1.0);
}

TEST(Calibration, TiesAreKeptTogether) {
  const std::vector<double> p{0.1, 0.2, 0.2, 0.2, 0.2, 0.9};
  const std::vector<char> w{0, 0, 1, 0, 1, 1};
  const auto rep = calibration_from_propensities(p, w, {3, 10, 0});
  // The first cut would land inside the run of 0.2s and moves past it.
  ASSERT_EQ(rep.bins.size(), 2u);
  EXPECT_EQ(rep.bins[0].n_cases, 5u);
  EXPECT_EQ(rep.bins[1].n_cases, 1u);
  EXPECT_DOUBLE_EQ(rep.bins[1].lo, 0.9);
  EXPECT_EQ(rep.warnings.size(), 1u);
}

TEST(Calibration, ConstantPredictionsGiveOneBinAtBaseline) {
  const std::vector<double> p(50, 0.7);
  std::vector<char> w;
  for (int i = 0; i < 50; ++i) w.push_back(i % 5 != 0 ? 1 : 0);
  const auto rep = calibration_from_propensities(p, w);
  ASSERT_EQ(rep.bins.size(), 1u);
  EXPECT_EQ(rep.bins[0].n_cases, 50u);
  EXPECT_DOUBLE_EQ(rep.bins[0].empirical_defendant_winrate, rep.baseline_winrate);
  EXPECT_DOUBLE_EQ(rep.baseline_winrate, 0.8);
  EXPECT_DOUBLE_EQ(rep.bins[0].mean_predicted, 0.7);
  ASSERT_EQ(rep.warnings.size(), 1u);
}

TEST(Calibration, InvalidInputs) {
  const std::vector<double> p{0.2, 0.4};
  const std::vector<char> w{1};
  EXPECT_THROW(calibration_from_propensities({}, {}), InvalidArgument);
  EXPECT_THROW(calibration_from_propensities(p, w), InvalidArgument);
  const std::vector<char> w2{1, 0};
  EXPECT_THROW(calibration_from_propensities(p, w2, {0, 10, 0}), InvalidArgument);
}

class FullScale : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    sample_ = new SynthData(generate(litigation_config(63115, 2064, 33)));
    const auto split = temporal_split(sample_->data.records, 0.8);
    test_ = new std::vector<InteractionRecord>(pick(sample_->data, split.test));
  }
  static void TearDownTestSuite() {
    delete sample_;
    delete test_;
  }
  static SynthData* sample_;
  static std::vector<InteractionRecord>* test_;
};
SynthData* FullScale::sample_ = nullptr;
std::vector<InteractionRecord>* FullScale::test_ = nullptr;

TEST_F(FullScale, TrueParametersAreCalibrated) {
  const auto rep = calibration_report(*test_, sample_->truth, {6, 100, 5});
  ASSERT_EQ(rep.bins.size(), 6u);
  int within = 0;
  std::vector<double> idx, rate;
  for (std::size_t b = 0; b < rep.bins.size(); ++b) {
    const auto& x = rep.bins[b];
    if (std::abs(x.mean_predicted - x.empirical_defendant_winrate) <= 2 * x.bootstrap_sd) ++within;
    idx.push_back(static_cast<double>(b));
    rate.push_back(x.empirical_defendant_winrate);
    EXPECT_GT(x.bootstrap_sd, 0.0);
  }
  EXPECT_GE(within, 5);
  EXPECT_GE(spearman_rho(idx, rate), 0.8);
}

TEST_F(FullScale, CalibrationIsReproducibleUnderSeed) {
  const auto a = calibration_csv(calibration_report(*test_, sample_->truth, {6, 100, 9}));
  const auto b = calibration_csv(calibration_report(*test_, sample_->truth, {6, 100, 9}));
  const auto c = calibration_csv(calibration_report(*test_, sample_->truth, {6, 100, 10}));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 7);
  EXPECT_TRUE(a.starts_with("bin,lo,hi,n_cases,mean_predicted,empirical_defendant_winrate,bootstrap_sd\n"));
}

TEST_F(FullScale, TrueScoresBeatRandomBaseline) {
  const auto acc = balanced_accuracy(*test_, score_predictor(sample_->truth), 100, 3);
  EXPECT_GT(acc.accuracy, 0.55);
  EXPECT_GT(acc.sd, 0.0);
  EXPECT_EQ(acc.n_scored, test_->size());
  EXPECT_EQ(acc.n_excluded, 0u);
}

TEST_F(FullScale, RandomScoreControlStaysNearHalf) {
  const auto& p = sample_->truth;
  const auto c = random_score_control(*test_, p.entity_count(), p.type_count(), 100, 3);
  EXPECT_NEAR(c.accuracy, 0.5, 2 * c.sd);
  EXPECT_GT(c.sd, 0.0);
  EXPECT_EQ(c.n_scored, test_->size());
  const auto again = random_score_control(*test_, p.entity_count(), p.type_count(), 100, 3);
  EXPECT_EQ(c.accuracy, again.accuracy);
  EXPECT_EQ(c.sd, again.sd);
}

TEST(BalancedAccuracy, OracleScoresOne) {
  Rng rng(1);
  auto rs = testing::random_records(rng, 30, 2, 500);
  const Predictor oracle = [](const InteractionRecord& r) -> std::optional<bool> {
    return r.defendant_won();
  };
  EXPECT_DOUBLE_EQ(balanced_accuracy(rs, oracle, 50, 2).accuracy, 1.0);
  EXPECT_DOUBLE_EQ(balanced_accuracy(rs, oracle, 0, 2).accuracy, 1.0);
  const Predictor contrarian = [](const InteractionRecord& r) -> std::optional<bool> {
    return !r.defendant_won();
  };
  EXPECT_DOUBLE_EQ(balanced_accuracy(rs, contrarian, 50, 2).accuracy, 0.0);
}

TEST(BalancedAccuracy, InvariantUnderMonotoneTransform) {
  Rng rng(6);
  const auto rs = testing::random_records(rng, 50, 1, 3000);
  std::vector<double> s(50);
  for (double& x : s) x = rng.logistic();
  ModelParams a(s, {0.0}, {0.9});
  ModelParams b = a;
  for (double& x : b.scores) x = std::pow(2.0 * x + 1.0, 3);
  std::vector<std::optional<double>> ranks(50);
  for (std::size_t k = 0; k < 50; ++k) ranks[k] = -std::exp(s[k]);
  const auto ra = balanced_accuracy(rs, score_predictor(a), 40, 8);
  const auto rb = balanced_accuracy(rs, score_predictor(b), 40, 8);
  const auto rr = balanced_accuracy(rs, rank_predictor(ranks), 40, 8);
  EXPECT_EQ(ra.accuracy, rb.accuracy);
  EXPECT_EQ(ra.sd, rb.sd);
  EXPECT_EQ(ra.accuracy, rr.accuracy);
}

TEST(BalancedAccuracy, UnrankedFirmsAreExcluded) {
  std::vector<InteractionRecord> rs{rec(0, 1, 0, Side::Defendant), rec(1, 0, 0, Side::Plaintiff),
                                    rec(2, 0, 0, Side::Plaintiff), rec(1, 2, 0, Side::Defendant)};
  const auto r = balanced_accuracy(rs, rank_predictor({1.0, 2.0, std::nullopt}), 0, 1);
  EXPECT_EQ(r.n_excluded, 2u);
  EXPECT_EQ(r.n_scored, 2u);
  // Entity 0 is ranked first, so it wins both scored cases.
  EXPECT_DOUBLE_EQ(r.accuracy, 0.0);
}

TEST(BalancedAccuracy, MissingClassThrows) {
  std::vector<InteractionRecord> rs{rec(0, 1, 0, Side::Defendant), rec(1, 0, 0, Side::Defendant)};
  EXPECT_THROW(balanced_accuracy(rs, score_predictor(ModelParams({0, 0}, {0}, {1})), 10, 1),
               InvalidArgument);
}

TEST(BalancedAccuracy, DownsamplesMajorityClass) {
  // 90 defendant wins, 10 plaintiff wins; always predicting the defendant is
  // right on exactly half of a balanced sample.
  std::vector<InteractionRecord> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(rec(0, 1, 0, i < 90 ? Side::Defendant : Side::Plaintiff, i));
  const Predictor always_def = [](const InteractionRecord&) -> std::optional<bool> { return true; };
  EXPECT_DOUBLE_EQ(balanced_accuracy(rs, always_def, 0, 4).accuracy, 0.5);
  EXPECT_DOUBLE_EQ(balanced_accuracy(rs, always_def, 30, 4).accuracy, 0.5);
}

TEST(ExternalRanking, OrderAndLookup) {
  ExternalRanking r{"vault", {{"b", 2}, {"a", 1}, {"c", 3}}};
  EXPECT_NO_THROW(r.validate());
  EXPECT_EQ(r.ordered(), (std::vector<std::string>{"a", "b", "c"}));
  const std::vector<std::string> labels{"c", "z", "a"};
  const auto ranks = r.ranks_for(labels);
  EXPECT_EQ(ranks[0], std::optional<double>(3));
  EXPECT_FALSE(ranks[1].has_value());
  EXPECT_EQ(ranks[2], std::optional<double>(1));
  ExternalRanking dup{"dup", {{"a", 1}, {"b", 1}}};
  EXPECT_THROW(dup.validate(), InvalidArgument);
}

TEST(ExternalRanking, ScoreOrderAgainstRanking) {
  const std::vector<std::string> labels{"a", "b", "c", "d"};
  const std::vector<double> scores{0.5, 2.0, 0.5, -1.0};
  const auto order = score_order(labels, scores);
  EXPECT_EQ(order, (std::vector<std::string>{"b", "a", "c", "d"}));
  ExternalRanking r{"x", {{"b", 1}, {"a", 2}, {"c", 3}, {"e", 4}}};
  EXPECT_DOUBLE_EQ(kendall_tau(order, r.ordered()), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(r.ordered(), order), 1.0);
}

}  // namespace
}  // namespace ahpi
