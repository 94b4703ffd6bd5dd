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
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ahpi/name_cluster.hpp"
#include "oracles.hpp"

namespace ahpi {
namespace {

using testing::as_ref;
using testing::brute_agglomerate;
using testing::dp_levenshtein;
using testing::random_string;


TEST(Levenshtein, Examples) {
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("abc", ""), 3u);
  EXPECT_EQ(levenshtein("", ""), 0u);
  EXPECT_EQ(levenshtein("flaw", "lawn"), 2u);
  EXPECT_EQ(levenshtein("putman & putman", "put-man & put-man"), 2u);
}

TEST(Levenshtein, MatchesFullMatrixAndIsAMetric) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    const auto a = random_string(rng, 9, "abc &");
    const auto b = random_string(rng, 9, "abc &");
    const auto c = random_string(rng, 9, "abc &");
    ASSERT_EQ(levenshtein(a, b), dp_levenshtein(a, b)) << a << " | " << b;
    EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
    EXPECT_LE(levenshtein(a, c), levenshtein(a, b) + levenshtein(b, c));
    EXPECT_EQ(levenshtein(a, b) == 0, a == b);
  }
}

TEST(ClusterDistance, AverageOfPairwiseDistances) {
  const std::vector<std::string> a{"ab", "abc"};
  const std::vector<std::string> b{"xbc"};
  EXPECT_DOUBLE_EQ(cluster_distance(a, b), (2.0 + 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(cluster_distance(a, a), (0.0 + 1.0 + 1.0 + 0.0) / 4.0);
  EXPECT_DOUBLE_EQ(cluster_distance(std::vector<std::string>{"same"}, std::vector<std::string>{"same"}), 0.0);
  EXPECT_THROW(cluster_distance(std::vector<std::string>{}, b), InvalidArgument);
  EXPECT_THROW(cluster_distance(a, std::vector<std::string>{}), InvalidArgument);
}

TEST(Agglomerate, PutmanVariantsCollapseToMostFrequent) {
  std::vector<std::string> raw;
  raw.insert(raw.end(), 100, "putman & putman");
  raw.insert(raw.end(), 5, "put-man and put-man");
  raw.insert(raw.end(), 1, "putman <& putman");
  std::vector<std::string> normalized;
  for (const auto& r : raw) normalized.push_back(normalize_firm_name(r));
  const auto a = agglomerate(normalized, 2.7);
  ASSERT_EQ(a.clusters.size(), 1u);
  EXPECT_EQ(a.clusters[0].representative, "putman & putman");
  for (const auto& r : raw) EXPECT_EQ(a.canonicalize(normalize_firm_name(r)), "putman & putman");
}

TEST(Agglomerate, SmallThresholdIsIdentity) {
  const std::vector<std::string> s{"alpha", "alpho", "beta", "alpha", "gamma"};
  const auto a = agglomerate(s, 0.5);
  EXPECT_EQ(a.clusters.size(), 4u);
  for (const auto& x : s) EXPECT_EQ(a.canonicalize(x), x);
  EXPECT_EQ(a.canonicalize("never seen"), "never seen");
}

TEST(Agglomerate, RepresentativeTieGoesToLexicographicallySmallest) {
  const std::vector<std::string> s{"abd", "abc", "abd", "abc"};
  const auto a = agglomerate(s, 1.5);
  ASSERT_EQ(a.clusters.size(), 1u);
  EXPECT_EQ(a.clusters[0].representative, "abc");
  EXPECT_EQ(a.clusters[0].frequencies, (std::vector<std::uint64_t>{2, 2}));
}

TEST(Agglomerate, RejectsNonPositiveThreshold) {
  const std::vector<std::string> s{"a"};
  EXPECT_THROW(agglomerate(s, 0.0), InvalidArgument);
  EXPECT_THROW(agglomerate(s, -1.0), InvalidArgument);
}

TEST(Agglomerate, FiveStringsMatchBruteForce) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> s;
    for (int i = 0; i < 5; ++i) s.push_back(random_string(rng, 5, "ab"));
    ASSERT_EQ(as_ref(agglomerate(s, 3.0)), brute_agglomerate(s, 3.0)) << "instance " << t;
  }
}

TEST(Agglomerate, TenStringsMatchBruteForce) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> thresh(0.5, 5.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> s;
    for (int i = 0; i < 10; ++i) s.push_back(random_string(rng, 6, "abc"));
    const double c = thresh(rng);
    ASSERT_EQ(as_ref(agglomerate(s, c)), brute_agglomerate(s, c)) << "instance " << t << " c=" << c;
  }
}

TEST(Agglomerate, PartitionsSupportAndCanonicalizeIsIdempotent) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::string> s;
    for (int i = 0; i < 30; ++i) s.push_back(random_string(rng, 7, "abcd"));
    const auto a = agglomerate(s, 2.5);
    std::map<std::string, int> seen;
    for (const auto& cl : a.clusters) {
      EXPECT_TRUE(std::is_sorted(cl.members.begin(), cl.members.end()));
      EXPECT_EQ(cl.members.size(), cl.frequencies.size());
      for (const auto& m : cl.members) {
        ++seen[m];
        EXPECT_EQ(a.canonicalize(m), cl.representative);
      }
    }
    for (const auto& x : s) {
      EXPECT_EQ(seen[x], 1);
      EXPECT_EQ(a.canonicalize(a.canonicalize(x)), a.canonicalize(x));
    }
    EXPECT_EQ(seen.size(), std::set<std::string>(s.begin(), s.end()).size());
  }
}

TEST(Agglomerate, RaisingThresholdNeverAddsClusters) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::string> s;
    for (int i = 0; i < 25; ++i) s.push_back(random_string(rng, 6, "abc"));
    std::size_t prev = s.size() + 1;
    for (double c = 0.5; c <= 6.0; c += 0.25) {
      const auto n = agglomerate(s, c).clusters.size();
      EXPECT_LE(n, prev) << "c=" << c;
      prev = n;
    }
  }
}

TEST(Agglomerate, DeterministicUnderInputOrder) {
  std::vector<std::string> s{"smith & jones", "smith & jone", "smyth & jones", "baker llp", "baker lp"};
  const auto a = agglomerate(s, 2.7);
  std::reverse(s.begin(), s.end());
  const auto b = agglomerate(s, 2.7);
  EXPECT_EQ(as_ref(a), as_ref(b));
  EXPECT_EQ(a.canonical, b.canonical);
}

TEST(Normalize, LowercasesReplacesAndCollapsesWhitespace) {
  EXPECT_EQ(normalize_firm_name("  Foley   and  Lardner "), "foley & lardner");
  EXPECT_EQ(normalize_firm_name("Putman <& Putman"), "putman & putman");
  ParserConfig none;
  none.replacements.clear();
  EXPECT_EQ(normalize_firm_name("Foley and Lardner", none), "foley and lardner");
}

TEST(Parse, FoleyExample) {
  const auto t = parse_attorney_substring("Michael H. Auen, of Foley & Lardner, Madison, Wis., for plaintiff.");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->role, Role{PartyRole::Plaintiff});
  EXPECT_EQ(t->firms, (std::vector<std::string>{"foley & lardner"}));
}

TEST(Parse, MoonExample) {
  const auto t = parse_attorney_substring(
      "Richard G. Moon, Robert M. Hayes, Moon, Moss, McGill & Bachelder, P.A., Portland, ME, for "
      "Defendants.");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->role, Role{PartyRole::Defendant});
  EXPECT_EQ(t->firms, (std::vector<std::string>{"moon, moss, mcgill & bachelder"}));
}

TEST(Parse, ProSeHasNoFirm) {
  EXPECT_FALSE(parse_attorney_substring("John Doe, pro se.").has_value());
}

TEST(Parse, OtherRoleAndKeywordSuffix) {
  const auto t = parse_attorney_substring("Jane Roe, Baker Botts LLP, Houston, TX, for intervenor.");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->role, Role{OtherRole{"intervenor"}});
  EXPECT_EQ(t->firms, (std::vector<std::string>{"baker botts"}));
}

TEST(Parse, CountRoles) {
  EXPECT_EQ(count_roles("A & B, for plaintiff."), 1);
  EXPECT_EQ(count_roles("A & B, for plaintiffs and defendants."), 2);
  EXPECT_EQ(count_roles("A & B, Chicago."), 0);
}

TEST(ParserConfig, LoadsEntriesAndRejectsUnknownKeys) {
  std::istringstream good(
      "# firm table\n"
      "keyword = \"s.c.\"\n"
      "replace = \"&amp;\" => \"&\"\n"
      "expand = N.Y. => New York\n");
  const auto cfg = load_parser_config(good);
  EXPECT_EQ(cfg.keywords.back(), "s.c.");
  EXPECT_EQ(cfg.replacements.back(), (std::pair<std::string, std::string>{"&amp;", "&"}));
  EXPECT_EQ(cfg.expansions.back(), (std::pair<std::string, std::string>{"N.Y.", "New York"}));
  EXPECT_EQ(normalize_firm_name("Foley &amp; Lardner", cfg), "foley & lardner");

  std::istringstream bad("keywrod = llc\n");
  EXPECT_THROW(load_parser_config(bad), InvalidArgument);
  std::istringstream no_arrow("replace = a b\n");
  EXPECT_THROW(load_parser_config(no_arrow), InvalidArgument);
  std::istringstream no_eq("keyword\n");
  EXPECT_THROW(load_parser_config(no_eq), InvalidArgument);
}

}  // namespace
}  // namespace ahpi
