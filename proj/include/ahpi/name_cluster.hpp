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

// Entity-name canonicalization: edit distance, average-linkage agglomerative
// clustering, and extraction of (role, firms) tuples from attorney listings
// such as "Michael H. Auen, of Foley & Lardner, Madison, Wis., for plaintiff."

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "ahpi/errors.hpp"

namespace ahpi {

// Unit-cost edit distance over bytes.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Average pairwise distance between two non-empty clusters.
inline double cluster_distance(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("cluster_distance: empty cluster");
  double sum = 0.0;
  for (const auto& x : a)
    for (const auto& y : b) sum += static_cast<double>(levenshtein(x, y));
  return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

struct NameCount {
  std::string name;
  std::uint64_t count = 1;
};

struct NameCluster {
  std::vector<std::string> members;  // sorted
  std::vector<std::uint64_t> frequencies;
  std::string representative;
};

struct ClusterAssignment {
  std::map<std::string, std::string> canonical;
  std::vector<NameCluster> clusters;

  // Representative of s; strings never seen map to themselves.
  const std::string& canonicalize(const std::string& s) const {
    auto it = canonical.find(s);
    return it == canonical.end() ? s : it->second;
  }
};

namespace detail {

// Distance that bails out once every cell of a row reaches `limit`.
inline std::size_t levenshtein_bounded(std::string_view a, std::string_view b, std::size_t limit) {
  const std::size_t gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (gap >= limit) return limit;
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    std::size_t best = row[0];
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
      diag = up;
      best = std::min(best, row[j]);
    }
    if (best >= limit) return limit;
  }
  return std::min(row[b.size()], limit);
}

inline std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace detail

// Agglomerative clustering of the distinct strings in a multiset. Starting
// from singletons, repeatedly merges the closest pair of clusters (average
// linkage) while that distance is below c; equal distances merge the pair
// whose lexicographically smallest members sort first. Each cluster is
// represented by its most frequent member (ties: lexicographically first).
//
// Only cluster pairs linked by at least one member pair closer than c are
// tracked, since an average below c needs such a pair. Finding those links is
// O(n^2) bounded edit distances with a length prefilter.
inline ClusterAssignment agglomerate(std::span<const NameCount> strings, double c) {
  if (!(c > 0.0)) throw InvalidArgument("agglomerate: threshold must be positive");
  std::map<std::string, std::uint64_t> freq;
  for (const auto& s : strings) freq[s.name] += s.count;
  std::vector<std::string> names;
  std::vector<std::uint64_t> counts;
  for (const auto& [name, count] : freq) {
    names.push_back(name);
    counts.push_back(count);
  }
  const auto n = static_cast<std::uint32_t>(names.size());

  // Cluster ids are the index of the lexicographically smallest member.
  std::vector<std::vector<std::uint32_t>> members(n);
  std::vector<std::map<std::uint32_t, double>> links(n);  // neighbour -> distance sum
  for (std::uint32_t i = 0; i < n; ++i) members[i] = {i};

  const auto limit = static_cast<std::size_t>(std::ceil(c));
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const std::size_t d = detail::levenshtein_bounded(names[i], names[j], limit);
      if (static_cast<double>(d) < c) {
        links[i][j] = static_cast<double>(d);
        links[j][i] = static_cast<double>(d);
      }
    }

  using Entry = std::tuple<double, std::uint32_t, std::uint32_t>;
  std::set<Entry> heap;
  auto average = [&](std::uint32_t a, std::uint32_t b, double sum) {
    return sum / (static_cast<double>(members[a].size()) * static_cast<double>(members[b].size()));
  };
  auto push = [&](std::uint32_t a, std::uint32_t b, double sum) {
    const double d = average(a, b, sum);
    if (d < c) heap.emplace(d, std::min(a, b), std::max(a, b));
  };
  auto erase = [&](std::uint32_t a, std::uint32_t b, double sum) {
    heap.erase({average(a, b, sum), std::min(a, b), std::max(a, b)});
  };
  for (std::uint32_t i = 0; i < n; ++i)
    for (const auto& [j, sum] : links[i])
      if (i < j) push(i, j, sum);

  auto full_sum = [&](std::uint32_t a, std::uint32_t b) {
    double s = 0.0;
    for (auto x : members[a])
      for (auto y : members[b]) s += static_cast<double>(levenshtein(names[x], names[y]));
    return s;
  };

  while (!heap.empty()) {
    const auto [d, a, b] = *heap.begin();
    // Drop every heap entry touching a or b before sizes change.
    for (const auto& [nb, sum] : links[a]) erase(a, nb, sum);
    for (const auto& [nb, sum] : links[b])
      if (nb != a) erase(b, nb, sum);

    std::map<std::uint32_t, double> merged;
    for (const auto& [nb, sum] : links[a])
      if (nb != b) merged[nb] = sum + (links[b].count(nb) ? links[b].at(nb) : full_sum(b, nb));
    for (const auto& [nb, sum] : links[b])
      if (nb != a && !merged.count(nb)) merged[nb] = sum + full_sum(a, nb);

    for (const auto& [nb, sum] : links[a]) links[nb].erase(a);
    for (const auto& [nb, sum] : links[b]) links[nb].erase(b);
    members[a].insert(members[a].end(), members[b].begin(), members[b].end());
    members[b].clear();
    links[b].clear();
    links[a] = std::move(merged);
    for (const auto& [nb, sum] : links[a]) {
      links[nb][a] = sum;
      push(a, nb, sum);
    }
  }

  ClusterAssignment out;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (members[i].empty()) continue;
    auto ids = members[i];
    std::sort(ids.begin(), ids.end());
    NameCluster cl;
    std::uint32_t best = ids.front();
    for (auto id : ids) {
      cl.members.push_back(names[id]);
      cl.frequencies.push_back(counts[id]);
      if (counts[id] > counts[best]) best = id;
    }
    cl.representative = names[best];
    for (const auto& m : cl.members) out.canonical[m] = cl.representative;
    out.clusters.push_back(std::move(cl));
  }
  return out;
}

inline ClusterAssignment agglomerate(std::span<const std::string> multiset, double c) {
  std::vector<NameCount> counted;
  counted.reserve(multiset.size());
  for (const auto& s : multiset) counted.push_back({s, 1});
  return agglomerate(counted, c);
}

// ---------------------------------------------------------------------------
// Attorney listings

struct OtherRole {
  std::string text;
  friend bool operator==(const OtherRole&, const OtherRole&) = default;
};
enum class PartyRole { Plaintiff, Defendant };
using Role = std::variant<PartyRole, OtherRole>;

struct AttorneyTuple {
  Role role;
  std::vector<std::string> firms;
};

struct ParserConfig {
  // Literal substitutions on the raw listing ("U.S." -> "United States").
  std::vector<std::pair<std::string, std::string>> expansions = {{"U.S.", "United States"}};
  // Legal-entity suffixes, matched case-insensitively.
  std::vector<std::string> keywords = {"llp", "l.l.p.", "p.a.", "p.c.", "pllc"};
  // Substitutions on lowercased firm names (OCR fixes and spelling variants).
  std::vector<std::pair<std::string, std::string>> replacements = {{"<&", "&"}, {" and ", " & "}};
};

namespace detail {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

inline std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

inline bool is_name_word(std::string_view seg) {
  if (seg.size() < 2 || !std::isupper(static_cast<unsigned char>(seg.front()))) return false;
  return std::none_of(seg.begin(), seg.end(), [](char ch) {
    return ch == ' ' || ch == '.' || std::isdigit(static_cast<unsigned char>(ch));
  });
}

// Position of the last " for " (case-insensitive), or npos.
inline std::size_t find_role_marker(std::string_view text) {
  return to_lower(text).rfind(" for ");
}

}  // namespace detail

// Lowercases a firm name, applies the replacement table and collapses runs of
// whitespace.
inline std::string normalize_firm_name(std::string_view raw, const ParserConfig& config = {}) {
  std::string s = detail::to_lower(detail::trim(raw));
  for (const auto& [from, to] : config.replacements) detail::replace_all(s, from, to);
  std::string out;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(ch);
    }
  }
  return std::string(detail::trim(out));
}

// Number of distinct party roles named after the last " for ".
inline int count_roles(std::string_view substring) {
  const std::size_t at = detail::find_role_marker(substring);
  if (at == std::string_view::npos) return 0;
  const std::string tail = detail::to_lower(substring.substr(at + 5));
  return (tail.find("plaintiff") != std::string::npos ? 1 : 0) +
         (tail.find("defendant") != std::string::npos ? 1 : 0);
}

// Extracts the party role (text after the last " for ") and firm names: a
// comma-delimited segment containing "&", or a legal-entity keyword, anchors a
// firm; single capitalised words directly before the anchor belong to the
// firm name too ("Moon, Moss, McGill & Bachelder"). Returns nullopt when no
// firm is found.
inline std::optional<AttorneyTuple> parse_attorney_substring(std::string_view raw,
                                                             const ParserConfig& config = {}) {
  std::string text(raw);
  for (const auto& [from, to] : config.expansions) detail::replace_all(text, from, to);

  AttorneyTuple tuple{OtherRole{}, {}};
  std::string_view head = text;
  if (const std::size_t at = detail::find_role_marker(text); at != std::string::npos) {
    head = std::string_view(text).substr(0, at);
    const std::string tail = detail::to_lower(detail::trim(std::string_view(text).substr(at + 5)));
    std::string token;
    for (char ch : tail) {
      if (!std::isalpha(static_cast<unsigned char>(ch))) break;
      token.push_back(ch);
    }
    if (token.starts_with("plaintiff"))
      tuple.role = PartyRole::Plaintiff;
    else if (token.starts_with("defendant"))
      tuple.role = PartyRole::Defendant;
    else
      tuple.role = OtherRole{token};
  }

  std::vector<std::string> segs;
  for (const auto& s : detail::split(head, ',')) segs.emplace_back(detail::trim(s));

  auto keyword_only = [&](const std::string& seg) {
    const std::string low = detail::to_lower(seg);
    for (const auto& kw : config.keywords) {
      const std::string k = detail::to_lower(kw);
      if (low == k || low == k + ".") return true;
    }
    return false;
  };
  // Segment with the keyword suffix removed, if it ends in one.
  auto strip_keyword = [&](const std::string& seg) -> std::optional<std::string> {
    std::string low = detail::to_lower(seg);
    if (!low.empty() && low.back() == '.') low.pop_back();
    for (const auto& kw : config.keywords) {
      std::string k = detail::to_lower(kw);
      for (int variant = 0; variant < 2; ++variant) {
        if (variant == 1) {
          if (k.empty() || k.back() != '.') break;
          k.pop_back();
        }
        if (low.size() > k.size() + 1 && low.ends_with(" " + k))
          return std::string(detail::trim(std::string_view(seg).substr(0, low.size() - k.size())));
      }
    }
    return std::nullopt;
  };

  std::vector<char> used(segs.size(), 0);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (used[i] || segs[i].empty()) continue;
    std::size_t anchor = i;
    std::string core;
    if (keyword_only(segs[i])) {
      used[i] = 1;
      if (i == 0 || used[i - 1] || segs[i - 1].empty()) continue;
      anchor = i - 1;
      core = segs[anchor];
    } else if (auto stripped = strip_keyword(segs[i])) {
      core = *stripped;
    } else if (segs[i].find('&') != std::string::npos) {
      core = segs[i];
      if (i + 1 < segs.size() && keyword_only(segs[i + 1])) used[i + 1] = 1;
    } else {
      continue;
    }
    used[anchor] = 1;
    std::size_t first = anchor;
    while (first > 0 && !used[first - 1] && detail::is_name_word(segs[first - 1])) {
      --first;
      used[first] = 1;
    }
    std::string name;
    for (std::size_t j = first; j < anchor; ++j) name += segs[j] + ", ";
    name += core;
    std::string_view view = detail::trim(name);
    if (detail::to_lower(view.substr(0, 3)) == "of ") view.remove_prefix(3);
    std::string firm = normalize_firm_name(view, config);
    if (!firm.empty() &&
        std::find(tuple.firms.begin(), tuple.firms.end(), firm) == tuple.firms.end())
      tuple.firms.push_back(std::move(firm));
  }
  if (tuple.firms.empty()) return std::nullopt;
  return tuple;
}

// Reads `key = value` lines; '#' starts a comment. Keys: keyword (append a
// legal-entity keyword), replace and expand (`"from" => "to"`, quotes
// optional). Unknown keys are rejected.
inline ParserConfig load_parser_config(std::istream& in, ParserConfig base = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = detail::trim(line);
    if (v.empty() || v.front() == '#') continue;
    const std::size_t eq = v.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(detail::trim(v.substr(0, eq)));
    const std::string_view value = v.substr(eq + 1);
    if (key == "keyword") {
      base.keywords.push_back(detail::to_lower(detail::unquote(value)));
    } else if (key == "replace" || key == "expand") {
      const std::size_t arrow = value.find("=>");
      if (arrow == std::string_view::npos)
        throw InvalidArgument("config line " + std::to_string(lineno) + ": expected from => to");
      auto pair = std::make_pair(detail::unquote(value.substr(0, arrow)),
                                 detail::unquote(value.substr(arrow + 2)));
      if (pair.first.empty())
        throw InvalidArgument("config line " + std::to_string(lineno) + ": empty pattern");
      (key == "replace" ? base.replacements : base.expansions).push_back(std::move(pair));
    } else {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return base;
}

}  // namespace ahpi
