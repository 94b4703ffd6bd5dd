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

// Rank correlation. kendall_tau_b runs in O(n log n) following Knight's
// merge-sort formulation with tie corrections.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ahpi/errors.hpp"

namespace ahpi {

namespace detail {

// Number of tied pairs in a sorted range.
template <class It, class Eq>
std::int64_t count_tied_pairs(It first, It last, Eq eq) {
  std::int64_t ties = 0;
  while (first != last) {
    It run_end = std::next(first);
    while (run_end != last && eq(*first, *run_end)) ++run_end;
    const std::int64_t len = std::distance(first, run_end);
    ties += len * (len - 1) / 2;
    first = run_end;
  }
  return ties;
}

// Stable merge sort of v by value; returns the number of inversions.
inline std::int64_t merge_sort_count(std::vector<double>& v, std::vector<double>& buf,
                                     std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_sort_count(v, buf, lo, mid) + merge_sort_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      buf[k++] = v[j++];
      swaps += static_cast<std::int64_t>(mid - i);
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

}  // namespace detail

// Tie-adjusted Kendall tau-b between paired observations. Throws
// UndefinedResult when fewer than two pairs are given or either side is
// constant.
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw UndefinedResult("kendall_tau_b: need at least two observations");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t tied_x =
      detail::count_tied_pairs(order.begin(), order.end(),
                               [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const std::int64_t tied_xy = detail::count_tied_pairs(
      order.begin(), order.end(),
      [&](std::size_t a, std::size_t b) { return x[a] == x[b] && y[a] == y[b]; });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> buf(n);
  const std::int64_t swaps = detail::merge_sort_count(ys, buf, 0, n);
  const std::int64_t tied_y =
      detail::count_tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  const double denom = std::sqrt(static_cast<double>(n0 - tied_x)) *
                       std::sqrt(static_cast<double>(n0 - tied_y));
  if (denom == 0.0) throw UndefinedResult("kendall_tau_b: a ranking is constant");
  const double num = static_cast<double>(n0 - tied_x - tied_y + tied_xy - 2 * swaps);
  return std::clamp(num / denom, -1.0, 1.0);
}

// Kendall tau-b between two ordered lists of names (best first), computed over
// the names present in both. Duplicates keep their first position.
inline double kendall_tau(std::span<const std::string> ranking_a,
                          std::span<const std::string> ranking_b) {
  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < ranking_b.size(); ++i) pos_b.emplace(ranking_b[i], i);
  std::unordered_map<std::string, bool> seen;
  std::vector<double> xa, xb;
  for (std::size_t i = 0; i < ranking_a.size(); ++i) {
    auto it = pos_b.find(ranking_a[i]);
    if (it == pos_b.end() || !seen.emplace(ranking_a[i], true).second) continue;
    xa.push_back(static_cast<double>(i));
    xb.push_back(static_cast<double>(it->second));
  }
  if (xa.size() < 2) throw UndefinedResult("kendall_tau: rankings share fewer than two entries");
  return kendall_tau_b(xa, xb);
}

// Agreement between two score vectors used as a convergence signal. Scores are
// snapped to a 1e-9 grid so round-off does not flip exact ties; two fully tied
// vectors agree perfectly, one tied and one not do not agree at all.
inline double rank_agreement(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2) return 1.0;
  auto snap = [](std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::round(v[i] * 1e9);
    return out;
  };
  const auto sa = snap(a), sb = snap(b);
  const bool const_a = std::all_of(sa.begin(), sa.end(), [&](double v) { return v == sa[0]; });
  const bool const_b = std::all_of(sb.begin(), sb.end(), [&](double v) { return v == sb[0]; });
  if (const_a && const_b) return 1.0;
  if (const_a || const_b) return 0.0;
  return kendall_tau_b(sa, sb);
}

// Spearman correlation (Pearson on average ranks).
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman_rho: length mismatch");
  if (x.size() < 2) throw UndefinedResult("spearman_rho: need at least two observations");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j - 1);
      for (std::size_t t = i; t < j; ++t) r[idx[t]] = avg;
      i = j;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedResult("spearman_rho: a ranking is constant");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ahpi
