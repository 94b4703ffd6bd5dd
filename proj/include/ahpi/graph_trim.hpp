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

// Interaction network and Q-factor trimming. The network is an undirected
// multigraph: entities are nodes, each interaction is one edge, and an
// entity's degree counts its interactions (parallel edges included).

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "ahpi/errors.hpp"
#include "ahpi/model.hpp"

namespace ahpi {

class InteractionNetwork {
 public:
  InteractionNetwork() = default;

  // Network over all ids in [0, id_space).
  InteractionNetwork(std::size_t id_space, std::vector<InteractionRecord> interactions)
      : InteractionNetwork(id_space, std::move(interactions), std::vector<char>(id_space, 1)) {}

  // Network over the ids flagged in `present`; every interaction endpoint must be present.
  InteractionNetwork(std::size_t id_space, std::vector<InteractionRecord> interactions,
                     std::vector<char> present)
      : present_(std::move(present)), degree_(id_space, 0), interactions_(std::move(interactions)) {
    if (present_.size() != id_space) throw InvalidArgument("presence mask has the wrong size");
    for (const auto& r : interactions_) {
      if (r.plaintiff.index() >= id_space || r.defendant.index() >= id_space)
        throw LookupError("interaction endpoint outside the id space");
      if (!present_[r.plaintiff.index()] || !present_[r.defendant.index()])
        throw InvalidArgument("interaction endpoint is not in the entity set");
      ++degree_[r.plaintiff.index()];
      ++degree_[r.defendant.index()];
    }
    entity_count_ = static_cast<std::size_t>(std::count(present_.begin(), present_.end(), 1));
  }

  static InteractionNetwork from_dataset(const Dataset& data) {
    return InteractionNetwork(data.entity_count(), data.records);
  }

  std::size_t id_space() const { return present_.size(); }
  std::size_t entity_count() const { return entity_count_; }
  std::size_t interaction_count() const { return interactions_.size(); }
  const std::vector<InteractionRecord>& interactions() const { return interactions_; }
  bool contains(EntityId k) const { return k.index() < present_.size() && present_[k.index()]; }
  std::uint32_t degree(EntityId k) const { return degree_.at(k.index()); }
  const std::vector<char>& presence() const { return present_; }

  std::vector<EntityId> entities() const {
    std::vector<EntityId> out;
    out.reserve(entity_count_);
    for (std::size_t k = 0; k < present_.size(); ++k)
      if (present_[k]) out.emplace_back(k);
    return out;
  }

 private:
  std::vector<char> present_;
  std::vector<std::uint32_t> degree_;
  std::vector<InteractionRecord> interactions_;
  std::size_t entity_count_ = 0;
};

// Average number of interactions per entity, N / K.
inline double q_factor(const InteractionNetwork& net) {
  if (net.entity_count() == 0) throw InvalidArgument("q_factor: network has no entities");
  return static_cast<double>(net.interaction_count()) / static_cast<double>(net.entity_count());
}

struct QReport {
  double q_achieved = 0.0;
  std::size_t n_interactions = 0;
  std::size_t k_entities = 0;
  std::vector<EntityId> removal_order;
};

struct TrimResult {
  InteractionNetwork network;
  QReport report;
};

// Removes one minimum-degree entity at a time (ties to the lowest id) together
// with its interactions, stopping as soon as N/K >= target_q.
inline TrimResult trim_to_q(const InteractionNetwork& net, double target_q) {
  if (!(target_q > 0.0)) throw InvalidArgument("trim_to_q: target must be positive");
  const std::size_t ids = net.id_space();
  const auto& recs = net.interactions();

  std::vector<std::vector<std::uint32_t>> incident(ids);
  for (std::size_t n = 0; n < recs.size(); ++n) {
    incident[recs[n].plaintiff.index()].push_back(static_cast<std::uint32_t>(n));
    incident[recs[n].defendant.index()].push_back(static_cast<std::uint32_t>(n));
  }
  std::vector<std::uint32_t> degree(ids, 0);
  std::set<std::pair<std::uint32_t, std::uint32_t>> queue;
  for (std::size_t k = 0; k < ids; ++k) {
    if (!net.contains(EntityId(k))) continue;
    degree[k] = net.degree(EntityId(k));
    queue.emplace(degree[k], static_cast<std::uint32_t>(k));
  }

  std::vector<char> alive_rec(recs.size(), 1);
  std::vector<char> present = net.presence();
  std::size_t n_alive = recs.size();
  std::size_t k_alive = net.entity_count();
  QReport report;

  auto reached = [&] {
    return k_alive > 0 &&
           static_cast<double>(n_alive) / static_cast<double>(k_alive) >= target_q;
  };
  while (!reached()) {
    if (queue.empty())
      throw InfeasibleTarget("trim_to_q: network exhausted before reaching Q=" +
                             std::to_string(target_q));
    const auto [deg, victim] = *queue.begin();
    queue.erase(queue.begin());
    for (std::uint32_t n : incident[victim]) {
      if (!alive_rec[n]) continue;
      alive_rec[n] = 0;
      --n_alive;
      const std::size_t other = recs[n].plaintiff.index() == victim ? recs[n].defendant.index()
                                                                      : recs[n].plaintiff.index();
      queue.erase({degree[other], static_cast<std::uint32_t>(other)});
      --degree[other];
      queue.emplace(degree[other], static_cast<std::uint32_t>(other));
    }
    degree[victim] = 0;
    present[victim] = 0;
    --k_alive;
    report.removal_order.emplace_back(static_cast<std::size_t>(victim));
  }

  std::vector<InteractionRecord> kept;
  kept.reserve(n_alive);
  for (std::size_t n = 0; n < recs.size(); ++n)
    if (alive_rec[n]) kept.push_back(recs[n]);
  TrimResult out{InteractionNetwork(ids, std::move(kept), std::move(present)), std::move(report)};
  out.report.n_interactions = out.network.interaction_count();
  out.report.k_entities = out.network.entity_count();
  out.report.q_achieved = q_factor(out.network);
  return out;
}

// Dataset over the entities of `net`, re-indexed densely in ascending original
// id order. original_id[new] gives the id in `base`.
struct CompactDataset {
  Dataset data;
  std::vector<EntityId> original_id;
};

inline CompactDataset compact(const Dataset& base, const InteractionNetwork& net) {
  CompactDataset out;
  out.data.type_names = base.type_names;
  std::vector<std::uint32_t> remap(net.id_space(), UINT32_MAX);
  for (EntityId k : net.entities()) {
    remap[k.index()] = static_cast<std::uint32_t>(out.original_id.size());
    out.original_id.push_back(k);
    out.data.entity_labels.push_back(k.index() < base.entity_labels.size()
                                         ? base.entity_labels[k.index()]
                                         : std::to_string(k.index()));
  }
  out.data.records.reserve(net.interaction_count());
  for (auto r : net.interactions()) {
    r.plaintiff = EntityId(remap[r.plaintiff.index()]);
    r.defendant = EntityId(remap[r.defendant.index()]);
    out.data.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace ahpi
