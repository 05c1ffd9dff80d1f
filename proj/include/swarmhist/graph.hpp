#pragma once

// Per-interval encounter graphs G_t(N, p): robots are vertices 1..n and each
// unordered pair meets independently with probability p.

#include <cstddef>
#include <string>
#include <vector>

#include "swarmhist/chain.hpp"
#include "swarmhist/crypto.hpp"
#include "swarmhist/rng.hpp"

namespace swarmhist {

struct Edge {
  RobotId u = 0;  // u < v
  RobotId v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class EncounterGraph {
 public:
  EncounterGraph() = default;

  // Normalises each pair to u < v and sorts. Throws InvalidParameter on
  // self-loops, duplicates or vertices outside 1..n.
  static EncounterGraph from_edges(std::size_t n, Interval t, std::vector<Edge> edges);

  std::size_t n() const noexcept { return n_; }
  Interval interval() const noexcept { return interval_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  // Sorted ascending. Throws InvalidParameter when v is outside 1..n.
  const std::vector<RobotId>& neighbors(RobotId v) const;
  std::size_t degree(RobotId v) const { return neighbors(v).size(); }
  bool has_edge(RobotId a, RobotId b) const;

  // Copy without any edge touching an inactive vertex (active is indexed by id).
  EncounterGraph restricted_to(const std::vector<bool>& active) const;

  friend bool operator==(const EncounterGraph& a, const EncounterGraph& b) {
    return a.n_ == b.n_ && a.interval_ == b.interval_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  Interval interval_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<RobotId>> adjacency_;  // index 0 unused
};

// Visits pairs (1,2), (1,3), ..., (n-1,n) in order, one uniform draw each.
EncounterGraph gen_interval_graph(std::size_t n, double p, Interval t, Rng& rng);

std::vector<RobotId> neighbors(const EncounterGraph& g, RobotId v);

// One "u v" line per edge.
std::string to_edge_list(const EncounterGraph& g);

}  // namespace swarmhist
