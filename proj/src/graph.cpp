#include "swarmhist/graph.hpp"

#include <algorithm>
#include <sstream>

#include "swarmhist/error.hpp"

namespace swarmhist {

EncounterGraph EncounterGraph::from_edges(std::size_t n, Interval t, std::vector<Edge> edges) {
  if (n == 0) throw InvalidParameter("graph needs at least one vertex", "n");
  for (auto& e : edges) {
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u == e.v) throw InvalidParameter("self-loop in encounter graph", "edges");
    if (e.u < 1 || e.v > n) throw InvalidParameter("edge endpoint out of range", "edges");
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw InvalidParameter("duplicate edge in encounter graph", "edges");
  }
  EncounterGraph g;
  g.n_ = n;
  g.interval_ = t;
  g.adjacency_.assign(n + 1, {});
  for (const auto& e : edges) {
    g.adjacency_[e.u].push_back(e.v);
    g.adjacency_[e.v].push_back(e.u);
  }
  for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());
  g.edges_ = std::move(edges);
  return g;
}

const std::vector<RobotId>& EncounterGraph::neighbors(RobotId v) const {
  if (v < 1 || v > n_) throw InvalidParameter("robot id out of range", "v");
  return adjacency_[v];
}

bool EncounterGraph::has_edge(RobotId a, RobotId b) const {
  if (a < 1 || a > n_ || b < 1 || b > n_) return false;
  const auto& adj = adjacency_[a];
  return std::binary_search(adj.begin(), adj.end(), b);
}

EncounterGraph EncounterGraph::restricted_to(const std::vector<bool>& active) const {
  std::vector<Edge> kept;
  kept.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (active.at(e.u) && active.at(e.v)) kept.push_back(e);
  }
  return from_edges(n_, interval_, std::move(kept));
}

EncounterGraph gen_interval_graph(std::size_t n, double p, Interval t, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("edge probability must lie in [0, 1]", "p");
  if (n == 0) throw InvalidParameter("graph needs at least one vertex", "n");
  std::vector<Edge> edges;
  for (RobotId u = 1; u <= n; ++u) {
    for (RobotId v = u + 1; v <= n; ++v) {
      if (rng.bernoulli(p)) edges.push_back({u, v});
    }
  }
  return EncounterGraph::from_edges(n, t, std::move(edges));
}

std::vector<RobotId> neighbors(const EncounterGraph& g, RobotId v) { return g.neighbors(v); }

std::string to_edge_list(const EncounterGraph& g) {
  std::ostringstream out;
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  return out.str();
}

}  // namespace swarmhist
