#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corelate/error.hpp"
#include "corelate/graph.hpp"

namespace corelate {

struct Egonet {
  std::string target;
  std::vector<std::pair<std::string, double>> neighbors;  // strongest first
  BusinessGraph subgraph;
};

// The target plus its `max_neighbors` heaviest neighbours (ties by id). The
// subgraph is induced on that vertex set unless `star` is set, in which case
// only the target's own edges are kept.
inline Egonet extract_egonet(const BusinessGraph& graph, const std::string& target, std::size_t max_neighbors = 7,
                             bool star = false) {
  const auto t = graph.find(target);
  if (!t) throw LookupError("target business '" + target + "' is not in the graph");
  Egonet ego;
  ego.target = target;
  for (const auto& n : graph.neighbors(*t)) ego.neighbors.emplace_back(graph.id(n.vertex), n.data.weight);
  std::stable_sort(ego.neighbors.begin(), ego.neighbors.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ego.neighbors.size() > max_neighbors) ego.neighbors.resize(max_neighbors);

  std::set<std::string> keep{target};
  for (const auto& [id, w] : ego.neighbors) keep.insert(id);
  if (star) {
    BusinessGraph g(std::vector<std::string>(keep.begin(), keep.end()));
    for (const auto& [id, w] : ego.neighbors) g.set_edge(target, id, *graph.edge(target, id));
    ego.subgraph = std::move(g);
  } else {
    ego.subgraph = graph.induced_if([&](const std::string& id) { return keep.contains(id); });
  }
  return ego;
}

}  // namespace corelate
