#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corelate/error.hpp"
#include "corelate/graph.hpp"
#include "corelate/random.hpp"

namespace corelate {

// Vertex index -> label. Labels are vertex indices of the same graph.
struct Partition {
  std::vector<std::size_t> label;

  // Label classes as sorted vertex lists, ordered by their smallest vertex.
  std::vector<std::vector<std::size_t>> groups() const {
    std::map<std::size_t, std::vector<std::size_t>> by_label;
    for (std::size_t v = 0; v < label.size(); ++v) by_label[label[v]].push_back(v);
    std::vector<std::vector<std::size_t>> out;
    out.reserve(by_label.size());
    for (auto& [l, members] : by_label) out.push_back(std::move(members));
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
    return out;
  }

  std::size_t label_count() const { return std::set<std::size_t>(label.begin(), label.end()).size(); }

  std::map<std::string, std::size_t> assignment(const BusinessGraph& g) const {
    std::map<std::string, std::size_t> out;
    for (std::size_t v = 0; v < label.size(); ++v) out.emplace(g.id(v), label[v]);
    return out;
  }
};

struct LabelPropagationOptions {
  std::size_t max_sweeps = 100;
};

namespace detail {

inline bool weight_ties(double w, double best) { return w >= best - 1e-12 * std::max(1.0, best); }

}  // namespace detail

// Sum of incident edge weight from `v` to each neighbouring label; returns the
// labels of maximal weight in ascending order.
inline std::vector<std::size_t> maximal_labels(const BusinessGraph& g, const std::vector<std::size_t>& label,
                                               std::size_t v) {
  std::map<std::size_t, double> weight;
  for (const auto& n : g.neighbors(v)) weight[label[n.vertex]] += n.data.weight;
  double best = 0.0;
  for (const auto& [l, w] : weight) best = std::max(best, w);
  std::vector<std::size_t> out;
  for (const auto& [l, w] : weight) {
    if (detail::weight_ties(w, best)) out.push_back(l);
  }
  return out;
}

// Asynchronous weighted label propagation. Every vertex starts with its own
// label; each sweep visits vertices in a fresh seeded order and moves each one
// to a label of maximal incident weight, staying put when its current label is
// already maximal. Stops after a sweep with no change or after max_sweeps.
inline Partition label_propagation(const BusinessGraph& g, std::uint64_t seed,
                                   const LabelPropagationOptions& options = {}) {
  const std::size_t n = g.vertex_count();
  Partition p;
  p.label.resize(n);
  for (std::size_t v = 0; v < n; ++v) p.label[v] = v;
  if (g.edge_count() == 0) return p;

  Rng rng(seed);
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < n; ++v) {
    if (g.degree(v) > 0) order.push_back(v);
  }
  std::vector<double> weight(n, 0.0);
  std::vector<std::size_t> touched;
  std::vector<std::size_t> best_labels;
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    shuffle(std::span<std::size_t>(order), rng);
    bool changed = false;
    for (const auto v : order) {
      touched.clear();
      for (const auto& nb : g.neighbors(v)) {
        const auto l = p.label[nb.vertex];
        if (weight[l] == 0.0) touched.push_back(l);
        weight[l] += nb.data.weight;
      }
      double best = 0.0;
      for (const auto l : touched) best = std::max(best, weight[l]);
      best_labels.clear();
      bool current_is_best = false;
      for (const auto l : touched) {
        if (detail::weight_ties(weight[l], best)) {
          best_labels.push_back(l);
          current_is_best = current_is_best || l == p.label[v];
        }
      }
      for (const auto l : touched) weight[l] = 0.0;
      if (current_is_best || best_labels.empty()) continue;
      std::sort(best_labels.begin(), best_labels.end());
      p.label[v] = best_labels[uniform_index(rng, best_labels.size())];
      changed = true;
    }
    if (!changed) break;
  }
  return p;
}

// Weighted Newman modularity of a partition.
inline double modularity(const BusinessGraph& g, const Partition& p) {
  double total = 0.0;
  std::vector<double> strength(g.vertex_count(), 0.0);
  for (const auto& e : g.edges()) {
    total += e.data.weight;
    strength[e.a] += e.data.weight;
    strength[e.b] += e.data.weight;
  }
  if (total <= 0.0) return 0.0;
  std::map<std::size_t, double> inside;
  std::map<std::size_t, double> degree;
  for (const auto& e : g.edges()) {
    if (p.label[e.a] == p.label[e.b]) inside[p.label[e.a]] += e.data.weight;
  }
  for (std::size_t v = 0; v < g.vertex_count(); ++v) degree[p.label[v]] += strength[v];
  double q = 0.0;
  for (const auto& [l, d] : degree) {
    const double frac = d / (2.0 * total);
    q += inside[l] / total - frac * frac;
  }
  return q;
}

struct DetectOptions {
  std::size_t min_size = 4;
  std::size_t max_size = 30;
  std::uint64_t seed = 0;
  // Literal bounds min_size < |c| < max_size instead of the inclusive ones.
  bool strict_bounds = false;
  // Number of seeded label-propagation runs per iteration; the run with the
  // highest modularity is kept.
  std::size_t lp_runs = 1;
  std::size_t lp_max_sweeps = 100;

  void validate() const {
    if (min_size < 1) throw DomainError("min_size must be >= 1");
    if (max_size < min_size) throw DomainError("max_size must be >= min_size");
    if (lp_runs < 1) throw DomainError("lp_runs must be >= 1");
    if (lp_max_sweeps < 1) throw DomainError("lp_max_sweeps must be >= 1");
  }

  bool accepts(std::size_t size) const {
    return strict_bounds ? (size > min_size && size < max_size) : (size >= min_size && size <= max_size);
  }
};

struct Community {
  std::size_t id = 0;
  std::vector<std::string> members;  // sorted
  std::size_t accepted_at_iteration = 0;

  bool operator==(const Community&) const = default;
};

struct DetectIteration {
  std::size_t iteration = 0;
  std::size_t working_vertices = 0;
  std::size_t working_edges = 0;
  std::size_t labels = 0;
  std::size_t accepted = 0;
  double cut_threshold = 0.0;
  std::size_t edges_removed = 0;
};

struct DetectionResult {
  std::vector<Community> communities;
  std::vector<std::string> unassigned;  // vertices never accepted, sorted
  double min_edge = 0.0;
  std::vector<DetectIteration> iterations;
};

inline Partition best_label_propagation(const BusinessGraph& g, std::uint64_t seed, const DetectOptions& options) {
  const LabelPropagationOptions lp{options.lp_max_sweeps};
  Partition best = label_propagation(g, mix_seed(seed, 0), lp);
  if (options.lp_runs == 1) return best;
  double best_q = modularity(g, best);
  for (std::size_t run = 1; run < options.lp_runs; ++run) {
    auto p = label_propagation(g, mix_seed(seed, run), lp);
    const double q = modularity(g, p);
    if (q > best_q) {
      best_q = q;
      best = std::move(p);
    }
  }
  return best;
}

namespace detail {

inline std::pair<BusinessGraph, std::size_t> drop_edges_below(const BusinessGraph& g, double threshold) {
  BusinessGraph out(g.ids());
  std::size_t removed = 0;
  for (const auto& e : g.edges()) {
    if (e.data.weight < threshold) {
      ++removed;
    } else {
      out.set_edge(e.a, e.b, e.data);
    }
  }
  return {std::move(out), removed};
}

}  // namespace detail

// Iterative size-bounded community extraction. Each round runs label
// propagation on the working graph, accepts label classes whose size is within
// bounds, keeps the rest (as the subgraph they induce) as the next working
// graph, and cuts its edges lighter than min_edge * counter. Counter starts at
// 1 and is bumped at the top of every round, so the first cut is at
// 2 * min_edge. Stops when the working graph has at most min_size vertices or
// a round cuts nothing.
inline DetectionResult detect_communities(const BusinessGraph& graph, const DetectOptions& options) {
  options.validate();
  DetectionResult result;
  double min_edge = std::numeric_limits<double>::infinity();
  for (const auto& e : graph.edges()) min_edge = std::min(min_edge, e.data.weight);
  if (graph.edge_count() == 0) min_edge = 0.0;
  result.min_edge = min_edge;

  BusinessGraph working = graph;
  std::uint64_t counter = 1;
  std::set<std::string> assigned;
  while (working.vertex_count() > options.min_size) {
    ++counter;
    DetectIteration log;
    log.iteration = counter - 1;
    log.working_vertices = working.vertex_count();
    log.working_edges = working.edge_count();

    const auto partition = best_label_propagation(working, mix_seed(options.seed, counter), options);
    const auto groups = partition.groups();
    log.labels = groups.size();
    std::set<std::string> rest;
    for (const auto& group : groups) {
      if (options.accepts(group.size())) {
        Community c;
        c.id = result.communities.size();
        c.accepted_at_iteration = log.iteration;
        for (const auto v : group) c.members.push_back(working.id(v));
        std::sort(c.members.begin(), c.members.end());
        assigned.insert(c.members.begin(), c.members.end());
        result.communities.push_back(std::move(c));
        ++log.accepted;
      } else {
        for (const auto v : group) rest.insert(working.id(v));
      }
    }
    const auto remaining = working.induced_if([&](const std::string& id) { return rest.contains(id); });
    log.cut_threshold = min_edge * static_cast<double>(counter);
    auto [next, removed] = detail::drop_edges_below(remaining, log.cut_threshold);
    log.edges_removed = removed;
    result.iterations.push_back(log);
    working = std::move(next);
    if (removed == 0) break;
  }
  for (const auto& id : graph.ids()) {
    if (!assigned.contains(id)) result.unassigned.push_back(id);
  }
  return result;
}

}  // namespace corelate
