#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corelate/error.hpp"
#include "corelate/ingest.hpp"

namespace corelate {

struct EdgeData {
  std::uint64_t common_users = 0;  // |U_i ∩ U_j|
  double weight = 0.0;             // Jaccard index

  bool operator==(const EdgeData&) const = default;
};

// Undirected weighted graph over business ids. Vertices are kept sorted by id
// and every adjacency list is sorted by neighbor index, so iteration order is
// a function of the content only.
class BusinessGraph {
 public:
  struct Neighbor {
    std::size_t vertex;
    EdgeData data;
  };

  struct Edge {
    std::size_t a;  // a < b
    std::size_t b;
    EdgeData data;
  };

  BusinessGraph() = default;

  explicit BusinessGraph(std::vector<std::string> vertex_ids) : ids_(std::move(vertex_ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
    adj_.resize(ids_.size());
  }

  std::size_t vertex_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t v) const { return ids_.at(v); }

  bool has_vertex(const std::string& id) const { return index_.contains(id); }
  std::optional<std::size_t> find(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw LookupError("unknown vertex '" + id + "'");
    return it->second;
  }

  std::span<const Neighbor> neighbors(std::size_t v) const { return adj_.at(v); }
  std::size_t degree(std::size_t v) const { return adj_.at(v).size(); }

  // Inserts or replaces the edge between a and b.
  void set_edge(std::size_t a, std::size_t b, EdgeData data) {
    if (a == b) throw DomainError("self-loop on '" + ids_.at(a) + "'");
    if (a >= ids_.size() || b >= ids_.size()) throw DomainError("edge endpoint out of range");
    const bool added = upsert(adj_[a], b, data);
    upsert(adj_[b], a, data);
    if (added) ++edge_count_;
  }

  void set_edge(const std::string& a, const std::string& b, EdgeData data) { set_edge(index_of(a), index_of(b), data); }

  std::optional<EdgeData> edge(std::size_t a, std::size_t b) const {
    const auto& list = adj_.at(a);
    const auto it = std::lower_bound(list.begin(), list.end(), b,
                                     [](const Neighbor& n, std::size_t v) { return n.vertex < v; });
    if (it == list.end() || it->vertex != b) return std::nullopt;
    return it->data;
  }

  std::optional<EdgeData> edge(const std::string& a, const std::string& b) const {
    const auto ia = find(a);
    const auto ib = find(b);
    if (!ia || !ib) return std::nullopt;
    return edge(*ia, *ib);
  }

  // Each undirected edge once, ordered by (a, b).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (std::size_t a = 0; a < adj_.size(); ++a) {
      for (const auto& n : adj_[a]) {
        if (n.vertex > a) out.push_back({a, n.vertex, n.data});
      }
    }
    return out;
  }

  // Subgraph induced by the vertices whose ids are in `keep`.
  template <typename Pred>
  BusinessGraph induced_if(Pred keep) const {
    std::vector<std::string> kept;
    for (const auto& id : ids_) {
      if (keep(id)) kept.push_back(id);
    }
    BusinessGraph g(std::move(kept));
    for (const auto& e : edges()) {
      const auto a = g.find(ids_[e.a]);
      const auto b = g.find(ids_[e.b]);
      if (a && b) g.set_edge(*a, *b, e.data);
    }
    return g;
  }

  bool operator==(const BusinessGraph& o) const {
    if (ids_ != o.ids_ || edge_count_ != o.edge_count_) return false;
    for (std::size_t v = 0; v < adj_.size(); ++v) {
      const auto& x = adj_[v];
      const auto& y = o.adj_[v];
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].vertex != y[i].vertex || !(x[i].data == y[i].data)) return false;
      }
    }
    return true;
  }

 private:
  static bool upsert(std::vector<Neighbor>& list, std::size_t v, EdgeData data) {
    const auto it = std::lower_bound(list.begin(), list.end(), v,
                                     [](const Neighbor& n, std::size_t x) { return n.vertex < x; });
    if (it != list.end() && it->vertex == v) {
      it->data = data;
      return false;
    }
    list.insert(it, Neighbor{v, data});
    return true;
  }

  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Neighbor>> adj_;
  std::size_t edge_count_ = 0;
};

// Common-user counts for every business pair sharing at least one user.
// Entries are sorted by (a, b) with a < b, indices into `ids`.
struct PairCounts {
  struct Entry {
    std::uint32_t a;
    std::uint32_t b;
    std::uint64_t count;
    bool operator==(const Entry&) const = default;
  };

  std::vector<std::string> ids;  // sorted business ids
  std::vector<Entry> entries;

  std::uint64_t count(const std::string& x, const std::string& y) const {
    auto pos = [&](const std::string& id) -> std::optional<std::uint32_t> {
      const auto it = std::lower_bound(ids.begin(), ids.end(), id);
      if (it == ids.end() || *it != id) return std::nullopt;
      return static_cast<std::uint32_t>(it - ids.begin());
    };
    auto ia = pos(x);
    auto ib = pos(y);
    if (!ia || !ib || *ia == *ib) return 0;
    if (*ia > *ib) std::swap(ia, ib);
    const Entry key{*ia, *ib, 0};
    const auto it = std::lower_bound(entries.begin(), entries.end(), key, [](const Entry& l, const Entry& r) {
      return std::pair(l.a, l.b) < std::pair(r.a, r.b);
    });
    if (it == entries.end() || it->a != *ia || it->b != *ib) return 0;
    return it->count;
  }

  // Sum over unordered pairs; equals half the sum over ordered pairs.
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (const auto& e : entries) s += e.count;
    return s;
  }

  std::size_t size() const { return entries.size(); }
};

// Counts |U_i ∩ U_j| by emitting all business pairs of every user. Users are
// split into contiguous chunks across `threads` workers; the partial maps are
// summed, so the result does not depend on the thread count.
inline PairCounts count_common(const ReactionDataset& reactions, unsigned threads = 1) {
  PairCounts out;
  for (const auto& [business, users] : reactions.business_index()) out.ids.push_back(business);
  if (out.ids.size() > std::numeric_limits<std::uint32_t>::max()) throw DomainError("too many businesses");

  std::unordered_map<std::string, std::uint32_t> index;
  index.reserve(out.ids.size());
  for (std::size_t i = 0; i < out.ids.size(); ++i) index.emplace(out.ids[i], static_cast<std::uint32_t>(i));

  std::vector<std::vector<std::uint32_t>> baskets;
  baskets.reserve(reactions.user_index().size());
  for (const auto& [user, businesses] : reactions.user_index()) {
    if (businesses.size() < 2) continue;
    std::vector<std::uint32_t> basket;
    basket.reserve(businesses.size());
    for (const auto& b : businesses) basket.push_back(index.at(b));
    std::sort(basket.begin(), basket.end());
    baskets.push_back(std::move(basket));
  }

  using Map = std::unordered_map<std::uint64_t, std::uint64_t>;
  auto count_range = [&](std::size_t begin, std::size_t end, Map& local) {
    for (std::size_t u = begin; u < end; ++u) {
      const auto& basket = baskets[u];
      for (std::size_t i = 0; i < basket.size(); ++i) {
        const std::uint64_t hi = static_cast<std::uint64_t>(basket[i]) << 32;
        for (std::size_t j = i + 1; j < basket.size(); ++j) ++local[hi | basket[j]];
      }
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, baskets.size()))));
  std::vector<Map> partial(threads);
  if (threads == 1) {
    count_range(0, baskets.size(), partial[0]);
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (baskets.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(baskets.size(), t * chunk);
      const std::size_t end = std::min(baskets.size(), begin + chunk);
      workers.emplace_back(count_range, begin, end, std::ref(partial[t]));
    }
    for (auto& w : workers) w.join();
  }
  for (unsigned t = 1; t < threads; ++t) {
    for (const auto& [key, c] : partial[t]) partial[0][key] += c;
    Map().swap(partial[t]);
  }
  out.entries.reserve(partial[0].size());
  for (const auto& [key, c] : partial[0]) {
    out.entries.push_back({static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key & 0xffffffffu), c});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const PairCounts::Entry& l, const PairCounts::Entry& r) { return std::pair(l.a, l.b) < std::pair(r.a, r.b); });
  return out;
}

// Moments of the common-user count of an edge when n_r co-reactions are
// spread uniformly over all n_c possible edges.
struct RandomEdgeStats {
  std::uint64_t n_r = 0;
  std::uint64_t n_c = 0;
  double mu = 0.0;
  double sigma = 0.0;
  double lower_bound = 0.0;
};

inline RandomEdgeStats random_edge_stats(std::uint64_t n_r, std::uint64_t n_b) {
  if (n_b < 2) throw DomainError("random_edge_stats: need at least 2 businesses, got " + std::to_string(n_b));
  RandomEdgeStats s;
  s.n_r = n_r;
  s.n_c = n_b * (n_b - 1) / 2;
  const double n_c = static_cast<double>(s.n_c);
  s.mu = static_cast<double>(n_r) / n_c;
  s.sigma = std::sqrt(s.mu * (1.0 - 1.0 / n_c));
  s.lower_bound = s.mu + 3.0 * s.sigma;
  return s;
}

// Keeps pairs whose common-user count is strictly above `lower_bound` and
// weights them by the Jaccard index. `extra_vertices` adds businesses that
// have no reactions left, so the vertex set can be the full business list.
inline BusinessGraph build_graph(const PairCounts& pair_counts, const Index& business_index, double lower_bound,
                                 const std::vector<std::string>& extra_vertices = {}) {
  std::vector<std::string> vertices;
  vertices.reserve(business_index.size() + extra_vertices.size());
  for (const auto& [id, users] : business_index) vertices.push_back(id);
  vertices.insert(vertices.end(), extra_vertices.begin(), extra_vertices.end());
  BusinessGraph g(std::move(vertices));

  std::vector<std::size_t> set_size(pair_counts.ids.size());
  std::vector<std::size_t> vertex(pair_counts.ids.size());
  for (std::size_t i = 0; i < pair_counts.ids.size(); ++i) {
    const auto it = business_index.find(pair_counts.ids[i]);
    if (it == business_index.end()) throw DataError("pair counts reference unknown business '" + pair_counts.ids[i] + "'");
    set_size[i] = it->second.size();
    vertex[i] = g.index_of(pair_counts.ids[i]);
  }
  for (const auto& e : pair_counts.entries) {
    if (!(static_cast<double>(e.count) > lower_bound)) continue;
    const auto uni = set_size[e.a] + set_size[e.b] - e.count;
    if (e.count == 0 || uni < e.count) throw DataError("pair counts inconsistent with business index");
    g.set_edge(vertex[e.a], vertex[e.b], {e.count, static_cast<double>(e.count) / static_cast<double>(uni)});
  }
  return g;
}

inline BusinessGraph exclude_nodes(const BusinessGraph& graph, const IdSet& ids) {
  if (ids.empty()) return graph;
  return graph.induced_if([&](const std::string& id) { return !ids.contains(id); });
}

struct HubReport {
  struct Vertex {
    std::string id;
    std::size_t degree;
  };
  struct Link {
    std::string a;
    std::string b;
    std::uint64_t common_users;
    double weight;
  };
  std::vector<Vertex> vertices;
  std::vector<Link> edges;
};

// Top-n vertices by degree and top-n edges by common users; ties by id.
inline HubReport hub_report(const BusinessGraph& graph, std::size_t n) {
  if (n < 1) throw DomainError("hub_report: n must be >= 1");
  HubReport r;
  for (std::size_t v = 0; v < graph.vertex_count(); ++v) r.vertices.push_back({graph.id(v), graph.degree(v)});
  std::stable_sort(r.vertices.begin(), r.vertices.end(),
                   [](const auto& x, const auto& y) { return x.degree > y.degree; });
  if (r.vertices.size() > n) r.vertices.resize(n);

  for (const auto& e : graph.edges()) r.edges.push_back({graph.id(e.a), graph.id(e.b), e.data.common_users, e.data.weight});
  std::stable_sort(r.edges.begin(), r.edges.end(),
                   [](const auto& x, const auto& y) { return x.common_users > y.common_users; });
  if (r.edges.size() > n) r.edges.resize(n);
  return r;
}

}  // namespace corelate
