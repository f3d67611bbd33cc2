#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "corelate/community.hpp"
#include "corelate/error.hpp"
#include "corelate/ingest.hpp"
#include "corelate/random.hpp"
#include "corelate/taxonomy.hpp"

namespace corelate {

// One value per canonical category.
struct CategoryVector {
  std::vector<double> values;

  CategoryVector() = default;
  explicit CategoryVector(std::size_t dims) : values(dims, 0.0) {}
  explicit CategoryVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }

  bool operator==(const CategoryVector&) const = default;
};

inline double squared_distance(const CategoryVector& a, const CategoryVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    d += x * x;
  }
  return d;
}

using BusinessMap = std::map<std::string, Business>;

inline BusinessMap index_businesses(const std::vector<Business>& businesses) {
  BusinessMap out;
  for (const auto& b : businesses) out.emplace(b.id, b);
  return out;
}

// Raw per-category member counts.
inline CategoryVector community_counts(const Community& community, const BusinessMap& businesses,
                                       const CategoryTaxonomy& taxonomy) {
  CategoryVector v(taxonomy.size());
  for (const auto& id : community.members) {
    const auto it = businesses.find(id);
    if (it == businesses.end()) throw DataError("community member '" + id + "' has no business record");
    v[taxonomy.flatten(it->second.raw_category)] += 1.0;
  }
  return v;
}

// Divides by the largest component; all-zero vectors are left alone.
inline CategoryVector max_normalized(CategoryVector v) {
  const double m = v.max();
  if (m > 0.0) {
    for (auto& x : v.values) x /= m;
  }
  return v;
}

inline CategoryVector community_vector(const Community& community, const BusinessMap& businesses,
                                       const CategoryTaxonomy& taxonomy) {
  return max_normalized(community_counts(community, businesses, taxonomy));
}

enum class Normalization { PerCommunityMax, PerFeatureMax };

inline Normalization parse_normalization(std::string_view s) {
  if (s == "per_community_max" || s == "per_community") return Normalization::PerCommunityMax;
  if (s == "per_feature" || s == "per_feature_max") return Normalization::PerFeatureMax;
  throw UsageError("unknown normalization '" + std::string(s) + "'");
}

inline std::string_view to_string(Normalization n) {
  return n == Normalization::PerCommunityMax ? "per_community_max" : "per_feature";
}

// Alternative reading: each feature divided by its maximum over all communities.
inline std::vector<CategoryVector> per_feature_normalized(std::vector<CategoryVector> counts) {
  if (counts.empty()) return counts;
  const std::size_t dims = counts.front().size();
  for (std::size_t d = 0; d < dims; ++d) {
    double m = 0.0;
    for (const auto& v : counts) m = std::max(m, v[d]);
    if (m <= 0.0) continue;
    for (auto& v : counts) v[d] /= m;
  }
  return counts;
}

inline std::vector<CategoryVector> community_vectors(const std::vector<Community>& communities,
                                                     const BusinessMap& businesses, const CategoryTaxonomy& taxonomy,
                                                     Normalization normalization = Normalization::PerCommunityMax) {
  std::vector<CategoryVector> out;
  out.reserve(communities.size());
  for (const auto& c : communities) out.push_back(community_counts(c, businesses, taxonomy));
  if (normalization == Normalization::PerFeatureMax) return per_feature_normalized(std::move(out));
  for (auto& v : out) v = max_normalized(std::move(v));
  return out;
}

struct ClusterModel {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // input vector index -> cluster
  std::vector<CategoryVector> centroids;
  double sse = 0.0;
  std::vector<double> sse_trace;  // SSE after each Lloyd iteration
  std::size_t iterations = 0;
  bool converged = false;

  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
    return out;
  }
};

namespace detail {

inline std::size_t nearest(const CategoryVector& x, const std::vector<CategoryVector>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(x, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline double sse(const std::vector<CategoryVector>& xs, const std::vector<std::size_t>& assignment,
                  const std::vector<CategoryVector>& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += squared_distance(xs[i], centroids[assignment[i]]);
  return s;
}

// Gives every empty cluster the point farthest from its current centroid,
// taken from a cluster that keeps at least one member.
inline void repair_empty(const std::vector<CategoryVector>& xs, std::vector<std::size_t>& assignment,
                         std::vector<CategoryVector>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> size(k, 0);
  for (auto a : assignment) ++size[a];
  for (std::size_t c = 0; c < k; ++c) {
    if (size[c] > 0) continue;
    std::size_t far = xs.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (size[assignment[i]] < 2) continue;
      const double d = squared_distance(xs[i], centroids[assignment[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    --size[assignment[far]];
    assignment[far] = c;
    size[c] = 1;
    centroids[c] = xs[far];
  }
}

inline std::vector<CategoryVector> means(const std::vector<CategoryVector>& xs,
                                         const std::vector<std::size_t>& assignment, std::size_t k) {
  const std::size_t dims = xs.front().size();
  std::vector<CategoryVector> out(k, CategoryVector(dims));
  std::vector<std::size_t> size(k, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto& c = out[assignment[i]];
    for (std::size_t d = 0; d < dims; ++d) c[d] += xs[i][d];
    ++size[assignment[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (auto& x : out[c].values) x /= static_cast<double>(size[c]);
  }
  return out;
}

}  // namespace detail

// Lloyd's algorithm with Euclidean distance. Initial centroids are k distinct
// input points drawn with the seed; equidistant points go to the lowest
// centroid index.
inline ClusterModel kmeans(const std::vector<CategoryVector>& vectors, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100) {
  if (k < 1) throw DomainError("kmeans: k must be >= 1");
  if (k > vectors.size()) {
    throw DomainError("kmeans: k = " + std::to_string(k) + " exceeds the number of vectors (" +
                      std::to_string(vectors.size()) + ")");
  }
  if (max_iter < 1) throw DomainError("kmeans: max_iter must be >= 1");
  const std::size_t dims = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dims) throw DomainError("kmeans: vectors differ in dimension");
  }

  ClusterModel m;
  m.k = k;
  Rng rng(seed);
  std::vector<std::size_t> pick(vectors.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, pick.size() - i));
    std::swap(pick[i], pick[j]);
    m.centroids.push_back(vectors[pick[i]]);
  }

  m.assignment.assign(vectors.size(), 0);
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<std::size_t> next(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) next[i] = detail::nearest(vectors[i], m.centroids);
    detail::repair_empty(vectors, next, m.centroids);
    if (it > 0 && next == m.assignment) {
      m.converged = true;
      break;
    }
    m.assignment = std::move(next);
    m.centroids = detail::means(vectors, m.assignment, k);
    m.sse_trace.push_back(detail::sse(vectors, m.assignment, m.centroids));
    m.iterations = it + 1;
  }
  m.sse = detail::sse(vectors, m.assignment, m.centroids);
  return m;
}

struct KSelection {
  std::size_t k = 0;
  std::vector<std::pair<std::size_t, double>> sse_table;
  std::string caveat;
};

// Literal smallest-SSE choice over the candidates (ties to the smaller k).
inline KSelection select_k(const std::vector<CategoryVector>& vectors, const std::vector<std::size_t>& k_candidates,
                           std::uint64_t seed, std::size_t max_iter = 100) {
  if (k_candidates.empty()) throw DomainError("select_k: no candidates");
  KSelection out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto k : k_candidates) {
    const auto model = kmeans(vectors, k, seed, max_iter);
    out.sse_table.emplace_back(k, model.sse);
    const bool first = out.sse_table.size() == 1;
    const bool tie = !first && std::abs(model.sse - best) <= 1e-12 * std::max(1.0, std::abs(best));
    if (first || (model.sse < best && !tie)) {
      best = model.sse;
      out.k = k;
    } else if (tie && k < out.k) {
      out.k = k;
    }
  }
  out.caveat =
      "SSE does not increase with k, so the smallest-SSE rule favours the largest candidate; "
      "a fixed k is the default pipeline setting";
  return out;
}

}  // namespace corelate
