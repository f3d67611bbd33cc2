#pragma once

#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "corelate/cluster.hpp"
#include "corelate/community.hpp"
#include "corelate/error.hpp"
#include "corelate/taxonomy.hpp"

namespace corelate {

// Component-wise mean.
inline CategoryVector centroid(std::span<const CategoryVector> members) {
  if (members.empty()) throw DomainError("centroid of an empty cluster");
  CategoryVector out(members.front().size());
  for (const auto& v : members) {
    if (v.size() != out.size()) throw DomainError("centroid: vectors differ in dimension");
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
  }
  for (auto& x : out.values) x /= static_cast<double>(members.size());
  return out;
}

struct Signature {
  std::set<std::size_t> categories;
  double threshold = 0.7;

  bool contains(std::size_t i) const { return categories.contains(i); }
};

// Greedy dominant-category set: repeatedly takes the largest remaining
// component while doing so brings the covered share of the total closer to
// `threshold`, and stops at the first step that does not. Equal maxima are
// taken lowest index first.
inline Signature get_signature(CategoryVector v, double threshold) {
  if (!(threshold > 0.5 && threshold <= 1.0)) {
    throw DomainError("signature threshold must be in (0.5, 1], got " + std::to_string(threshold));
  }
  const double s = v.sum();
  if (!(s > 0.0)) throw DomainError("signature of an all-zero vector");
  Signature sig;
  sig.threshold = threshold;
  double acc = 0.0;
  for (std::size_t step = 0; step < v.size(); ++step) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[j]) j = i;
    }
    const double m = v[j];
    if (std::abs((m + acc) / s - threshold) < std::abs(acc / s - threshold)) {
      sig.categories.insert(j);
      acc += m;
      v[j] = 0.0;
    } else {
      break;
    }
  }
  return sig;
}

struct TaggedCommunity {
  Community community;
  std::size_t cluster = 0;
  std::map<std::string, std::size_t> tags;  // business id -> offending category
};

struct TaggingResult {
  std::vector<Signature> signatures;  // per cluster
  std::vector<CategoryVector> centroids;
  std::vector<TaggedCommunity> communities;  // same order as the input
};

// For every cluster, builds the signature of the mean member vector and tags
// each member community's businesses whose category has a positive component
// in the community vector but is outside the signature.
inline TaggingResult tag_outliers(const ClusterModel& model, const std::vector<Community>& communities,
                                  const std::vector<CategoryVector>& vectors, const BusinessMap& businesses,
                                  const CategoryTaxonomy& taxonomy, double threshold = 0.7) {
  if (communities.size() != vectors.size() || model.assignment.size() != communities.size()) {
    throw DomainError("tag_outliers: communities, vectors and cluster assignment differ in length");
  }
  TaggingResult out;
  const auto members = model.members();
  for (std::size_t cl = 0; cl < model.k; ++cl) {
    std::vector<CategoryVector> vs;
    for (auto i : members[cl]) vs.push_back(vectors[i]);
    if (vs.empty()) throw DomainError("tag_outliers: cluster " + std::to_string(cl) + " is empty");
    out.centroids.push_back(centroid(vs));
    out.signatures.push_back(get_signature(out.centroids.back(), threshold));
  }
  for (std::size_t i = 0; i < communities.size(); ++i) {
    TaggedCommunity tc;
    tc.community = communities[i];
    tc.cluster = model.assignment[i];
    const auto& sig = out.signatures[tc.cluster];
    std::set<std::size_t> offending;
    for (std::size_t d = 0; d < vectors[i].size(); ++d) {
      if (vectors[i][d] > 0.0 && !sig.contains(d)) offending.insert(d);
    }
    if (!offending.empty()) {
      for (const auto& id : tc.community.members) {
        const auto it = businesses.find(id);
        if (it == businesses.end()) throw DataError("community member '" + id + "' has no business record");
        const auto cat = taxonomy.flatten(it->second.raw_category);
        if (offending.contains(cat)) tc.tags.emplace(id, cat);
      }
    }
    out.communities.push_back(std::move(tc));
  }
  return out;
}

}  // namespace corelate
