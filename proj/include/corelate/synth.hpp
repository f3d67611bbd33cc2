#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "corelate/community.hpp"
#include "corelate/error.hpp"
#include "corelate/ingest.hpp"
#include "corelate/random.hpp"
#include "corelate/taxonomy.hpp"

namespace corelate {

struct PlantedConfig {
  std::size_t n_communities = 5;
  std::size_t size_min = 8;
  std::size_t size_max = 12;
  std::size_t users_per_community = 100;
  double p_in = 0.6;
  double p_out = 0.02;
  // Dominant category names, assigned to communities round-robin. Empty means
  // the business second-level categories of the taxonomy in order.
  std::vector<std::string> categories;
  // Probability that a business gets a uniformly drawn off-dominant category.
  double noise_rate = 0.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_communities < 1) throw DomainError("planted: n_communities must be >= 1");
    if (size_min < 1 || size_max < size_min) throw DomainError("planted: invalid community_size_range");
    if (users_per_community < 1) throw DomainError("planted: users_per_community must be >= 1");
    if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0)) {
      throw DomainError("planted: need 0 <= p_out < p_in <= 1");
    }
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw DomainError("planted: noise_rate must be in [0, 1]");
  }

  static PlantedConfig from_json(const nlohmann::json& j) {
    PlantedConfig c;
    try {
      c.n_communities = j.value("n_communities", c.n_communities);
      if (j.contains("community_size_range")) {
        const auto r = j.at("community_size_range").get<std::vector<std::size_t>>();
        if (r.size() != 2) throw DomainError("planted: community_size_range must be [min, max]");
        c.size_min = r[0];
        c.size_max = r[1];
      }
      c.users_per_community = j.value("users_per_community", c.users_per_community);
      c.p_in = j.value("p_in", c.p_in);
      c.p_out = j.value("p_out", c.p_out);
      c.categories = j.value("categories", c.categories);
      c.noise_rate = j.value("noise_rate", c.noise_rate);
      c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("planted config: ") + e.what());
    }
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    return {{"n_communities", n_communities},
            {"community_size_range", {size_min, size_max}},
            {"users_per_community", users_per_community},
            {"p_in", p_in},
            {"p_out", p_out},
            {"categories", categories},
            {"noise_rate", noise_rate},
            {"seed", seed}};
  }
};

struct GroundTruth {
  std::map<std::string, std::size_t> partition;   // business -> planted community
  std::map<std::string, std::size_t> categories;  // business -> canonical category

  nlohmann::json to_json(const CategoryTaxonomy& taxonomy) const {
    nlohmann::json j = nlohmann::json::object();
    nlohmann::json part = nlohmann::json::object();
    for (const auto& [id, c] : partition) part[id] = c;
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [id, c] : categories) cats[id] = taxonomy.name(c);
    j["partition"] = part;
    j["categories"] = cats;
    return j;
  }

  static GroundTruth from_json(const nlohmann::json& j, const CategoryTaxonomy& taxonomy) {
    GroundTruth t;
    for (const auto& [id, c] : j.at("partition").items()) t.partition[id] = c.get<std::size_t>();
    if (j.contains("categories")) {
      for (const auto& [id, c] : j.at("categories").items()) {
        t.categories[id] = taxonomy.index_of(c.get<std::string>()).value_or(taxonomy.fallback());
      }
    }
    return t;
  }
};

struct SyntheticData {
  std::vector<Business> businesses;
  ReactionDataset reactions;
  GroundTruth truth;
};

namespace detail {

inline std::string padded(char prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, n);
  return buf;
}

inline std::string raw_path(const CategoryTaxonomy& taxonomy, std::size_t cat) {
  if (taxonomy.is_parent(cat)) return taxonomy.name(cat) + "/Synthetic Page";
  return "Businesses/" + taxonomy.name(cat) + "/Synthetic Venue";
}

}  // namespace detail

// Planted-partition reaction data: each community has its own user pool whose
// members react to their community's businesses with probability p_in and to
// every other business with probability p_out.
inline SyntheticData generate(const PlantedConfig& config,
                              const CategoryTaxonomy& taxonomy = CategoryTaxonomy::facebook()) {
  config.validate();
  std::vector<std::size_t> dominant;
  if (config.categories.empty()) {
    for (std::size_t i = 0; i < taxonomy.size(); ++i) {
      if (!taxonomy.is_parent(i)) dominant.push_back(i);
    }
    if (dominant.empty()) dominant.push_back(taxonomy.fallback());
  } else {
    for (const auto& name : config.categories) {
      const auto idx = taxonomy.index_of(name);
      if (!idx) throw DomainError("planted: unknown category '" + name + "'");
      dominant.push_back(*idx);
    }
  }

  Rng rng(config.seed);
  SyntheticData out;
  std::vector<std::size_t> community_of;
  for (std::size_t c = 0; c < config.n_communities; ++c) {
    const auto size = config.size_min + uniform_index(rng, config.size_max - config.size_min + 1);
    const auto dom = dominant[c % dominant.size()];
    for (std::size_t k = 0; k < size; ++k) {
      const auto n = out.businesses.size();
      auto cat = dom;
      if (taxonomy.size() > 1 && bernoulli(rng, config.noise_rate)) {
        cat = uniform_index(rng, taxonomy.size() - 1);
        if (cat >= dom) ++cat;
      }
      Business b;
      b.id = detail::padded('b', n, 5);
      b.name = "Synthetic Business " + std::to_string(n);
      b.latitude = -25.43 + 0.1 * (uniform01(rng) - 0.5);
      b.longitude = -49.27 + 0.1 * (uniform01(rng) - 0.5);
      b.raw_category = detail::raw_path(taxonomy, cat);
      b.checkins = uniform_index(rng, 50000);
      b.fans = uniform_index(rng, 20000);
      b.avg_rating = static_cast<double>(30 + uniform_index(rng, 21)) / 10.0;
      out.truth.partition[b.id] = c;
      out.truth.categories[b.id] = cat;
      community_of.push_back(c);
      out.businesses.push_back(std::move(b));
    }
  }

  std::vector<Reaction> reactions;
  std::size_t user = 0;
  for (std::size_t c = 0; c < config.n_communities; ++c) {
    for (std::size_t u = 0; u < config.users_per_community; ++u, ++user) {
      const auto uid = detail::padded('u', user, 7);
      for (std::size_t b = 0; b < out.businesses.size(); ++b) {
        const double p = community_of[b] == c ? config.p_in : config.p_out;
        if (bernoulli(rng, p)) reactions.push_back({uid, out.businesses[b].id, ReactionType::Like});
      }
    }
  }
  out.reactions = ReactionDataset(std::move(reactions));
  return out;
}

// Null model: every user reacts to `reactions_per_user` distinct businesses
// drawn uniformly.
inline ReactionDataset generate_uniform_noise(std::size_t n_businesses, std::size_t n_users,
                                              std::size_t reactions_per_user, std::uint64_t seed) {
  if (n_businesses < 1 || n_users < 1 || reactions_per_user < 1) {
    throw DomainError("uniform noise: arguments must be positive");
  }
  if (reactions_per_user > n_businesses) throw DomainError("uniform noise: reactions_per_user > n_businesses");
  Rng rng(seed);
  std::vector<std::string> ids;
  for (std::size_t b = 0; b < n_businesses; ++b) ids.push_back(detail::padded('b', b, 5));
  std::vector<std::size_t> pool(n_businesses);
  std::vector<Reaction> reactions;
  reactions.reserve(n_users * reactions_per_user);
  for (std::size_t u = 0; u < n_users; ++u) {
    const auto uid = detail::padded('u', u, 7);
    for (std::size_t i = 0; i < n_businesses; ++i) pool[i] = i;
    for (std::size_t i = 0; i < reactions_per_user; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_index(rng, n_businesses - i));
      std::swap(pool[i], pool[j]);
      reactions.push_back({uid, ids[pool[i]], ReactionType::Like});
    }
  }
  return ReactionDataset(std::move(reactions));
}

struct PartitionScore {
  double ari = 0.0;
  double nmi = 0.0;
  double unassigned_fraction = 0.0;
  std::size_t compared = 0;  // businesses labelled by both sides
};

// ARI and arithmetic-mean NMI between two labelings of the same items.
inline std::pair<double, double> compare_labelings(const std::vector<std::size_t>& x,
                                                   const std::vector<std::size_t>& y) {
  if (x.size() != y.size()) throw DomainError("compare_labelings: length mismatch");
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return {1.0, 1.0};
  std::map<std::pair<std::size_t, std::size_t>, double> cell;
  std::map<std::size_t, double> rows;
  std::map<std::size_t, double> cols;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cell[{x[i], y[i]}] += 1;
    rows[x[i]] += 1;
    cols[y[i]] += 1;
  }
  auto comb2 = [](double v) { return v * (v - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [k, v] : cell) index += comb2(v);
  double a = 0.0;
  double b = 0.0;
  for (const auto& [k, v] : rows) a += comb2(v);
  for (const auto& [k, v] : cols) b += comb2(v);
  const double expected = a * b / comb2(n);
  const double max_index = (a + b) / 2.0;
  const double ari = max_index == expected ? 1.0 : (index - expected) / (max_index - expected);

  double mi = 0.0;
  for (const auto& [k, v] : cell) mi += (v / n) * std::log(v * n / (rows[k.first] * cols[k.second]));
  auto entropy = [n](const std::map<std::size_t, double>& m) {
    double h = 0.0;
    for (const auto& [k, v] : m) h -= (v / n) * std::log(v / n);
    return h;
  };
  const double hx = entropy(rows);
  const double hy = entropy(cols);
  double nmi = 1.0;
  if (hx > 0.0 || hy > 0.0) nmi = std::clamp(mi / ((hx + hy) / 2.0), 0.0, 1.0);
  if ((hx == 0.0) != (hy == 0.0)) nmi = 0.0;
  return {ari, nmi};
}

inline PartitionScore score_partition(const std::vector<Community>& found, const GroundTruth& truth) {
  std::map<std::string, std::size_t> label;
  for (std::size_t c = 0; c < found.size(); ++c) {
    for (const auto& id : found[c].members) {
      if (!label.emplace(id, c).second) throw DomainError("score_partition: communities overlap at '" + id + "'");
    }
  }
  std::vector<std::size_t> x;
  std::vector<std::size_t> y;
  std::size_t unassigned = 0;
  for (const auto& [id, t] : truth.partition) {
    const auto it = label.find(id);
    if (it == label.end()) {
      ++unassigned;
      continue;
    }
    x.push_back(it->second);
    y.push_back(t);
  }
  PartitionScore s;
  s.compared = x.size();
  s.unassigned_fraction =
      truth.partition.empty() ? 0.0 : static_cast<double>(unassigned) / static_cast<double>(truth.partition.size());
  if (!x.empty()) std::tie(s.ari, s.nmi) = compare_labelings(x, y);
  return s;
}

}  // namespace corelate
