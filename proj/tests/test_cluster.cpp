#include <gtest/gtest.h>

#include "corelate.hpp"
#include "oracles.hpp"

using namespace corelate;

namespace {

const CategoryTaxonomy& fb() {
  static const auto t = CategoryTaxonomy::facebook();
  return t;
}

std::size_t idx(const std::string& name) { return *fb().index_of(name); }

Business biz(const std::string& id, const std::string& category) {
  Business b;
  b.id = id;
  b.name = id;
  b.latitude = 0.0;
  b.longitude = 0.0;
  b.raw_category = category;
  return b;
}

CategoryVector vec(std::initializer_list<double> xs) { return CategoryVector(std::vector<double>(xs)); }

// Best SSE over every assignment of the points to two non-empty groups.
double exhaustive_two_means(const std::vector<CategoryVector>& xs, std::vector<std::size_t>& best_assignment) {
  const std::size_t n = xs.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask + 1 < (1ull << n); ++mask) {
    std::vector<std::size_t> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = (mask >> i) & 1;
    double s = 0;
    for (std::size_t c = 0; c < 2; ++c) {
      std::vector<CategoryVector> m;
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == c) m.push_back(xs[i]);
      }
      const auto mu = centroid(m);
      for (const auto& x : m) s += squared_distance(x, mu);
    }
    if (s < best) {
      best = s;
      best_assignment = a;
    }
  }
  return best;
}

std::vector<CategoryVector> two_groups(std::mt19937_64& rng, std::size_t per_group) {
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<CategoryVector> xs;
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t i = 0; i < per_group; ++i) {
      CategoryVector v(28);
      for (std::size_t d = 0; d < 28; ++d) v[d] = noise(rng);
      v[g] += 10.0;
      xs.push_back(v);
    }
  }
  return xs;
}

}  // namespace

TEST(Taxonomy, HasTwentyEightCanonicalNames) {
  EXPECT_EQ(fb().size(), 28u);
  std::size_t parents = 0;
  for (std::size_t i = 0; i < fb().size(); ++i) parents += fb().is_parent(i);
  EXPECT_EQ(parents, 6u);
  EXPECT_EQ(fb().name(fb().fallback()), "Other");
}

TEST(Taxonomy, FlattenExamples) {
  EXPECT_EQ(flatten_category("Interest/Some Subinterest", fb()), idx("Interest"));
  EXPECT_EQ(flatten_category("Business/Advertising or Marketing/Advertising Agency", fb()),
            idx("Advertising or Marketing"));
  EXPECT_EQ(flatten_category("Businesses/Advertising or Marketing/Copywriting Service", fb()),
            idx("Advertising or Marketing"));
  EXPECT_EQ(flatten_category("UnknownRoot/Foo", fb()), fb().fallback());
}

TEST(Taxonomy, FlattenEdgeCases) {
  EXPECT_EQ(flatten_category("", fb()), fb().fallback());
  EXPECT_EQ(flatten_category("Business", fb()), fb().fallback());
  EXPECT_EQ(flatten_category("Business/Unknown Sub", fb()), fb().fallback());
  EXPECT_EQ(flatten_category("Business/Interest", fb()), fb().fallback());
  EXPECT_EQ(flatten_category(" Media / TV Show ", fb()), idx("Media"));
  EXPECT_EQ(flatten_category("business/food and beverage/bakery", fb()), idx("Food & Beverage"));
  EXPECT_EQ(flatten_category("Seafood Restaurant", fb()), idx("Food & Beverage"));
  EXPECT_EQ(flatten_category("Health Plan", fb()), idx("Medical & Health"));
  EXPECT_EQ(flatten_category("Non-Business Places/Square", fb()), idx("Non-Business Places"));
}

TEST(Taxonomy, KeyIgnoresCaseConnectivesAndPunctuation) {
  EXPECT_EQ(CategoryTaxonomy::key("Food & Beverage"), CategoryTaxonomy::key("food and beverage"));
  EXPECT_EQ(CategoryTaxonomy::key("Advertising or Marketing"), CategoryTaxonomy::key("Advertising/Marketing"));
  EXPECT_EQ(CategoryTaxonomy::key("Non-Business Places"), CategoryTaxonomy::key("NonBusiness Places"));
}

TEST(Taxonomy, JsonRoundTripAndShippedFile) {
  const auto again = CategoryTaxonomy::from_json(fb().to_json());
  EXPECT_EQ(again.canonical(), fb().canonical());
  EXPECT_EQ(again.flatten("Tour Agency"), fb().flatten("Tour Agency"));
  const auto shipped = CategoryTaxonomy::load(CORELATE_SOURCE_DIR "/data/taxonomy.json");
  EXPECT_EQ(shipped.canonical(), fb().canonical());
  EXPECT_EQ(shipped.to_json(), fb().to_json());
}

TEST(Taxonomy, RejectsBrokenDefinitions) {
  EXPECT_THROW(CategoryTaxonomy({"A", "a"}, {}, {"Business"}, "A"), DomainError);
  EXPECT_THROW(CategoryTaxonomy({"A"}, {"B"}, {"Business"}, "A"), DomainError);
  EXPECT_THROW(CategoryTaxonomy({"A"}, {}, {"Business"}, "Z"), DomainError);
  EXPECT_THROW(CategoryTaxonomy::from_json(nlohmann::json::object()), InputError);
}

TEST(TaxonomyProperty, FlattenIsTotalAndStable) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> parts{"Business", "Interest", "Food & Beverage", "x", "", "Media", "Other", "??"};
  for (int i = 0; i < 2000; ++i) {
    std::string path;
    const int depth = static_cast<int>(rng() % 4);
    for (int d = 0; d < depth; ++d) path += (d ? "/" : "") + parts[rng() % parts.size()];
    const auto a = fb().flatten(path);
    EXPECT_LT(a, fb().size());
    EXPECT_EQ(a, fb().flatten(path));
  }
}

TEST(CommunityVector, SingleCategory) {
  BusinessMap bm;
  Community c;
  for (int i = 0; i < 4; ++i) {
    const auto id = "r" + std::to_string(i);
    bm.emplace(id, biz(id, "Business/Food & Beverage/Restaurant"));
    c.members.push_back(id);
  }
  const auto v = community_vector(c, bm, fb());
  EXPECT_EQ(v.size(), 28u);
  for (std::size_t i = 0; i < 28; ++i) EXPECT_EQ(v[i], i == idx("Food & Beverage") ? 1.0 : 0.0);
}

TEST(CommunityVector, DividesByMaximum) {
  BusinessMap bm;
  Community c;
  auto add = [&](const std::string& cat, int n) {
    for (int i = 0; i < n; ++i) {
      const auto id = cat + std::to_string(i);
      bm.emplace(id, biz(id, cat));
      c.members.push_back(id);
    }
  };
  add("Business/Food & Beverage", 6);
  add("Business/Shopping & Retail", 3);
  add("Media", 1);
  const auto v = community_vector(c, bm, fb());
  EXPECT_DOUBLE_EQ(v[idx("Food & Beverage")], 1.0);
  EXPECT_DOUBLE_EQ(v[idx("Shopping & Retail")], 0.5);
  EXPECT_NEAR(v[idx("Media")], 1.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(v.max(), 1.0);
}

TEST(CommunityVector, ScaleInvariant) {
  EXPECT_EQ(max_normalized(vec({2, 1, 0})), max_normalized(vec({4, 2, 0})));
  EXPECT_EQ(max_normalized(vec({0, 0})), vec({0, 0}));
}

TEST(CommunityVector, UnknownMemberIsDataError) {
  Community c;
  c.members = {"ghost"};
  try {
    community_vector(c, {}, fb());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(CommunityVectors, PerFeatureAlternative) {
  const auto out = per_feature_normalized({vec({2, 1}), vec({4, 0})});
  EXPECT_EQ(out[0], vec({0.5, 1.0}));
  EXPECT_EQ(out[1], vec({1.0, 0.0}));
  EXPECT_EQ(parse_normalization("per_feature"), Normalization::PerFeatureMax);
  EXPECT_THROW(parse_normalization("zscore"), UsageError);
}

TEST(KMeans, IdenticalVectorsOneCluster) {
  const std::vector<CategoryVector> xs(5, vec({0.3, 1.0, 0.0}));
  const auto m = kmeans(xs, 1, 0);
  EXPECT_EQ(m.assignment, std::vector<std::size_t>(5, 0));
  EXPECT_EQ(m.sse, 0.0);
}

TEST(KMeans, TwoSeparatedGroupsMatchExhaustiveOptimum) {
  std::mt19937_64 rng(12);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto xs = two_groups(rng, 6);
    std::vector<std::size_t> best;
    const double opt = exhaustive_two_means(xs, best);
    const auto m = kmeans(xs, 2, seed);
    EXPECT_NEAR(m.sse, opt, 1e-9);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      EXPECT_EQ(m.assignment[i] == m.assignment[0], best[i] == best[0]);
    }
  }
}

TEST(KMeans, EquidistantPointGoesToLowestCentroid) {
  // centroids start at two of the three points; the middle one is equidistant
  const std::vector<CategoryVector> xs{vec({0.0}), vec({2.0}), vec({1.0})};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = kmeans(xs, 2, seed, 1);
    if (m.centroids.size() == 2 && squared_distance(xs[2], m.centroids[0]) == squared_distance(xs[2], m.centroids[1])) {
      EXPECT_EQ(m.assignment[2], 0u);
    }
  }
}

TEST(KMeans, DomainErrors) {
  const std::vector<CategoryVector> xs(3, vec({1.0}));
  EXPECT_THROW(kmeans(xs, 4, 0), DomainError);
  EXPECT_THROW(kmeans(xs, 0, 0), DomainError);
  EXPECT_THROW(kmeans({vec({1.0}), vec({1.0, 2.0})}, 1, 0), DomainError);
}

TEST(KMeansProperty, DisjointNonEmptyAndSseNonIncreasing) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<CategoryVector> xs;
    for (std::size_t i = 0; i < n; ++i) {
      CategoryVector v(28);
      for (std::size_t d = 0; d < 28; ++d) v[d] = (rng() % 3 == 0) ? std::round(u(rng) * 4) / 4 : 0.0;
      xs.push_back(v);
    }
    // duplicates stress the empty-cluster repair
    if (n > 3) xs[1] = xs[0] = xs[2];
    const std::size_t k = 1 + rng() % n;
    const auto m = kmeans(xs, k, trial);
    ASSERT_EQ(m.assignment.size(), n);
    const auto members = m.members();
    std::size_t total = 0;
    for (const auto& mem : members) {
      EXPECT_FALSE(mem.empty());
      total += mem.size();
    }
    EXPECT_EQ(total, n);
    for (std::size_t i = 1; i < m.sse_trace.size(); ++i) EXPECT_LE(m.sse_trace[i], m.sse_trace[i - 1] + 1e-9);
    EXPECT_EQ(kmeans(xs, k, trial).assignment, m.assignment);
  }
}

TEST(SelectK, SingleCandidate) {
  const std::vector<CategoryVector> xs{vec({1.0}), vec({0.0})};
  EXPECT_EQ(select_k(xs, {1}, 0).k, 1u);
}

TEST(SelectK, TieGoesToSmallerK) {
  const std::vector<CategoryVector> xs(8, vec({1.0, 0.5}));
  const auto s = select_k(xs, {2, 1}, 0);
  EXPECT_EQ(s.k, 1u);
  ASSERT_EQ(s.sse_table.size(), 2u);
  EXPECT_EQ(s.sse_table[0].second, 0.0);
  EXPECT_EQ(s.sse_table[1].second, 0.0);
  EXPECT_FALSE(s.caveat.empty());
}

TEST(SelectK, SeparatedGroupsPreferTwo) {
  std::mt19937_64 rng(2);
  const auto xs = two_groups(rng, 5);
  const auto s = select_k(xs, {1, 2}, 0);
  EXPECT_EQ(s.k, 2u);
  EXPECT_LT(s.sse_table[1].second, s.sse_table[0].second);
  EXPECT_THROW(select_k(xs, {}, 0), DomainError);
}
