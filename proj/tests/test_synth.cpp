#include <gtest/gtest.h>

#include "corelate.hpp"
#include "oracles.hpp"

using namespace corelate;

namespace {

std::string csv_of(const SyntheticData& d) {
  std::ostringstream s;
  write_businesses_csv(s, d.businesses);
  write_reactions_csv(s, d.reactions);
  return s.str();
}

}  // namespace

TEST(Planted, DeterministicPerSeed) {
  PlantedConfig c;
  c.seed = 42;
  EXPECT_EQ(csv_of(generate(c)), csv_of(generate(c)));
  c.seed = 43;
  PlantedConfig c2;
  c2.seed = 42;
  EXPECT_NE(csv_of(generate(c)), csv_of(generate(c2)));
}

TEST(Planted, TruthCoversAllBusinesses) {
  PlantedConfig c;
  const auto d = generate(c);
  EXPECT_EQ(d.truth.partition.size(), d.businesses.size());
  for (const auto& b : d.businesses) {
    EXPECT_TRUE(d.truth.partition.contains(b.id));
    EXPECT_EQ(CategoryTaxonomy::facebook().flatten(b.raw_category), d.truth.categories.at(b.id));
  }
  std::map<std::size_t, std::size_t> sizes;
  for (const auto& [id, k] : d.truth.partition) ++sizes[k];
  EXPECT_EQ(sizes.size(), c.n_communities);
  for (const auto& [k, n] : sizes) {
    EXPECT_GE(n, c.size_min);
    EXPECT_LE(n, c.size_max);
  }
}

TEST(Planted, NoOutsideReactionsMeansNoInterCommunityPairs) {
  PlantedConfig c;
  c.p_out = 0.0;
  const auto d = generate(c);
  const auto pc = count_common(d.reactions);
  for (const auto& e : pc.entries) {
    EXPECT_EQ(d.truth.partition.at(pc.ids[e.a]), d.truth.partition.at(pc.ids[e.b]));
  }
}

TEST(Planted, FullInsideReactionsShareAllUsers) {
  PlantedConfig c;
  c.n_communities = 3;
  c.size_min = c.size_max = 6;
  c.p_in = 1.0;
  c.p_out = 0.0;
  const auto d = generate(c);
  const auto pc = count_common(d.reactions);
  EXPECT_EQ(pc.size(), 3u * 15u);
  for (const auto& e : pc.entries) EXPECT_EQ(e.count, c.users_per_community);
}

TEST(Planted, MeanIntraPairCountNearAnalyticExpectation) {
  PlantedConfig c;
  c.users_per_community = 60;
  c.p_in = 0.5;
  c.p_out = 0.0;
  std::vector<double> means;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    c.seed = seed;
    const auto d = generate(c);
    const auto pc = count_common(d.reactions);
    double s = 0;
    std::size_t n = 0;
    std::map<std::size_t, std::size_t> sizes;
    for (const auto& [id, k] : d.truth.partition) ++sizes[k];
    for (const auto& [k, m] : sizes) n += m * (m - 1) / 2;
    for (const auto& e : pc.entries) s += static_cast<double>(e.count);
    means.push_back(s / static_cast<double>(n));
  }
  double mean = 0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(means.size());
  double var = 0;
  for (double m : means) var += (m - mean) * (m - mean);
  const double se = std::sqrt(var / static_cast<double>(means.size() - 1) / static_cast<double>(means.size()));
  EXPECT_NEAR(mean, 60 * 0.25, 3 * se + 1e-9);
}

TEST(Planted, NoiseRateOffCategory) {
  PlantedConfig c;
  c.noise_rate = 1.0;
  c.categories = {"Food & Beverage"};
  const auto d = generate(c);
  const auto tax = CategoryTaxonomy::facebook();
  for (const auto& [id, cat] : d.truth.categories) EXPECT_NE(cat, *tax.index_of("Food & Beverage"));
}

TEST(Planted, InvalidConfigIsDomainError) {
  PlantedConfig c;
  c.p_out = 0.7;
  EXPECT_THROW(generate(c), DomainError);
  c = {};
  c.p_in = 1.2;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.size_min = 5;
  c.size_max = 4;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.categories = {"Not A Category"};
  EXPECT_THROW(generate(c), DomainError);
}

TEST(Planted, JsonRoundTrip) {
  PlantedConfig c;
  c.n_communities = 7;
  c.size_min = 4;
  c.size_max = 9;
  c.categories = {"Media"};
  c.seed = 5;
  const auto j = c.to_json();
  EXPECT_EQ(PlantedConfig::from_json(j).to_json(), j);
  const auto tax = CategoryTaxonomy::facebook();
  const auto d = generate(c, tax);
  const auto truth = GroundTruth::from_json(d.truth.to_json(tax), tax);
  EXPECT_EQ(truth.partition, d.truth.partition);
  EXPECT_EQ(truth.categories, d.truth.categories);
}

TEST(UniformNoise, SingleUserSingleBusiness) {
  const auto d = generate_uniform_noise(1, 1, 1, 3);
  ASSERT_EQ(d.size(), 1u);
}

TEST(UniformNoise, DistinctBusinessesPerUser) {
  const auto d = generate_uniform_noise(30, 100, 12, 9);
  EXPECT_EQ(d.size(), 1200u);
  for (const auto& [u, bs] : d.user_index()) EXPECT_EQ(bs.size(), 12u);
  EXPECT_THROW(generate_uniform_noise(5, 10, 6, 1), DomainError);
  EXPECT_THROW(generate_uniform_noise(0, 10, 1, 1), DomainError);
}

TEST(UniformNoise, MeanPairCountMatchesNullModel) {
  // every pair's expected count is n_users * C(r,2) / C(n_b,2) = mu
  const std::size_t nb = 40, users = 300, r = 6;
  double mean_of_means = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto d = generate_uniform_noise(nb, users, r, s);
    const auto pc = count_common(d);
    const auto stats = random_edge_stats(pc.total(), nb);
    double sum = 0;
    for (const auto& e : pc.entries) sum += static_cast<double>(e.count);
    EXPECT_DOUBLE_EQ(sum / static_cast<double>(stats.n_c), stats.mu);
    mean_of_means += stats.mu;
  }
  mean_of_means /= seeds;
  const double mu = users * (r * (r - 1) / 2.0) / (nb * (nb - 1) / 2.0);
  EXPECT_DOUBLE_EQ(mean_of_means, mu);

  // a single fixed pair, averaged over seeds
  std::vector<double> counts;
  for (int s = 0; s < 200; ++s) counts.push_back(static_cast<double>(count_common(generate_uniform_noise(nb, users, r, 1000 + s)).count("b00000", "b00001")));
  double m = 0, v = 0;
  for (double c : counts) m += c;
  m /= static_cast<double>(counts.size());
  for (double c : counts) v += (c - m) * (c - m);
  const double se = std::sqrt(v / static_cast<double>(counts.size() - 1) / static_cast<double>(counts.size()));
  EXPECT_NEAR(m, mu, 3.5 * se);
}

TEST(Scores, IdenticalPartitions) {
  const std::vector<std::size_t> x{0, 0, 1, 1, 2, 2, 2};
  const auto [ari, nmi] = compare_labelings(x, x);
  EXPECT_DOUBLE_EQ(ari, 1.0);
  EXPECT_NEAR(nmi, 1.0, 1e-12);
}

TEST(Scores, OneGiantCommunityGivesZeroAri) {
  const std::vector<std::size_t> truth{0, 0, 0, 1, 1, 1, 2, 2, 2};
  const std::vector<std::size_t> giant(9, 0);
  const auto [ari, nmi] = compare_labelings(giant, truth);
  EXPECT_NEAR(ari, 0.0, 1e-12);
  EXPECT_NEAR(nmi, 0.0, 1e-12);
}

TEST(ScoresProperty, SymmetricPermutationInvariantAndMatchesPairOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<std::size_t> x(n), y(n);
    for (auto& v : x) v = rng() % 5;
    for (auto& v : y) v = rng() % 4;
    const auto [ari, nmi] = compare_labelings(x, y);
    EXPECT_NEAR(ari, oracle::adjusted_rand(x, y), 1e-9);
    const auto [ari2, nmi2] = compare_labelings(y, x);
    EXPECT_NEAR(ari, ari2, 1e-12);
    EXPECT_NEAR(nmi, nmi2, 1e-12);
    EXPECT_GE(nmi, 0.0);
    EXPECT_LE(nmi, 1.0);
    EXPECT_GE(ari, -1.0);
    EXPECT_LE(ari, 1.0 + 1e-12);
    std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    std::vector<std::size_t> xp(n);
    for (std::size_t i = 0; i < n; ++i) xp[i] = perm[x[i]] + 10;
    const auto [ari3, nmi3] = compare_labelings(xp, y);
    EXPECT_NEAR(ari, ari3, 1e-12);
    EXPECT_NEAR(nmi, nmi3, 1e-12);
  }
}

TEST(ScorePartition, ExactAndUnassigned) {
  PlantedConfig c;
  const auto d = generate(c);
  std::map<std::size_t, Community> by;
  for (const auto& [id, k] : d.truth.partition) by[k].members.push_back(id);
  std::vector<Community> found;
  for (auto& [k, com] : by) found.push_back(com);
  const auto s = score_partition(found, d.truth);
  EXPECT_DOUBLE_EQ(s.ari, 1.0);
  EXPECT_NEAR(s.nmi, 1.0, 1e-12);
  EXPECT_EQ(s.unassigned_fraction, 0.0);

  found.pop_back();
  const auto partial = score_partition(found, d.truth);
  EXPECT_GT(partial.unassigned_fraction, 0.0);
  EXPECT_DOUBLE_EQ(partial.ari, 1.0);

  found.push_back(found.front());
  EXPECT_THROW(score_partition(found, d.truth), DomainError);
}
