#include <sstream>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/graphml.hpp>
#include <boost/graph/graphviz.hpp>
#include <gtest/gtest.h>

#include "corelate.hpp"
#include "oracles.hpp"

using namespace corelate;

namespace {

struct VProp {
  std::string name;
  std::string label;
};
struct EProp {
  double weight = 0.0;
  long common_users = 0;
};
using BGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS, VProp, EProp>;

BGraph parse_dot(const std::string& text) {
  BGraph g;
  boost::dynamic_properties dp(boost::ignore_other_properties);
  dp.property("node_id", boost::get(&VProp::name, g));
  dp.property("label", boost::get(&VProp::label, g));
  dp.property("weight", boost::get(&EProp::weight, g));
  dp.property("common_users", boost::get(&EProp::common_users, g));
  std::istringstream in(text);
  if (!boost::read_graphviz(in, g, dp, "node_id")) throw std::runtime_error("dot parse failed");
  return g;
}

BGraph parse_graphml(const std::string& text) {
  BGraph g;
  boost::dynamic_properties dp(boost::ignore_other_properties);
  dp.property("name", boost::get(&VProp::name, g));
  dp.property("weight", boost::get(&EProp::weight, g));
  dp.property("common_users", boost::get(&EProp::common_users, g));
  std::istringstream in(text);
  boost::read_graphml(in, g, dp);
  return g;
}

BusinessGraph sample() {
  BusinessGraph g({"a", "b \"q\"", "c&d"});
  g.set_edge("a", "b \"q\"", {7, 0.35});
  g.set_edge("a", "c&d", {3, 1.0 / 3.0});
  return g;
}

}  // namespace

TEST(GraphFormat, FromPathAndTag) {
  EXPECT_EQ(io::graph_format_from_path("x/graph.graphml"), io::GraphFormat::GraphML);
  EXPECT_EQ(io::graph_format_from_path("e.dot"), io::GraphFormat::Dot);
  EXPECT_THROW(io::graph_format_from_path("e.png"), UsageError);
  EXPECT_THROW(io::graph_format_from_path("noext"), UsageError);
  EXPECT_THROW(io::parse_graph_format("gexf"), UsageError);
}

TEST(Dot, ThreeNodeEgonetParses) {
  const auto ego = extract_egonet(sample(), "a");
  std::ostringstream out;
  io::write_dot(out, ego.subgraph, {{"a", "Alpha"}});
  const auto g = parse_dot(out.str());
  EXPECT_EQ(boost::num_vertices(g), 3u);
  EXPECT_EQ(boost::num_edges(g), 2u);
  std::map<std::string, std::string> labels;
  for (auto v : boost::make_iterator_range(boost::vertices(g))) labels[g[v].name] = g[v].label;
  EXPECT_EQ(labels.at("a"), "Alpha");
  EXPECT_TRUE(labels.contains("b \"q\""));
  std::set<long> commons;
  for (auto e : boost::make_iterator_range(boost::edges(g))) commons.insert(g[e].common_users);
  EXPECT_EQ(commons, (std::set<long>{3, 7}));
}

TEST(GraphML, ParsesWithAttributes) {
  std::ostringstream out;
  io::write_graphml(out, sample(), {{"c&d", "C <and> D"}});
  const auto g = parse_graphml(out.str());
  EXPECT_EQ(boost::num_vertices(g), 3u);
  EXPECT_EQ(boost::num_edges(g), 2u);
  double total = 0;
  for (auto e : boost::make_iterator_range(boost::edges(g))) total += g[e].weight;
  EXPECT_DOUBLE_EQ(total, 0.35 + 1.0 / 3.0);
  bool found = false;
  for (auto v : boost::make_iterator_range(boost::vertices(g))) found = found || g[v].name == "C <and> D";
  EXPECT_TRUE(found);
}

TEST(GraphML, EdgelessGraphHasNodesOnly) {
  std::ostringstream out;
  io::write_graphml(out, BusinessGraph({"x", "y"}));
  EXPECT_EQ(out.str().find("<edge"), std::string::npos);
  const auto g = parse_graphml(out.str());
  EXPECT_EQ(boost::num_vertices(g), 2u);
  EXPECT_EQ(boost::num_edges(g), 0u);
}

TEST(GraphJson, RoundTripIsExact) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = fixture::random_graph(rng, 20, 0.3);
    const auto j = io::graph_to_json(g);
    EXPECT_EQ(io::graph_from_json(j), g);
    EXPECT_EQ(io::graph_from_json(nlohmann::json::parse(j.dump())), g);
  }
}

TEST(GraphJson, RejectsBadInput) {
  EXPECT_THROW(io::graph_from_json(nlohmann::json{{"nodes", {"a"}}}), InputError);
  const nlohmann::json bad_weight = {{"nodes", {"a", "b"}}, {"edges", {{{"a", "a"}, {"b", "b"}, {"common", 1}, {"weight", 0.0}}}}};
  EXPECT_THROW(io::graph_from_json(bad_weight), InputError);
  const nlohmann::json dangling = {{"nodes", {"a"}}, {"edges", {{{"a", "a"}, {"b", "z"}, {"common", 1}, {"weight", 0.5}}}}};
  EXPECT_THROW(io::graph_from_json(dangling), InputError);
}

TEST(Export, SameGraphTwiceIsByteIdentical) {
  std::mt19937_64 rng(10);
  const auto g = fixture::random_graph(rng, 25, 0.2);
  // same content inserted in a different order
  BusinessGraph h(std::vector<std::string>(g.ids().rbegin(), g.ids().rend()));
  auto edges = g.edges();
  std::reverse(edges.begin(), edges.end());
  for (const auto& e : edges) h.set_edge(g.id(e.a), g.id(e.b), e.data);
  for (auto f : {io::GraphFormat::GraphML, io::GraphFormat::Dot, io::GraphFormat::Json}) {
    std::ostringstream a, b;
    io::write_graph(a, g, f);
    io::write_graph(b, h, f);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(CommunitiesJson, RoundTrip) {
  std::vector<Community> cs{{0, {"a", "b", "c"}, 1}, {1, {"d", "e"}, 3}};
  EXPECT_EQ(io::communities_from_json(io::communities_to_json(cs)), cs);
  EXPECT_THROW(io::communities_from_json(nlohmann::json::parse(R"([{"id":0,"members":[]}])")), InputError);
}

TEST(ClustersJson, RoundTripKeepsModel) {
  const auto tax = CategoryTaxonomy::facebook();
  ClusterModel m;
  m.k = 2;
  m.assignment = {1, 0, 1};
  m.centroids = {CategoryVector(std::vector<double>(28, 0.5)), CategoryVector(std::vector<double>(28, 0.25))};
  std::vector<CategoryVector> vs(3, CategoryVector(std::vector<double>(28, 1.0)));
  std::vector<Community> cs{{4, {"a"}, 1}, {5, {"b"}, 1}, {9, {"c"}, 2}};
  const auto back = io::clusters_from_json(io::clusters_to_json(m, cs, vs, tax, Normalization::PerCommunityMax));
  EXPECT_EQ(back.model.k, 2u);
  EXPECT_EQ(back.model.assignment, m.assignment);
  EXPECT_EQ(back.community_ids, (std::vector<std::size_t>{4, 5, 9}));
  EXPECT_EQ(back.vectors, vs);
}

TEST(TaggedJson, Shape) {
  const auto tax = CategoryTaxonomy::facebook();
  BusinessMap bm;
  Business x;
  x.id = "x";
  x.raw_category = "Media";
  Business y = x;
  y.id = "y";
  y.raw_category = "Interest";
  bm = {{"x", x}, {"y", y}};
  TaggingResult r;
  TaggedCommunity tc;
  tc.community = {3, {"x", "y"}, 1};
  tc.cluster = 0;
  tc.tags = {{"y", *tax.index_of("Interest")}};
  r.communities.push_back(tc);
  const auto j = io::tagged_to_json(r, bm, tax);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["community_id"], 3);
  EXPECT_EQ(j[0]["members"][0]["category"], "Media");
  EXPECT_EQ(j[0]["members"][0]["outlier"], false);
  EXPECT_FALSE(j[0]["members"][0].contains("reason"));
  EXPECT_EQ(j[0]["members"][1]["outlier"], true);
  EXPECT_TRUE(j[0]["members"][1].contains("reason"));
}

TEST(CsvReader, MultilineQuotedField) {
  std::istringstream in("a,\"line1\nline2\",c\r\nx,y,z\n");
  text::CsvReader r(in);
  std::vector<std::string> row;
  ASSERT_TRUE(r.next(row));
  EXPECT_EQ(row, (std::vector<std::string>{"a", "line1\nline2", "c"}));
  EXPECT_EQ(r.line(), 3u);
  ASSERT_TRUE(r.next(row));
  EXPECT_EQ(row, (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_FALSE(r.next(row));
  std::istringstream bad("\"open");
  text::CsvReader rb(bad);
  EXPECT_THROW(rb.next(row), InputError);
}
