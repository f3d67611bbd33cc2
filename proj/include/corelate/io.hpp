#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "corelate/cluster.hpp"
#include "corelate/community.hpp"
#include "corelate/csv.hpp"
#include "corelate/egonet.hpp"
#include "corelate/error.hpp"
#include "corelate/graph.hpp"
#include "corelate/outlier.hpp"

// Serialization of graphs, communities, clusters and tags. Every writer emits
// elements in a fixed order so output bytes depend only on the input.
namespace corelate::io {

using nlohmann::json;

enum class GraphFormat { GraphML, Dot, Json };

inline GraphFormat parse_graph_format(std::string_view s) {
  if (s == "graphml") return GraphFormat::GraphML;
  if (s == "dot") return GraphFormat::Dot;
  if (s == "json") return GraphFormat::Json;
  throw UsageError("unknown graph format '" + std::string(s) + "' (expected graphml, dot or json)");
}

inline GraphFormat graph_format_from_path(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext.empty()) throw UsageError("cannot infer graph format from '" + path + "'");
  return parse_graph_format(ext.substr(1));
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

using Labels = std::map<std::string, std::string>;

inline void write_graphml(std::ostream& out, const BusinessGraph& g, const Labels& labels = {}) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n"
         "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
         "  <key id=\"common_users\" for=\"edge\" attr.name=\"common_users\" attr.type=\"long\"/>\n"
         "  <graph id=\"business\" edgedefault=\"undirected\">\n";
  for (const auto& id : g.ids()) {
    out << "    <node id=\"" << xml_escape(id) << "\">";
    if (const auto it = labels.find(id); it != labels.end()) {
      out << "<data key=\"name\">" << xml_escape(it->second) << "</data>";
    }
    out << "</node>\n";
  }
  for (const auto& e : g.edges()) {
    out << "    <edge source=\"" << xml_escape(g.id(e.a)) << "\" target=\"" << xml_escape(g.id(e.b)) << "\">"
        << "<data key=\"weight\">" << text::format_double(e.data.weight) << "</data>"
        << "<data key=\"common_users\">" << e.data.common_users << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

inline void write_dot(std::ostream& out, const BusinessGraph& g, const Labels& labels = {}) {
  out << "graph business {\n";
  for (const auto& id : g.ids()) {
    out << "  " << dot_quote(id);
    if (const auto it = labels.find(id); it != labels.end()) out << " [label=" << dot_quote(it->second) << "]";
    out << ";\n";
  }
  for (const auto& e : g.edges()) {
    char pen[32];
    std::snprintf(pen, sizeof(pen), "%.3f", 1.0 + 9.0 * e.data.weight);
    char label[32];
    std::snprintf(label, sizeof(label), "%.4f", e.data.weight);
    out << "  " << dot_quote(g.id(e.a)) << " -- " << dot_quote(g.id(e.b)) << " [weight=" << text::format_double(e.data.weight)
        << ", common_users=" << e.data.common_users << ", label=\"" << label << "\", penwidth=" << pen << "];\n";
  }
  out << "}\n";
}

inline json graph_to_json(const BusinessGraph& g) {
  json nodes = json::array();
  for (const auto& id : g.ids()) nodes.push_back(id);
  json edges = json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"a", g.id(e.a)}, {"b", g.id(e.b)}, {"common", e.data.common_users}, {"weight", e.data.weight}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

inline BusinessGraph graph_from_json(const json& j) {
  try {
    BusinessGraph g(j.at("nodes").get<std::vector<std::string>>());
    for (const auto& e : j.at("edges")) {
      const EdgeData data{e.at("common").get<std::uint64_t>(), e.at("weight").get<double>()};
      if (!(data.weight > 0.0 && data.weight <= 1.0)) throw InputError("graph json: edge weight outside (0, 1]");
      g.set_edge(e.at("a").get<std::string>(), e.at("b").get<std::string>(), data);
    }
    return g;
  } catch (const json::exception& e) {
    throw InputError(std::string("graph json: ") + e.what());
  } catch (const LookupError& e) {
    throw InputError(std::string("graph json: edge references ") + e.what());
  }
}

inline void write_graph(std::ostream& out, const BusinessGraph& g, GraphFormat format, const Labels& labels = {}) {
  switch (format) {
    case GraphFormat::GraphML: write_graphml(out, g, labels); break;
    case GraphFormat::Dot: write_dot(out, g, labels); break;
    case GraphFormat::Json: out << graph_to_json(g).dump(2) << '\n'; break;
  }
}

inline json communities_to_json(const std::vector<Community>& communities) {
  json out = json::array();
  for (const auto& c : communities) {
    out.push_back({{"id", c.id}, {"members", c.members}, {"iteration", c.accepted_at_iteration}});
  }
  return out;
}

inline std::vector<Community> communities_from_json(const json& j) {
  try {
    std::vector<Community> out;
    for (const auto& c : j) {
      Community x;
      x.id = c.at("id").get<std::size_t>();
      x.members = c.at("members").get<std::vector<std::string>>();
      std::sort(x.members.begin(), x.members.end());
      x.accepted_at_iteration = c.value("iteration", std::size_t{0});
      if (x.members.empty()) throw InputError("communities json: community " + std::to_string(x.id) + " is empty");
      out.push_back(std::move(x));
    }
    return out;
  } catch (const json::exception& e) {
    throw InputError(std::string("communities json: ") + e.what());
  }
}

inline json clusters_to_json(const ClusterModel& model, const std::vector<Community>& communities,
                             const std::vector<CategoryVector>& vectors, const CategoryTaxonomy& taxonomy,
                             Normalization normalization) {
  json assignment = json::array();
  for (std::size_t i = 0; i < communities.size(); ++i) {
    assignment.push_back(
        {{"community_id", communities[i].id}, {"cluster", model.assignment[i]}, {"vector", vectors[i].values}});
  }
  json centroids = json::array();
  for (const auto& c : model.centroids) centroids.push_back(c.values);
  return {{"k", model.k},
          {"normalize", std::string(to_string(normalization))},
          {"categories", taxonomy.canonical()},
          {"sse", model.sse},
          {"sse_trace", model.sse_trace},
          {"iterations", model.iterations},
          {"converged", model.converged},
          {"centroids", centroids},
          {"assignment", assignment}};
}

struct LoadedClusters {
  ClusterModel model;
  std::vector<std::size_t> community_ids;
  std::vector<CategoryVector> vectors;
};

inline LoadedClusters clusters_from_json(const json& j) {
  try {
    LoadedClusters out;
    out.model.k = j.at("k").get<std::size_t>();
    out.model.sse = j.value("sse", 0.0);
    for (const auto& c : j.at("centroids")) out.model.centroids.emplace_back(c.get<std::vector<double>>());
    for (const auto& a : j.at("assignment")) {
      out.community_ids.push_back(a.at("community_id").get<std::size_t>());
      const auto cl = a.at("cluster").get<std::size_t>();
      if (cl >= out.model.k) throw InputError("clusters json: cluster index out of range");
      out.model.assignment.push_back(cl);
      out.vectors.emplace_back(a.at("vector").get<std::vector<double>>());
    }
    return out;
  } catch (const json::exception& e) {
    throw InputError(std::string("clusters json: ") + e.what());
  }
}

inline json tagged_to_json(const TaggingResult& tagged, const BusinessMap& businesses,
                           const CategoryTaxonomy& taxonomy) {
  json out = json::array();
  for (const auto& tc : tagged.communities) {
    json members = json::array();
    for (const auto& id : tc.community.members) {
      const auto cat = taxonomy.flatten(businesses.at(id).raw_category);
      json m = {{"id", id}, {"category", taxonomy.name(cat)}, {"outlier", tc.tags.contains(id)}};
      if (tc.tags.contains(id)) m["reason"] = "category '" + taxonomy.name(cat) + "' is not in the cluster signature";
      members.push_back(std::move(m));
    }
    out.push_back({{"community_id", tc.community.id}, {"cluster", tc.cluster}, {"members", members}});
  }
  return out;
}

inline json signatures_to_json(const TaggingResult& tagged, const CategoryTaxonomy& taxonomy) {
  json out = json::array();
  for (std::size_t c = 0; c < tagged.signatures.size(); ++c) {
    std::vector<std::string> names;
    for (auto i : tagged.signatures[c].categories) names.push_back(taxonomy.name(i));
    out.push_back({{"cluster", c}, {"categories", names}, {"centroid", tagged.centroids[c].values}});
  }
  return out;
}

inline json egonet_to_json(const Egonet& ego) {
  json neighbors = json::array();
  for (const auto& [id, w] : ego.neighbors) neighbors.push_back({{"id", id}, {"weight", w}});
  auto j = graph_to_json(ego.subgraph);
  j["target"] = ego.target;
  j["neighbors"] = neighbors;
  return j;
}

inline void write_egonet(std::ostream& out, const Egonet& ego, GraphFormat format, const Labels& labels = {}) {
  if (format == GraphFormat::Json) {
    out << egonet_to_json(ego).dump(2) << '\n';
  } else {
    write_graph(out, ego.subgraph, format, labels);
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace corelate::io
