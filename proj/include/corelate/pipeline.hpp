#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corelate/cluster.hpp"
#include "corelate/community.hpp"
#include "corelate/egonet.hpp"
#include "corelate/error.hpp"
#include "corelate/graph.hpp"
#include "corelate/ingest.hpp"
#include "corelate/io.hpp"
#include "corelate/outlier.hpp"
#include "corelate/reaction_filter.hpp"
#include "corelate/taxonomy.hpp"

namespace corelate {

// A stage failure; the message carries the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::string businesses;
  std::string reactions;
  std::optional<std::string> blocklist;
  std::optional<std::string> taxonomy;

  ReactionFilterConfig filter;
  DetectOptions detect;
  IdSet exclude_ids;

  std::size_t k = 8;
  std::vector<std::size_t> k_candidates;
  Normalization normalize = Normalization::PerCommunityMax;
  std::size_t kmeans_max_iter = 100;

  double signature_threshold = 0.7;
  std::size_t ego_max = 7;
  bool ego_star = false;

  // Relative paths in the file are resolved against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    PipelineConfig c;
    auto path = [&](const std::string& p) {
      const std::filesystem::path fp(p);
      return (fp.is_absolute() || base_dir.empty()) ? p : (base_dir / fp).string();
    };
    try {
      c.businesses = path(j.at("businesses").get<std::string>());
      c.reactions = path(j.at("reactions").get<std::string>());
      if (j.contains("blocklist") && !j.at("blocklist").is_null()) c.blocklist = path(j.at("blocklist").get<std::string>());
      if (j.contains("taxonomy") && !j.at("taxonomy").is_null()) c.taxonomy = path(j.at("taxonomy").get<std::string>());
      c.filter.min_reactions = j.value("min_reactions", c.filter.min_reactions);
      c.filter.coverage = j.value("coverage", c.filter.coverage);
      if (j.contains("negative_types")) {
        c.filter.negative_types.clear();
        for (const auto& t : j.at("negative_types")) {
          const auto rt = parse_reaction_type(t.get<std::string>());
          if (!rt) throw DomainError("unknown reaction type '" + t.get<std::string>() + "' in negative_types");
          c.filter.negative_types.insert(*rt);
        }
      }
      c.detect.min_size = j.value("min_size", c.detect.min_size);
      c.detect.max_size = j.value("max_size", c.detect.max_size);
      c.detect.seed = j.value("seed", c.detect.seed);
      c.detect.strict_bounds = j.value("strict_bounds", c.detect.strict_bounds);
      c.detect.lp_runs = j.value("lp_runs", c.detect.lp_runs);
      c.detect.lp_max_sweeps = j.value("lp_max_sweeps", c.detect.lp_max_sweeps);
      if (j.contains("exclude_ids")) {
        for (const auto& id : j.at("exclude_ids")) c.exclude_ids.insert(id.get<std::string>());
      }
      c.k = j.value("k", c.k);
      c.k_candidates = j.value("k_candidates", c.k_candidates);
      if (j.contains("normalize")) c.normalize = parse_normalization(j.at("normalize").get<std::string>());
      c.kmeans_max_iter = j.value("kmeans_max_iter", c.kmeans_max_iter);
      c.signature_threshold = j.value("signature_threshold", c.signature_threshold);
      c.ego_max = j.value("ego_max", c.ego_max);
      c.ego_star = j.value("ego_star", c.ego_star);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("config: ") + e.what());
    }
    return c;
  }

  static PipelineConfig load(const std::string& path) {
    const auto j = io::read_json_file(path);
    return from_json(j, std::filesystem::path(path).parent_path());
  }

  void validate() const {
    auto must_exist = [](const std::string& p, const char* what) {
      if (!std::filesystem::exists(p)) throw InputError(std::string(what) + " file '" + p + "' does not exist");
    };
    must_exist(businesses, "businesses");
    must_exist(reactions, "reactions");
    if (blocklist) must_exist(*blocklist, "blocklist");
    if (taxonomy) must_exist(*taxonomy, "taxonomy");
    ActivityBand{filter.min_reactions, filter.min_reactions, filter.coverage}.validate();
    detect.validate();
    if (k < 1) throw DomainError("k must be >= 1");
    if (kmeans_max_iter < 1) throw DomainError("kmeans_max_iter must be >= 1");
    if (!(signature_threshold > 0.5 && signature_threshold <= 1.0)) {
      throw DomainError("signature_threshold must be in (0.5, 1]");
    }
    if (ego_max < 1) throw DomainError("ego_max must be >= 1");
  }

  nlohmann::json to_json() const {
    std::vector<std::string> negatives;
    for (auto t : filter.negative_types) negatives.emplace_back(to_string(t));
    return {{"businesses", businesses},
            {"reactions", reactions},
            {"blocklist", blocklist ? nlohmann::json(*blocklist) : nlohmann::json(nullptr)},
            {"taxonomy", taxonomy ? nlohmann::json(*taxonomy) : nlohmann::json(nullptr)},
            {"min_reactions", filter.min_reactions},
            {"coverage", filter.coverage},
            {"negative_types", negatives},
            {"min_size", detect.min_size},
            {"max_size", detect.max_size},
            {"seed", detect.seed},
            {"strict_bounds", detect.strict_bounds},
            {"lp_runs", detect.lp_runs},
            {"lp_max_sweeps", detect.lp_max_sweeps},
            {"exclude_ids", std::vector<std::string>(exclude_ids.begin(), exclude_ids.end())},
            {"k", k},
            {"k_candidates", k_candidates},
            {"normalize", std::string(to_string(normalize))},
            {"kmeans_max_iter", kmeans_max_iter},
            {"signature_threshold", signature_threshold},
            {"ego_max", ego_max},
            {"ego_star", ego_star}};
  }
};

struct PipelineOutputs {
  nlohmann::json manifest;
  std::vector<std::string> files;        // names written into the output directory
  std::optional<std::string> egonet_error;
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// Figures of the original study's private dataset, kept next to every run for
// comparison; none of them is recomputed here.
inline nlohmann::json reference_run() {
  return {{"businesses_after_cleaning", 1926},
          {"reaction_band", {3, 174}},
          {"mu", 120.289},
          {"sigma", 10.96},
          {"lower_bound", 153.195},
          {"edges_cut", 978410},
          {"edges_kept", 223939},
          {"communities", 144},
          {"community_size_range", {4, 30}},
          {"k", 8},
          {"signature_threshold", 0.7},
          {"ego_max", 7}};
}

}  // namespace detail

// Runs ingest -> clean -> reaction filter -> graph -> detection -> clustering
// -> tagging (and the egonet when a target is given) and writes every artifact
// into `out_dir`. Files are written to a sibling staging directory first and
// moved into place only when all core stages succeed; a missing egonet target
// is reported without discarding the other artifacts.
inline PipelineOutputs run_pipeline(const PipelineConfig& config, const std::optional<std::string>& target,
                                    const std::filesystem::path& out_dir, unsigned threads = 1) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  detail::stage("config", [&] {
    config.validate();
    return 0;
  });

  PipelineOutputs result;
  json& manifest = result.manifest;
  json counts = json::object();
  manifest["config"] = config.to_json();
  manifest["target"] = target ? json(*target) : json(nullptr);

  const auto taxonomy = detail::stage("taxonomy", [&] {
    return config.taxonomy ? CategoryTaxonomy::load(*config.taxonomy) : CategoryTaxonomy::facebook();
  });

  // ingest + clean
  auto parsed_businesses = detail::stage("ingest", [&] { return load_businesses(config.businesses); });
  auto parsed_reactions = detail::stage("ingest", [&] { return load_reactions(config.reactions); });
  const IdSet blocklist = detail::stage("ingest", [&] {
    return config.blocklist ? load_blocklist(*config.blocklist) : IdSet{};
  });
  counts["businesses_input"] = parsed_businesses.records.size();
  counts["businesses_rejected"] = parsed_businesses.rejected;
  counts["reactions_input"] = parsed_reactions.dataset.size();
  counts["reactions_rejected"] = parsed_reactions.rejected;

  auto cleaned = detail::stage("clean", [&] { return clean(parsed_businesses.records, parsed_reactions.dataset, blocklist); });
  counts["duplicates"] = cleaned.report.duplicates;
  counts["inconsistent"] = cleaned.report.inconsistent;
  counts["non_business"] = cleaned.report.non_business;
  counts["businesses_retained"] = cleaned.businesses.size();
  counts["reactions_after_cleaning"] = cleaned.reactions.size();
  const auto businesses = index_businesses(cleaned.businesses);

  // reaction filter
  const auto filtered = detail::stage("filter", [&] { return filter_reactions(cleaned.reactions, config.filter); });
  counts["negative_removed"] = filtered.negative_removed;
  counts["band_lower"] = filtered.band.lower;
  counts["band_upper"] = filtered.band.upper;
  counts["users_before_band"] = filtered.users_before;
  counts["users_removed"] = filtered.users_removed;
  counts["reactions_retained"] = filtered.reactions.size();
  counts["users_retained"] = filtered.reactions.user_index().size();

  // graph
  std::vector<std::string> all_ids;
  for (const auto& b : cleaned.businesses) all_ids.push_back(b.id);
  const auto pairs = detail::stage("graph", [&] { return count_common(filtered.reactions, threads); });
  const auto stats = detail::stage("graph", [&] { return random_edge_stats(pairs.total(), all_ids.size()); });
  const auto full_graph =
      detail::stage("graph", [&] { return build_graph(pairs, filtered.reactions.business_index(), stats.lower_bound, all_ids); });
  const auto graph = exclude_nodes(full_graph, config.exclude_ids);
  counts["n_b"] = all_ids.size();
  counts["n_r"] = stats.n_r;
  counts["n_c"] = stats.n_c;
  counts["mu"] = stats.mu;
  counts["sigma"] = stats.sigma;
  counts["lower_bound"] = stats.lower_bound;
  counts["candidate_pairs"] = pairs.size();
  counts["edges_kept"] = full_graph.edge_count();
  counts["edges_cut"] = pairs.size() - full_graph.edge_count();
  counts["excluded_vertices"] = full_graph.vertex_count() - graph.vertex_count();
  counts["graph_vertices"] = graph.vertex_count();
  counts["graph_edges"] = graph.edge_count();

  // communities
  const auto detection = detail::stage("detect", [&] { return detect_communities(graph, config.detect); });
  counts["communities_found"] = detection.communities.size();
  counts["unassigned_vertices"] = detection.unassigned.size();
  json iterations = json::array();
  for (const auto& it : detection.iterations) {
    iterations.push_back({{"iteration", it.iteration},
                          {"working_vertices", it.working_vertices},
                          {"working_edges", it.working_edges},
                          {"labels", it.labels},
                          {"accepted", it.accepted},
                          {"cut_threshold", it.cut_threshold},
                          {"edges_removed", it.edges_removed}});
  }
  manifest["detection"] = {{"min_edge", detection.min_edge}, {"iterations", iterations}};
  manifest["unassigned"] = detection.unassigned;

  // clustering + tagging
  const auto& communities = detection.communities;
  std::vector<CategoryVector> vectors;
  ClusterModel model;
  TaggingResult tagged;
  const std::size_t k_effective = std::min(config.k, communities.size());
  counts["k_effective"] = k_effective;
  if (!communities.empty()) {
    vectors = detail::stage("cluster", [&] { return community_vectors(communities, businesses, taxonomy, config.normalize); });
    model = detail::stage("cluster", [&] { return kmeans(vectors, k_effective, config.detect.seed, config.kmeans_max_iter); });
    if (!config.k_candidates.empty()) {
      std::vector<std::size_t> usable;
      for (auto k : config.k_candidates) {
        if (k >= 1 && k <= communities.size()) usable.push_back(k);
      }
      if (!usable.empty()) {
        const auto sel = detail::stage("cluster", [&] { return select_k(vectors, usable, config.detect.seed, config.kmeans_max_iter); });
        json table = json::array();
        for (const auto& [k, sse] : sel.sse_table) table.push_back({{"k", k}, {"sse", sse}});
        manifest["k_selection"] = {{"smallest_sse_k", sel.k}, {"sse_table", table}, {"caveat", sel.caveat}};
      }
    }
    tagged = detail::stage("tag", [&] {
      return tag_outliers(model, communities, vectors, businesses, taxonomy, config.signature_threshold);
    });
    counts["sse"] = model.sse;
  }
  std::size_t outliers = 0;
  for (const auto& tc : tagged.communities) outliers += tc.tags.size();
  counts["outliers_tagged"] = outliers;

  // egonet
  std::optional<Egonet> ego;
  if (target) {
    try {
      ego = extract_egonet(graph, *target, config.ego_max, config.ego_star);
      manifest["egonet"] = {{"vertices", ego->subgraph.vertex_count()}, {"edges", ego->subgraph.edge_count()}};
    } catch (const LookupError& e) {
      result.egonet_error = std::string("stage 'egonet' failed: ") + e.what();
      manifest["egonet"] = {{"error", *result.egonet_error}};
    }
  }
  manifest["counts"] = counts;
  manifest["reference_run"] = detail::reference_run();

  // write
  io::Labels names;
  for (const auto& [id, b] : businesses) names.emplace(id, b.name);
  std::vector<std::pair<std::string, std::string>> files;
  auto add = [&](const std::string& name, const std::string& content) { files.emplace_back(name, content); };
  {
    std::ostringstream s;
    io::write_graphml(s, graph, names);
    add("graph.graphml", s.str());
  }
  add("graph.json", io::graph_to_json(graph).dump(2) + "\n");
  add("communities.json", io::communities_to_json(communities).dump(2) + "\n");
  if (!communities.empty()) {
    auto cj = io::clusters_to_json(model, communities, vectors, taxonomy, config.normalize);
    cj["signatures"] = io::signatures_to_json(tagged, taxonomy);
    add("clusters.json", cj.dump(2) + "\n");
  } else {
    add("clusters.json", json{{"k", 0}, {"assignment", json::array()}, {"centroids", json::array()}}.dump(2) + "\n");
  }
  add("tagged.json", io::tagged_to_json(tagged, businesses, taxonomy).dump(2) + "\n");
  if (ego) {
    std::ostringstream s;
    io::write_dot(s, ego->subgraph, names);
    add("egonet.dot", s.str());
    add("egonet.json", io::egonet_to_json(*ego).dump(2) + "\n");
  }
  if (target && graph.has_vertex(*target)) {
    TaggingResult subset;
    for (const auto& tc : tagged.communities) {
      if (std::binary_search(tc.community.members.begin(), tc.community.members.end(), *target)) {
        subset.communities.push_back(tc);
      }
    }
    add("target_tagged.json", io::tagged_to_json(subset, businesses, taxonomy).dump(2) + "\n");
  }

  // report
  {
    std::ostringstream r;
    r << "businesses: " << counts["businesses_input"] << " read, " << counts["businesses_retained"] << " retained ("
      << counts["duplicates"] << " duplicate, " << counts["inconsistent"] << " inconsistent, " << counts["non_business"]
      << " non-business)\n";
    r << "reactions: " << counts["reactions_input"] << " read, " << counts["reactions_retained"]
      << " retained after filtering; activity band [" << filtered.band.lower << ", " << filtered.band.upper << "]\n";
    r << "null model: n_r=" << stats.n_r << " n_c=" << stats.n_c << " mu=" << text::format_double(stats.mu)
      << " sigma=" << text::format_double(stats.sigma) << " lowerBound=" << text::format_double(stats.lower_bound) << "\n";
    r << "edges: " << counts["edges_kept"] << " kept, " << counts["edges_cut"] << " cut\n";
    r << "graph after exclusions: " << graph.vertex_count() << " vertices, " << graph.edge_count() << " edges\n";
    const auto hubs = hub_report(graph, 10);
    r << "\ntop vertices by degree:\n";
    for (const auto& v : hubs.vertices) r << "  " << v.id << "  " << v.degree << "\n";
    r << "top edges by common users:\n";
    for (const auto& e : hubs.edges) r << "  " << e.a << " -- " << e.b << "  " << e.common_users << "\n";
    r << "\ncommunities: " << communities.size() << " (" << detection.unassigned.size() << " vertices unassigned)\n";
    for (const auto& c : communities) {
      r << "  #" << c.id << " (iteration " << c.accepted_at_iteration << ", " << c.members.size() << " members)\n";
    }
    if (!communities.empty()) {
      r << "\nclusters: k=" << model.k << " sse=" << text::format_double(model.sse) << "\n";
      const auto members = model.members();
      for (std::size_t c = 0; c < model.k; ++c) {
        r << "  cluster " << c << ": " << members[c].size() << " communities; signature:";
        for (auto i : tagged.signatures[c].categories) r << " [" << taxonomy.name(i) << "]";
        r << "\n";
      }
      r << "\noutliers: " << outliers << "\n";
      for (const auto& tc : tagged.communities) {
        for (const auto& [id, cat] : tc.tags) {
          r << "  community #" << tc.community.id << ": " << id << " (" << taxonomy.name(cat) << ")\n";
        }
      }
    }
    if (ego) {
      r << "\negonet of " << ego->target << ":\n";
      for (const auto& [id, w] : ego->neighbors) r << "  " << id << "  " << text::format_double(w) << "\n";
    }
    if (result.egonet_error) r << "\n" << *result.egonet_error << "\n";
    add("report.txt", r.str());
  }

  std::vector<std::string> names_written;
  for (const auto& [name, content] : files) names_written.push_back(name);
  names_written.push_back("manifest.json");
  std::sort(names_written.begin(), names_written.end());
  manifest["outputs"] = names_written;
  add("manifest.json", manifest.dump(2) + "\n");

  // commit through a staging directory
  auto dir = fs::absolute(out_dir).lexically_normal();
  if (dir.filename().empty()) dir = dir.parent_path();
  const fs::path staging = dir.parent_path() / (dir.filename().string() + ".partial");
  try {
    fs::remove_all(staging);
    fs::create_directories(staging);
    for (const auto& [name, content] : files) io::write_text_file(staging / name, content);
    fs::create_directories(dir);
    for (const auto& [name, content] : files) fs::rename(staging / name, dir / name);
    fs::remove_all(staging);
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw StageError("write", e.what());
  }
  result.files = names_written;
  return result;
}

}  // namespace corelate
