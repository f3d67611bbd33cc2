// corelate: command-line front end for the business co-reaction pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corelate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace corelate;

namespace {

unsigned default_threads() {
  if (const char* env = std::getenv("CORELATE_THREADS")) {
    try {
      const auto n = std::stoul(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid CORELATE_THREADS='" << env << "'\n";
  }
  return 1;
}

CategoryTaxonomy taxonomy_or_default(const std::string& path) {
  return path.empty() ? CategoryTaxonomy::facebook() : CategoryTaxonomy::load(path);
}

std::vector<Business> read_businesses(const std::string& path, const std::string& format) {
  auto in = open_input(path);
  auto parsed = parse_businesses(in, format.empty() ? format_from_path(path) : parse_format(format));
  for (const auto& d : parsed.diagnostics) std::cerr << "warning: " << d << "\n";
  return std::move(parsed.records);
}

ReactionDataset read_reactions(const std::string& path, const std::string& format) {
  auto in = open_input(path);
  auto parsed = parse_reactions(in, format.empty() ? format_from_path(path) : parse_format(format));
  if (parsed.rejected) std::cerr << "warning: " << parsed.rejected << " reaction records rejected\n";
  for (const auto& d : parsed.diagnostics) std::cerr << "warning: " << d << "\n";
  return std::move(parsed.dataset);
}

std::ofstream open_output(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

std::vector<Community> read_communities(const std::string& path) {
  return io::communities_from_json(io::read_json_file(path));
}

io::Labels business_names(const std::string& path) {
  io::Labels names;
  if (path.empty()) return names;
  for (const auto& b : read_businesses(path, "")) names.emplace(b.id, b.name);
  return names;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corelate: business relationship graphs from user reactions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "corelate 1.0.0");

  // ingest
  std::string businesses_path, reactions_path, blocklist_path, format, out_dir;
  auto* ingest = app.add_subcommand("ingest", "Parse and clean business and reaction files");
  ingest->add_option("--businesses", businesses_path, "Businesses file (csv or jsonl)")->required();
  ingest->add_option("--reactions", reactions_path, "Reactions file (csv or jsonl)")->required();
  ingest->add_option("--blocklist", blocklist_path, "Non-business page ids, one per line");
  ingest->add_option("--format", format, "Input format (csv|jsonl); default from extension");
  ingest->add_option("--out-dir", out_dir, "Directory for businesses.csv, reactions.csv, cleaning.json")->required();

  // filter
  std::string out_path;
  ReactionFilterConfig filter_config;
  std::vector<std::string> negative_names{"Angry", "Sad"};
  auto* filter = app.add_subcommand("filter", "Drop negative reactions and apply the activity band");
  filter->add_option("--reactions", reactions_path, "Reactions file")->required();
  filter->add_option("--min-reactions", filter_config.min_reactions, "Lower activity bound")->capture_default_str();
  filter->add_option("--coverage", filter_config.coverage, "Share of reactions the band keeps")->capture_default_str();
  filter->add_option("--negative", negative_names, "Reaction types to drop")->delimiter(',')->capture_default_str();
  filter->add_option("--out", out_path, "Filtered reactions csv")->required();

  // graph
  std::vector<std::string> exclude_ids;
  std::string stats_path;
  unsigned threads = default_threads();
  auto* graph_cmd = app.add_subcommand("graph", "Build the thresholded Jaccard business graph");
  graph_cmd->add_option("--businesses", businesses_path, "Businesses file (vertex set)");
  graph_cmd->add_option("--reactions", reactions_path, "Filtered reactions file")->required();
  graph_cmd->add_option("--exclude", exclude_ids, "Vertex ids to drop after building")->delimiter(',');
  graph_cmd->add_option("--threads", threads, "Worker threads for pair counting");
  graph_cmd->add_option("--stats", stats_path, "Write null-model statistics and hub report (json)");
  graph_cmd->add_option("--out", out_path, "Output graph (.graphml, .dot or .json)")->required();

  // detect
  std::string graph_path, unassigned_path;
  DetectOptions detect_options;
  auto* detect = app.add_subcommand("detect", "Detect size-bounded business communities");
  detect->add_option("--graph", graph_path, "Graph json")->required();
  detect->add_option("--min-size", detect_options.min_size)->capture_default_str();
  detect->add_option("--max-size", detect_options.max_size)->capture_default_str();
  detect->add_option("--seed", detect_options.seed)->capture_default_str();
  detect->add_flag("--strict", detect_options.strict_bounds, "Exclusive size bounds");
  detect->add_option("--lp-runs", detect_options.lp_runs)->capture_default_str();
  detect->add_option("--lp-max-sweeps", detect_options.lp_max_sweeps)->capture_default_str();
  detect->add_option("--unassigned", unassigned_path, "Write unassigned vertex ids (json)");
  detect->add_option("--out", out_path, "communities.json")->required();

  // cluster
  std::string communities_path, taxonomy_path, normalize = "per_community_max";
  std::size_t k = 8;
  std::size_t max_iter = 100;
  std::uint64_t seed = 0;
  std::vector<std::size_t> k_candidates;
  auto* cluster = app.add_subcommand("cluster", "k-means over community category vectors");
  cluster->add_option("--communities", communities_path)->required();
  cluster->add_option("--businesses", businesses_path)->required();
  cluster->add_option("--taxonomy", taxonomy_path, "Taxonomy json (default: built-in 28 categories)");
  cluster->add_option("--k", k)->capture_default_str();
  cluster->add_option("--k-candidates", k_candidates, "Report SSE for these k values")->delimiter(',');
  cluster->add_option("--normalize", normalize, "per_community_max | per_feature")->capture_default_str();
  cluster->add_option("--seed", seed)->capture_default_str();
  cluster->add_option("--max-iter", max_iter)->capture_default_str();
  cluster->add_option("--out", out_path, "clusters.json")->required();

  // tag
  std::string clusters_path;
  double threshold = 0.7;
  auto* tag = app.add_subcommand("tag", "Tag outlier businesses against cluster signatures");
  tag->add_option("--clusters", clusters_path)->required();
  tag->add_option("--communities", communities_path)->required();
  tag->add_option("--businesses", businesses_path)->required();
  tag->add_option("--taxonomy", taxonomy_path);
  tag->add_option("--threshold", threshold)->capture_default_str();
  tag->add_option("--out", out_path, "tagged.json")->required();

  // egonet
  std::string target;
  std::size_t ego_max = 7;
  bool star = false;
  auto* egonet = app.add_subcommand("egonet", "Extract the egonet of a target business");
  egonet->add_option("--graph", graph_path, "Graph json")->required();
  egonet->add_option("--target", target)->required();
  egonet->add_option("--max", ego_max)->capture_default_str();
  egonet->add_flag("--star", star, "Only the target's own edges");
  egonet->add_option("--businesses", businesses_path, "Businesses file for node labels");
  egonet->add_option("--out", out_path, "Output (.dot, .graphml or .json)")->required();

  // export
  std::string export_format;
  auto* export_cmd = app.add_subcommand("export", "Convert a graph json to another format");
  export_cmd->add_option("--graph", graph_path, "Graph json")->required();
  export_cmd->add_option("--format", export_format, "graphml | dot | json; default from extension");
  export_cmd->add_option("--businesses", businesses_path, "Businesses file for node labels");
  export_cmd->add_option("--out", out_path)->required();

  // synth
  std::string config_path;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with planted communities");
  synth->add_option("--config", config_path, "Generator config json")->required();
  synth->add_option("--out-dir", out_dir)->required();

  // score
  std::string truth_path;
  auto* score = app.add_subcommand("score", "Score communities against a synthetic ground truth");
  score->add_option("--communities", communities_path)->required();
  score->add_option("--truth", truth_path)->required();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
  pipeline->add_option("--config", config_path, "Pipeline config json")->required();
  pipeline->add_option("--target", target, "Target business id");
  pipeline->add_option("--out", out_dir, "Output directory")->required();
  pipeline->add_option("--threads", threads, "Worker threads (default: CORELATE_THREADS or 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto businesses = read_businesses(businesses_path, format);
      const auto reactions = read_reactions(reactions_path, format);
      const auto blocklist = blocklist_path.empty() ? IdSet{} : load_blocklist(blocklist_path);
      const auto cleaned = clean(businesses, reactions, blocklist);
      fs::create_directories(out_dir);
      auto b = open_output((fs::path(out_dir) / "businesses.csv").string());
      write_businesses_csv(b, cleaned.businesses);
      auto r = open_output((fs::path(out_dir) / "reactions.csv").string());
      write_reactions_csv(r, cleaned.reactions);
      const json report = {{"businesses_input", businesses.size()},
                           {"businesses_retained", cleaned.businesses.size()},
                           {"duplicates", cleaned.report.duplicates},
                           {"inconsistent", cleaned.report.inconsistent},
                           {"non_business", cleaned.report.non_business},
                           {"reactions_input", reactions.size()},
                           {"reactions_retained", cleaned.reactions.size()},
                           {"reactions_non_business", cleaned.report.reactions_non_business},
                           {"reactions_dropped", cleaned.report.reactions_dropped}};
      io::write_json_file(fs::path(out_dir) / "cleaning.json", report);
      std::cout << report.dump(2) << "\n";
    } else if (*filter) {
      filter_config.negative_types.clear();
      for (const auto& name : negative_names) {
        if (name.empty()) continue;
        const auto t = parse_reaction_type(name);
        if (!t) throw UsageError("unknown reaction type '" + name + "'");
        filter_config.negative_types.insert(*t);
      }
      const auto result = filter_reactions(read_reactions(reactions_path, ""), filter_config);
      auto out = open_output(out_path);
      write_reactions_csv(out, result.reactions);
      std::cout << json{{"band", {result.band.lower, result.band.upper}},
                        {"negative_removed", result.negative_removed},
                        {"users_removed", result.users_removed},
                        {"reactions_retained", result.reactions.size()}}
                       .dump(2)
                << "\n";
    } else if (*graph_cmd) {
      const auto format_out = io::graph_format_from_path(out_path);
      const auto reactions = read_reactions(reactions_path, "");
      std::vector<std::string> vertices;
      io::Labels names;
      if (!businesses_path.empty()) {
        for (const auto& b : read_businesses(businesses_path, "")) {
          vertices.push_back(b.id);
          names.emplace(b.id, b.name);
        }
      }
      const auto pairs = count_common(reactions, threads);
      const std::size_t n_b = vertices.empty() ? reactions.business_index().size()
                                               : BusinessGraph(vertices).vertex_count();
      const auto stats = random_edge_stats(pairs.total(), n_b);
      const auto full = build_graph(pairs, reactions.business_index(), stats.lower_bound, vertices);
      const auto g = exclude_nodes(full, IdSet(exclude_ids.begin(), exclude_ids.end()));
      auto out = open_output(out_path);
      io::write_graph(out, g, format_out, names);
      const auto hubs = hub_report(g, 10);
      json top_vertices = json::array();
      for (const auto& v : hubs.vertices) top_vertices.push_back({{"id", v.id}, {"degree", v.degree}});
      json top_edges = json::array();
      for (const auto& e : hubs.edges) top_edges.push_back({{"a", e.a}, {"b", e.b}, {"common", e.common_users}});
      const json summary = {{"n_b", n_b},
                            {"n_r", stats.n_r},
                            {"n_c", stats.n_c},
                            {"mu", stats.mu},
                            {"sigma", stats.sigma},
                            {"lower_bound", stats.lower_bound},
                            {"candidate_pairs", pairs.size()},
                            {"edges_kept", full.edge_count()},
                            {"edges_cut", pairs.size() - full.edge_count()},
                            {"top_vertices", top_vertices},
                            {"top_edges", top_edges}};
      if (!stats_path.empty()) io::write_json_file(stats_path, summary);
      std::cout << summary.dump(2) << "\n";
    } else if (*detect) {
      const auto g = io::graph_from_json(io::read_json_file(graph_path));
      const auto result = detect_communities(g, detect_options);
      io::write_json_file(out_path, io::communities_to_json(result.communities));
      if (!unassigned_path.empty()) io::write_json_file(unassigned_path, result.unassigned);
      std::cout << "communities: " << result.communities.size() << ", unassigned vertices: "
                << result.unassigned.size() << ", iterations: " << result.iterations.size() << "\n";
    } else if (*cluster) {
      const auto taxonomy = taxonomy_or_default(taxonomy_path);
      const auto communities = read_communities(communities_path);
      const auto businesses = index_businesses(read_businesses(businesses_path, ""));
      const auto norm = parse_normalization(normalize);
      const auto vectors = community_vectors(communities, businesses, taxonomy, norm);
      const auto model = kmeans(vectors, k, seed, max_iter);
      auto j = io::clusters_to_json(model, communities, vectors, taxonomy, norm);
      if (!k_candidates.empty()) {
        const auto sel = select_k(vectors, k_candidates, seed, max_iter);
        json table = json::array();
        for (const auto& [kk, sse] : sel.sse_table) table.push_back({{"k", kk}, {"sse", sse}});
        j["k_selection"] = {{"smallest_sse_k", sel.k}, {"sse_table", table}, {"caveat", sel.caveat}};
        std::cerr << "note: " << sel.caveat << "\n";
      }
      io::write_json_file(out_path, j);
      std::cout << "k=" << model.k << " sse=" << model.sse << " iterations=" << model.iterations << "\n";
    } else if (*tag) {
      const auto taxonomy = taxonomy_or_default(taxonomy_path);
      const auto loaded = io::clusters_from_json(io::read_json_file(clusters_path));
      const auto all = read_communities(communities_path);
      std::map<std::size_t, Community> by_id;
      for (const auto& c : all) by_id.emplace(c.id, c);
      std::vector<Community> communities;
      for (auto id : loaded.community_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("clusters reference unknown community " + std::to_string(id));
        communities.push_back(it->second);
      }
      const auto businesses = index_businesses(read_businesses(businesses_path, ""));
      const auto tagged = tag_outliers(loaded.model, communities, loaded.vectors, businesses, taxonomy, threshold);
      io::write_json_file(out_path, io::tagged_to_json(tagged, businesses, taxonomy));
      std::size_t n = 0;
      for (const auto& tc : tagged.communities) n += tc.tags.size();
      std::cout << "outliers tagged: " << n << "\n";
    } else if (*egonet) {
      const auto format_out = io::graph_format_from_path(out_path);
      const auto g = io::graph_from_json(io::read_json_file(graph_path));
      const auto ego = extract_egonet(g, target, ego_max, star);
      auto out = open_output(out_path);
      io::write_egonet(out, ego, format_out, business_names(businesses_path));
      std::cout << "egonet of " << target << ": " << ego.subgraph.vertex_count() << " vertices, "
                << ego.subgraph.edge_count() << " edges\n";
    } else if (*export_cmd) {
      const auto f = export_format.empty() ? io::graph_format_from_path(out_path) : io::parse_graph_format(export_format);
      const auto g = io::graph_from_json(io::read_json_file(graph_path));
      auto out = open_output(out_path);
      io::write_graph(out, g, f, business_names(businesses_path));
    } else if (*synth) {
      const auto j = io::read_json_file(config_path);
      fs::create_directories(out_dir);
      const auto taxonomy = CategoryTaxonomy::facebook();
      if (j.value("mode", std::string("planted")) == "uniform") {
        const auto data = generate_uniform_noise(j.at("n_businesses").get<std::size_t>(), j.at("n_users").get<std::size_t>(),
                                                 j.at("reactions_per_user").get<std::size_t>(),
                                                 j.value("seed", std::uint64_t{1}));
        std::vector<Business> businesses;
        for (const auto& [id, users] : data.business_index()) {
          businesses.push_back({id, "Noise Business " + id, -25.43, -49.27, "Other", {}, {}, {}});
        }
        auto b = open_output((fs::path(out_dir) / "businesses.csv").string());
        write_businesses_csv(b, businesses);
        auto r = open_output((fs::path(out_dir) / "reactions.csv").string());
        write_reactions_csv(r, data);
        std::cout << "uniform noise: " << businesses.size() << " businesses, " << data.size() << " reactions\n";
      } else {
        const auto config = PlantedConfig::from_json(j);
        const auto data = generate(config, taxonomy);
        auto b = open_output((fs::path(out_dir) / "businesses.csv").string());
        write_businesses_csv(b, data.businesses);
        auto r = open_output((fs::path(out_dir) / "reactions.csv").string());
        write_reactions_csv(r, data.reactions);
        io::write_json_file(fs::path(out_dir) / "truth.json", data.truth.to_json(taxonomy));
        std::cout << "planted: " << data.businesses.size() << " businesses, " << data.reactions.size()
                  << " reactions\n";
      }
    } else if (*score) {
      const auto truth = GroundTruth::from_json(io::read_json_file(truth_path), CategoryTaxonomy::facebook());
      const auto s = score_partition(read_communities(communities_path), truth);
      std::cout << json{{"ari", s.ari}, {"nmi", s.nmi}, {"unassigned_fraction", s.unassigned_fraction},
                        {"compared", s.compared}}
                       .dump(2)
                << "\n";
    } else if (*pipeline) {
      const auto config = PipelineConfig::load(config_path);
      const auto result =
          run_pipeline(config, target.empty() ? std::nullopt : std::optional<std::string>(target), out_dir, threads);
      const auto& c = result.manifest.at("counts");
      std::cout << "communities: " << c.at("communities_found") << ", edges kept: " << c.at("edges_kept")
                << ", outliers: " << c.at("outliers_tagged") << "\n";
      std::cout << "wrote " << result.files.size() << " files to " << out_dir << "\n";
      if (result.egonet_error) {
        std::cerr << "error: " << *result.egonet_error << "\n";
        return 3;
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
