#include "connecto/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "CLI11.hpp"
#include "connecto/error.hpp"
#include "connecto/graph.hpp"
#include "connecto/volume_io.hpp"
#include "json.hpp"

namespace connecto::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Extent3D parse_extent(const std::string& text) {
  std::vector<std::int64_t> v;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string field = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                             : comma - start);
    std::size_t used = 0;
    std::int64_t x = 0;
    try {
      x = std::stoll(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) throw UsageError("bad extent field '" + field + "'");
    v.push_back(x);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (v.size() != 6) throw UsageError("--extent needs x0,x1,y0,y1,z0,z1");
  const Extent3D e{v[0], v[1], v[2], v[3], v[4], v[5]};
  try {
    validate(e);
  } catch (const Error& ex) {
    throw UsageError(ex.what());
  }
  return e;
}

double parse_norm(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "inf" || lower == "infinity") return kInfNorm;
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || std::isnan(p)) {
    throw UsageError("--p must be a number >= 1 or 'inf', got '" + text + "'");
  }
  if (p < 1.0) throw UsageError("--p must be >= 1, got " + text);
  return p;
}

}  // namespace

ParseOutcome parse_args(const std::vector<std::string>& args) {
  PipelineConfig cfg;
  std::string extent_text;
  std::string p_text = "2";
  std::string polarity_text = "above";
  int slab = static_cast<int>(kDefaultSlabDepth);
  int parallelism = static_cast<int>(cfg.policy.parallelism);
  int retries = static_cast<int>(cfg.policy.max_retries);
  int threads = 1;

  CLI::App app{"Volumetric EM pipeline: plan, fetch, convert, sobel, binarize, graph"};
  app.name("connecto");
  app.require_subcommand(1);

  auto in_opt = [&](CLI::App* sub, const std::string& help) {
    sub->add_option("--in", cfg.in, help)->required();
  };
  auto out_opt = [&](CLI::App* sub, const std::string& help, bool required = true) {
    auto* o = sub->add_option("--out", cfg.out, help);
    if (required) o->required();
  };

  auto* plan = app.add_subcommand("plan", "Partition an extent into z-slab cutouts (TSV manifest)");
  plan->add_option("--extent", extent_text, "x0,x1,y0,y1,z0,z1")->required();
  plan->add_option("--token", cfg.token, "dataset token");
  plan->add_option("--res", cfg.resolution, "resolution level");
  plan->add_option("--slab", slab, "z-slices per chunk");
  out_opt(plan, "manifest path");

  auto* fetch = app.add_subcommand("fetch", "Download every chunk of a manifest and assemble");
  fetch->add_option("--manifest", cfg.manifest, "TSV manifest")->required();
  fetch->add_option("--template", cfg.url_template, "cutout URL template");
  fetch->add_option("--base", cfg.url.base, "value of {base}");
  fetch->add_option("--format", cfg.url.format, "value of {format}");
  fetch->add_option("--parallelism", parallelism, "max requests in flight");
  fetch->add_option("--retries", retries, "retries per chunk on transient errors");
  fetch->add_option("--backoff", cfg.policy.backoff_base, "backoff base in seconds");
  fetch->add_option("--timeout", cfg.policy.timeout, "per-request timeout in seconds");
  out_opt(fetch, "output .raw volume");

  auto* convert = app.add_subcommand("convert", "Convert between .raw volumes and PGM stacks");
  in_opt(convert, ".raw volume or PGM stack directory");
  convert->add_option("--extent", extent_text, "extent of a PGM stack (inferred if omitted)");
  out_opt(convert, "PGM stack directory or .raw volume");

  auto* sobel = app.add_subcommand("sobel", "3D Sobel gradient of a u8 volume");
  in_opt(sobel, "u8 .raw volume");
  sobel->add_option("--threads", threads, "worker threads");
  out_opt(sobel, "i64x3 gradient .raw");

  auto* magnitude = app.add_subcommand("magnitude", "L_p magnitude of a gradient field");
  in_opt(magnitude, "i64x3 gradient .raw");
  magnitude->add_option("--p", p_text, "norm order (>= 1, or inf)");
  out_opt(magnitude, "f64 magnitude .raw");

  auto* binarize_cmd = app.add_subcommand("binarize", "Threshold at mean + k*stddev");
  in_opt(binarize_cmd, "f64 magnitude .raw, or i64x3 gradient .raw");
  binarize_cmd->add_option("--p", p_text, "norm order when the input is a gradient");
  binarize_cmd->add_option("--k", cfg.k, "threshold multiplier");
  binarize_cmd->add_option("--polarity", polarity_text, "above|below");
  out_opt(binarize_cmd, "u8 .raw binary volume (foreground 255)");

  auto* graph_build = app.add_subcommand("graph-build", "Voxel adjacency graph of a binary volume");
  in_opt(graph_build, "binary .raw volume");
  graph_build->add_option("--connectivity", cfg.connectivity, "6, 18 or 26");
  out_opt(graph_build, "graph file");

  auto* graph_stats = app.add_subcommand("graph-stats", "Summary of a graph file (JSON)");
  in_opt(graph_stats, "graph file");

  auto* dot = app.add_subcommand("dot", "Common-neighbour count of two vertices (JSON)");
  in_opt(dot, "graph file");
  dot->add_option("--u", cfg.u, "first vertex id")->required();
  dot->add_option("--v", cfg.v, "second vertex id")->required();

  auto* components = app.add_subcommand("components", "Connected components (JSON summary)");
  in_opt(components, "graph file");
  out_opt(components, "optional vertex<TAB>component TSV", false);

  auto* slice_export = app.add_subcommand("slice-export", "Write one z-slice as PGM");
  in_opt(slice_export, "u8 .raw volume");
  slice_export->add_option("--z", cfg.z, "absolute z index")->required();
  out_opt(slice_export, "output .pgm");

  ParseOutcome outcome;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    outcome.message = app.help();
    outcome.exit_code = kExitOk;
    return outcome;
  } catch (const CLI::ParseError& ex) {
    outcome.message = std::string("usage error: ") + ex.what() + "\n" + app.help();
    outcome.exit_code = kExitUsage;
    return outcome;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (!extent_text.empty()) cfg.extent = parse_extent(extent_text);
    cfg.p = parse_norm(p_text);
    if (polarity_text == "above") {
      cfg.polarity = Polarity::kAbove;
    } else if (polarity_text == "below") {
      cfg.polarity = Polarity::kBelow;
    } else {
      throw UsageError("--polarity must be 'above' or 'below'");
    }
    if (slab < 1) throw UsageError("--slab must be >= 1");
    cfg.slab_depth = slab;
    if (parallelism < 1) throw UsageError("--parallelism must be >= 1");
    cfg.policy.parallelism = static_cast<unsigned>(parallelism);
    if (retries < 0) throw UsageError("--retries must be >= 0");
    cfg.policy.max_retries = static_cast<unsigned>(retries);
    if (threads < 1) throw UsageError("--threads must be >= 1");
    cfg.threads = static_cast<unsigned>(threads);
    if (!(cfg.policy.backoff_base > 0.0)) throw UsageError("--backoff must be > 0");
    if (!(cfg.policy.timeout > 0.0)) throw UsageError("--timeout must be > 0");
    if (!std::isfinite(cfg.k)) throw UsageError("--k must be finite");
    if (cfg.connectivity != 6 && cfg.connectivity != 18 && cfg.connectivity != 26) {
      throw UsageError("--connectivity must be 6, 18 or 26");
    }
    if (cfg.resolution < 0) throw UsageError("--res must be >= 0");
  } catch (const UsageError& ex) {
    outcome.message = std::string("usage error: ") + ex.what() + "\n";
    outcome.exit_code = kExitUsage;
    return outcome;
  }
  outcome.config = std::move(cfg);
  return outcome;
}

ParseOutcome parse_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_args(args);
}

namespace {

void print_json(std::ostream& out, const nlohmann::json& j) { out << j.dump() << "\n"; }

int run_plan(const PipelineConfig& c, std::ostream&, std::ostream& err) {
  const ChunkManifest m = plan_chunks(c.token, c.resolution, *c.extent, c.slab_depth);
  write_manifest(m, c.out);
  err << "planned " << m.entries.size() << " chunks into " << c.out.string() << "\n";
  return kExitOk;
}

int run_fetch(const PipelineConfig& c, std::ostream&, std::ostream& err) {
  const ChunkManifest m = read_manifest(c.manifest);
  err << "fetching " << m.entries.size() << " chunks, " << c.policy.parallelism
      << " in flight\n";
  const Volume3D v = fetch_all(m, c.url_template, c.policy, c.url);
  write_raw(v, c.out);
  err << "assembled " << to_string(v.extent()) << " into " << c.out.string() << "\n";
  return kExitOk;
}

int run_convert(const PipelineConfig& c, std::ostream&, std::ostream& err) {
  if (std::filesystem::is_directory(c.in)) {
    const Extent3D e = c.extent ? *c.extent : infer_pgm_stack_extent(c.in);
    write_raw(read_pgm_stack(c.in, e), c.out);
    err << "wrote " << c.out.string() << "\n";
  } else {
    const auto paths = write_pgm_stack(read_raw(c.in), c.out);
    err << "wrote " << paths.size() << " slices into " << c.out.string() << "\n";
  }
  return kExitOk;
}

int run_sobel(const PipelineConfig& c, std::ostream&, std::ostream&) {
  write_gradient(gradient(read_raw(c.in), c.threads), c.out);
  return kExitOk;
}

int run_magnitude(const PipelineConfig& c, std::ostream&, std::ostream&) {
  write_raw(magnitude_lp(read_gradient(c.in), c.p), c.out);
  return kExitOk;
}

int run_binarize(const PipelineConfig& c, std::ostream&, std::ostream& err) {
  const RawHeader h = read_raw_header(c.in);
  const FloatVolume3D m =
      h.dtype == "i64x3" ? magnitude_lp(read_gradient(c.in), c.p) : read_raw_f64(c.in);
  const BinaryVolume b = binarize(m, c.k, c.polarity);
  write_raw(to_volume(b), c.out);
  err << b.foreground_count() << " foreground voxels\n";
  return kExitOk;
}

int run_graph_build(const PipelineConfig& c, std::ostream&, std::ostream& err) {
  const CompactGraph g =
      build_from_binary_volume(to_binary(read_raw(c.in)), to_connectivity(c.connectivity));
  save_graph(g, c.out);
  err << g.vertex_count() << " vertices, " << g.edge_slots() << " edge slots\n";
  return kExitOk;
}

int run_graph_stats(const PipelineConfig& c, std::ostream& out, std::ostream&) {
  const CompactGraph g = load_graph(c.in);
  std::uint64_t max_degree = 0;
  for (VertexId v : g.vertex_ids()) max_degree = std::max<std::uint64_t>(max_degree, degree(g, v));
  const Components cc = connected_components(g);
  const auto sizes = cc.sizes();
  print_json(out, {{"vertices", g.vertex_count()},
                   {"edge_slots", g.edge_slots()},
                   {"memory_footprint", memory_footprint(g)},
                   {"max_degree", max_degree},
                   {"components", cc.count},
                   {"largest_component",
                    sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end())},
                   {"node_props", !g.node_props().empty()},
                   {"edge_props", !g.edge_props().empty()}});
  return kExitOk;
}

int run_dot(const PipelineConfig& c, std::ostream& out, std::ostream&) {
  const CompactGraph g = load_graph(c.in);
  print_json(out, {{"u", c.u}, {"v", c.v}, {"dot", dot_product(g, c.u, c.v)}});
  return kExitOk;
}

int run_components(const PipelineConfig& c, std::ostream& out, std::ostream&) {
  const CompactGraph g = load_graph(c.in);
  const Components cc = connected_components(g);
  if (!c.out.empty()) {
    std::string tsv;
    for (std::size_t i = 0; i < g.vertex_count(); ++i) {
      tsv += std::to_string(g.vertex_ids()[i]) + '\t' + std::to_string(cc.labels[i]) + '\n';
    }
    atomic_write(c.out, tsv);
  }
  const auto sizes = cc.sizes();
  print_json(out, {{"vertices", g.vertex_count()},
                   {"components", cc.count},
                   {"largest_component",
                    sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end())},
                   {"sizes", sizes}});
  return kExitOk;
}

int run_slice_export(const PipelineConfig& c, std::ostream&, std::ostream&) {
  write_pgm(extract_slice(read_raw(c.in), c.z), c.out);
  return kExitOk;
}

}  // namespace

int run(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  using Handler = int (*)(const PipelineConfig&, std::ostream&, std::ostream&);
  static const std::vector<std::pair<std::string, Handler>> handlers{
      {"plan", run_plan},           {"fetch", run_fetch},
      {"convert", run_convert},     {"sobel", run_sobel},
      {"magnitude", run_magnitude}, {"binarize", run_binarize},
      {"graph-build", run_graph_build}, {"graph-stats", run_graph_stats},
      {"dot", run_dot},             {"components", run_components},
      {"slice-export", run_slice_export},
  };
  const auto it = std::find_if(handlers.begin(), handlers.end(),
                               [&](const auto& h) { return h.first == config.command; });
  if (it == handlers.end()) {
    err << "usage error: unknown command '" << config.command << "'\n";
    return kExitUsage;
  }
  try {
    return it->second(config, out, err);
  } catch (const Error& ex) {
    err << "error [" << to_string(ex.kind()) << "]: " << ex.what() << "\n";
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
  }
  return kExitFailure;
}

}  // namespace connecto::cli
