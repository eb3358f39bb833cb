// kerbside command-line front end. Everything goes through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <nlohmann/json.hpp>
#include <sstream>

#include "kerbside/kerbside.h"

namespace {

using json = nlohmann::json;

int fail() {
  std::cerr << kb_last_error_json() << '\n';
  return 1;
}

int usage_error(const std::string& message) {
  std::cerr << json{{"error", "Usage"}, {"message", message}}.dump() << '\n';
  return 2;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return json::parse(in);
}

// Options shared by the dataset commands.
struct DataFlags {
  std::string manifest, regions, image_root, out;
  std::string protocol = "loro";
  std::string pairs, scope, city, cities;
  int k = 5;
  std::string predictions;
  bool oracle = false;
  bool exclude_transition = false;
  long long max_gap_ms = 5000;
  double max_jump_m = 10.0;
  std::string collapse;

  void add_paths(CLI::App* sub, bool images) {
    sub->add_option("--manifest", manifest, "Frame manifest CSV")->required();
    sub->add_option("--regions", regions, "Region GeoJSON")->required();
    if (images) sub->add_option("--image-root", image_root, "Directory image_ref paths are relative to");
    sub->add_option("--out", out, "Output directory")->required();
  }

  void add_model(CLI::App* sub) {
    sub->add_option("--protocol", protocol, "conservative | loro | cross-city")
        ->check(CLI::IsMember({"conservative", "loro", "cross-city"}));
    sub->add_option("--pairs", pairs, "Conservative pairs, e.g. A:B,C:D");
    sub->add_option("--scope", scope, "Comma-separated region ids for conservative/loro");
    sub->add_option("--city", city, "City whose regions form the scope");
    sub->add_option("--cities", cities, "Comma-separated cities for cross-city");
    sub->add_option("--k", k, "Neighbours for the baseline classifier (odd)");
    sub->add_option("--predictions", predictions, "Use predictions from CSV instead of the baseline");
    sub->add_flag("--oracle", oracle, "Predict the ground truth (pipeline check)");
    sub->add_flag("--exclude-transition", exclude_transition, "Leave transition out of macro F1");
    sub->add_option("--max-gap-ms", max_gap_ms, "Segment split on larger time gaps");
    sub->add_option("--max-jump-m", max_jump_m, "Segment split on larger GPS jumps");
    sub->add_option("--collapse", collapse, "Overrides, e.g. grass=accessible,asphalt=accessible");
  }

  json to_json(const std::string& command) const {
    json j = {{"command", command}, {"manifest", manifest}, {"regions", regions},
              {"image_root", image_root}, {"out_dir", out}, {"protocol", protocol},
              {"city", city}, {"include_transition_in_macro", !exclude_transition},
              {"segmentation", {{"max_gap_ms", max_gap_ms}, {"max_jump_m", max_jump_m}}}};
    json pair_list = json::array();
    for (const auto& p : split(pairs, ',')) pair_list.push_back(split(p, ':'));
    j["pairs"] = pair_list;
    j["scope_regions"] = split(scope, ',');
    j["cities"] = split(cities, ',');
    if (!predictions.empty()) {
      j["classifier"] = {{"kind", "predictions"}, {"predictions", predictions}};
    } else if (oracle) {
      j["classifier"] = {{"kind", "oracle"}};
    } else {
      j["classifier"] = {{"kind", "knn"}, {"k", k}};
    }
    if (!collapse.empty()) {
      json c = json::object();
      for (const auto& kv : split(collapse, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--collapse expects class=accessibility");
        c[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      j["collapse"] = c;
    }
    return j;
  }
};

int run_config(const json& config) {
  char* summary = nullptr;
  if (kb_run(config.dump().c_str(), &summary) != KB_OK) return fail();
  std::cout << summary << '\n';
  kb_string_free(summary);
  return 0;
}

int serve(json config) {
  if (const char* env = std::getenv("KERBSIDE_PORT")) {
    try {
      config["port"] = std::stoi(env);
    } catch (const std::exception&) {
      return usage_error(std::string("KERBSIDE_PORT is not a port: ") + env);
    }
  }
  kb_service* service = nullptr;
  if (kb_service_open(config.dump().c_str(), &service) != KB_OK) return fail();
  int port = 0;
  const std::string host = config.value("host", "127.0.0.1");
  if (kb_service_bind(service, host.c_str(), config.value("port", 8765), &port) != KB_OK) {
    kb_service_free(service);
    return fail();
  }
  std::cout << json{{"listening", "http://" + host + ":" + std::to_string(port)}}.dump() << std::endl;
  const kb_status status = kb_service_listen(service);
  kb_service_free(service);
  return status == KB_OK ? 0 : fail();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kerbside: sidewalk surface classification pipeline"};
  app.require_subcommand(1);

  std::string synth_config, synth_out, synth_format;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--config", synth_config, "Generator JSON");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the generator seed");
  synth->add_option("--format", synth_format, "pgm | png")->check(CLI::IsMember({"pgm", "png"}));

  DataFlags ingest_flags;
  auto* ingest = app.add_subcommand("ingest", "Validate a manifest and write the class distribution");
  ingest_flags.add_paths(ingest, false);

  DataFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Frame-wise evaluation under a split protocol");
  eval_flags.add_paths(eval, true);
  eval_flags.add_model(eval);

  DataFlags street_flags;
  auto* street = app.add_subcommand("streetwise", "Segment-level and binary evaluation");
  street_flags.add_paths(street, true);
  street_flags.add_model(street);

  DataFlags geo_flags;
  auto* geo = app.add_subcommand("export-geojson", "Write the accessibility map");
  geo_flags.add_paths(geo, true);
  geo_flags.add_model(geo);

  double route_p = 0.0;
  int route_k = 0;
  auto* route = app.add_subcommand("route-accuracy", "Probability a route of k segments is fully correct");
  route->add_option("--p", route_p, "Per-segment accuracy")->required();
  route->add_option("--k", route_k, "Segments per route")->required();

  std::string serve_manifest, serve_regions, serve_images, serve_labels, serve_static, serve_host = "127.0.0.1";
  int serve_port = 8765;
  auto* serve_cmd = app.add_subcommand("serve", "Annotation and export HTTP service");
  serve_cmd->add_option("--manifest", serve_manifest, "Frame manifest CSV")->required();
  serve_cmd->add_option("--regions", serve_regions, "Region GeoJSON");
  serve_cmd->add_option("--image-root", serve_images, "Image directory")->required();
  serve_cmd->add_option("--labels", serve_labels, "NDJSON label log")->required();
  serve_cmd->add_option("--static", serve_static, "UI asset directory");
  serve_cmd->add_option("--host", serve_host, "Bind address");
  serve_cmd->add_option("--port", serve_port, "Port (KERBSIDE_PORT overrides)");

  std::string pipe_config, pipe_out;
  std::optional<std::uint64_t> pipe_seed;
  int pipe_k = 5;
  auto* pipe = app.add_subcommand("pipeline", "Synthesize, ingest, evaluate all protocols, export");
  pipe->add_option("--config", pipe_config, "Generator JSON");
  pipe->add_option("--out", pipe_out, "Output directory")->required();
  pipe->add_option("--seed", pipe_seed, "Override the generator seed");
  pipe->add_option("--k", pipe_k, "Neighbours for the baseline classifier");

  std::string run_file, run_out;
  auto* run = app.add_subcommand("run", "Re-run from a run.json");
  run->add_option("--config", run_file, "run.json")->required();
  run->add_option("--out", run_out, "Override out_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }

  try {
    auto generator = [](const std::string& path, const std::optional<std::uint64_t>& seed) {
      json g = path.empty() ? json::object() : read_json_file(path);
      if (seed) g["seed"] = *seed;
      return g;
    };
    if (*synth) {
      json g = generator(synth_config, synth_seed);
      if (!synth_format.empty()) g["image_format"] = synth_format;
      return run_config({{"command", "synth"}, {"out_dir", synth_out}, {"generator", g}});
    }
    if (*ingest) return run_config(ingest_flags.to_json("ingest"));
    if (*eval) return run_config(eval_flags.to_json("eval"));
    if (*street) return run_config(street_flags.to_json("streetwise"));
    if (*geo) return run_config(geo_flags.to_json("export-geojson"));
    if (*route) {
      double acc = 0.0;
      if (kb_route_accuracy(route_p, route_k, &acc) != KB_OK) return fail();
      std::printf("%.4f\n", acc);
      return 0;
    }
    if (*serve_cmd) {
      return serve({{"command", "serve"}, {"manifest", serve_manifest}, {"regions", serve_regions},
                    {"image_root", serve_images}, {"labels", serve_labels}, {"static_dir", serve_static},
                    {"host", serve_host}, {"port", serve_port}});
    }
    if (*pipe) {
      return run_config({{"command", "pipeline"}, {"out_dir", pipe_out},
                         {"generator", generator(pipe_config, pipe_seed)},
                         {"classifier", {{"kind", "knn"}, {"k", pipe_k}}}});
    }
    if (*run) {
      json config = read_json_file(run_file);
      if (!run_out.empty()) config["out_dir"] = run_out;
      if (config.value("command", "") == "serve") return serve(config);
      return run_config(config);
    }
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }
  return 2;
}
