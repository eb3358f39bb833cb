#include "kerbside/pipeline.hpp"

#include <filesystem>
#include <map>

#include "kerbside/classifier.hpp"
#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"
#include "kerbside/geojson.hpp"
#include "kerbside/ingest.hpp"

namespace kerbside {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::Synth, "synth"},           {Command::Ingest, "ingest"},
    {Command::Eval, "eval"},             {Command::Streetwise, "streetwise"},
    {Command::ExportGeojson, "export-geojson"}, {Command::Pipeline, "pipeline"},
    {Command::Serve, "serve"},
};

Accessibility parse_accessibility(const std::string& s) {
  if (s == "accessible") return Accessibility::Accessible;
  if (s == "inaccessible") return Accessibility::Inaccessible;
  if (s == "excluded") return Accessibility::Excluded;
  throw Error(ErrorCode::Config, "unknown accessibility '" + s + "'");
}

std::string classifier_kind_name(ClassifierConfig::Kind k) {
  switch (k) {
    case ClassifierConfig::Kind::Knn: return "knn";
    case ClassifierConfig::Kind::Predictions: return "predictions";
    case ClassifierConfig::Kind::Oracle: return "oracle";
  }
  return "knn";
}

void write_json(const fs::path& path, const json& j) { csv::write_file(path, j.dump(2) + "\n"); }

}  // namespace

std::string command_name(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return std::string(name);
  }
  return "?";
}

Command parse_command(const std::string& name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  throw Error(ErrorCode::Config, "unknown command '" + name + "'");
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    c.command = parse_command(j.at("command").get<std::string>());
    c.manifest = j.value("manifest", "");
    c.regions = j.value("regions", "");
    c.image_root = j.value("image_root", "");
    c.out_dir = j.value("out_dir", "");
    c.labels = j.value("labels", "");
    c.protocol = j.value("protocol", c.protocol);
    if (j.contains("pairs")) c.pairs = j.at("pairs").get<std::vector<std::vector<std::string>>>();
    if (j.contains("scope_regions")) c.scope_regions = j.at("scope_regions").get<std::vector<std::string>>();
    c.city = j.value("city", "");
    if (j.contains("cities")) c.cities = j.at("cities").get<std::vector<std::string>>();
    if (j.contains("classifier")) {
      const auto& cl = j.at("classifier");
      const auto kind = cl.value("kind", "knn");
      if (kind == "knn") {
        c.classifier.kind = ClassifierConfig::Kind::Knn;
      } else if (kind == "predictions") {
        c.classifier.kind = ClassifierConfig::Kind::Predictions;
      } else if (kind == "oracle") {
        c.classifier.kind = ClassifierConfig::Kind::Oracle;
      } else {
        throw Error(ErrorCode::Config, "unknown classifier kind '" + kind + "'");
      }
      c.classifier.k = cl.value("k", c.classifier.k);
      c.classifier.predictions = cl.value("predictions", "");
    }
    if (j.contains("segmentation")) {
      const auto& s = j.at("segmentation");
      c.segmentation.max_gap_ms = s.value("max_gap_ms", c.segmentation.max_gap_ms);
      c.segmentation.max_jump_m = s.value("max_jump_m", c.segmentation.max_jump_m);
    }
    if (j.contains("collapse")) {
      auto mapping = CollapseTable{}.mapping();
      for (const auto& [name, value] : j.at("collapse").items()) {
        mapping[index_of(parse_surface_class(name))] = parse_accessibility(value.get<std::string>());
      }
      c.segmentation.collapse = CollapseTable(mapping);
    }
    c.include_transition_in_macro = j.value("include_transition_in_macro", true);
    if (j.contains("generator")) c.generator = generator_config_from_json(j.at("generator"));
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.static_dir = j.value("static_dir", "");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("run config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    throw Error(ErrorCode::Config, std::string("run config: ") + e.what());
  }
  return c;
}

json RunConfig::echo() const {
  json collapse = json::object();
  for (auto c : kAllClasses) {
    collapse[std::string(canonical_name(c))] = accessibility_name(segmentation.collapse(c));
  }
  json j = {{"command", command_name(command)},
            {"protocol", protocol},
            {"pairs", pairs},
            {"scope_regions", scope_regions},
            {"city", city},
            {"cities", cities},
            {"classifier", {{"kind", classifier_kind_name(classifier.kind)}, {"k", classifier.k}}},
            {"segmentation",
             {{"max_gap_ms", segmentation.max_gap_ms}, {"max_jump_m", segmentation.max_jump_m}}},
            {"collapse", collapse},
            {"include_transition_in_macro", include_transition_in_macro}};
  if (generator) j["generator"] = kerbside::to_json(*generator);
  return j;
}

json RunConfig::to_json() const {
  json j = echo();
  j["manifest"] = manifest;
  j["regions"] = regions;
  j["image_root"] = image_root;
  j["out_dir"] = out_dir;
  j["labels"] = labels;
  j["classifier"]["predictions"] = classifier.predictions;
  j["host"] = host;
  j["port"] = port;
  j["static_dir"] = static_dir;
  return j;
}

void RunConfig::validate() const {
  auto require_file = [](const std::string& path, const char* what) {
    if (path.empty()) throw Error(ErrorCode::Config, std::string("missing --") + what);
    if (!fs::exists(path)) throw Error(ErrorCode::Config, std::string(what) + " '" + path + "' does not exist");
  };
  if (command != Command::Serve) {
    if (out_dir.empty()) throw Error(ErrorCode::Config, "missing --out");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Config, "cannot create out dir '" + out_dir + "': " + ec.message());
  }
  const bool knn = classifier.kind == ClassifierConfig::Kind::Knn;
  if (knn && (classifier.k < 1 || classifier.k % 2 == 0)) {
    throw Error(ErrorCode::Config, "k must be a positive odd integer");
  }
  if (command == Command::Synth || command == Command::Pipeline) {
    if (generator) generator->validate();
    return;
  }
  require_file(manifest, "manifest");
  if (command != Command::Serve) require_file(regions, "regions");
  if (protocol != "conservative" && protocol != "loro" && protocol != "cross-city") {
    throw Error(ErrorCode::Config, "unknown protocol '" + protocol + "'");
  }
  if (classifier.kind == ClassifierConfig::Kind::Predictions) require_file(classifier.predictions, "predictions");
  if (command == Command::Serve && (port < 0 || port > 65535)) throw Error(ErrorCode::Config, "invalid port");
}

Dataset load_dataset(const std::string& manifest, const std::string& regions) {
  auto frames = load_manifest(manifest);
  auto region_set = load_regions(regions);
  auto assigned = assign_regions(std::move(frames), region_set);
  return {std::move(assigned.frames), assigned.unassigned};
}

SplitProtocol resolve_protocol(const RunConfig& config, const FrameSet& frames, const std::string& protocol) {
  const auto& regions = frames.regions();
  auto scope = [&] {
    if (!config.scope_regions.empty()) return config.scope_regions;
    std::string city = config.city;
    if (city.empty()) {
      if (regions.empty()) throw Error(ErrorCode::Config, "no regions declared");
      city = regions.regions().front().city;
    }
    auto ids = regions.region_ids_in_city(city);
    if (ids.empty()) throw Error(ErrorCode::Config, "city '" + city + "' has no regions");
    return ids;
  };
  if (protocol == "conservative") {
    return Conservative{config.pairs.empty() ? default_pairs(scope()) : config.pairs};
  }
  if (protocol == "loro") return LeaveOneRegionOut{scope()};
  if (protocol == "cross-city") return CrossCity{config.cities.empty() ? regions.cities() : config.cities};
  throw Error(ErrorCode::Config, "unknown protocol '" + protocol + "'");
}

namespace {

// Holds whatever a FoldClassifier closure refers to.
struct ClassifierContext {
  std::vector<FeatureVector> features;
  PredictionSet imported;
  bool features_ready = false;

  FoldClassifier make(const RunConfig& cfg, const FrameSet& frames) {
    switch (cfg.classifier.kind) {
      case ClassifierConfig::Kind::Oracle: return oracle_classifier(frames);
      case ClassifierConfig::Kind::Predictions:
        imported = import_predictions(cfg.classifier.predictions, frames);
        return imported_classifier(frames, imported);
      case ClassifierConfig::Kind::Knn:
        if (!features_ready) {
          features = compute_features(frames, cfg.image_root);
          features_ready = true;
        }
        return knn_fold_classifier(frames, features, cfg.classifier.k);
    }
    throw Error(ErrorCode::Internal, "unhandled classifier kind");
  }
};

MetricsOptions metrics_options(const RunConfig& cfg) { return {cfg.include_transition_in_macro}; }

json write_eval(const RunConfig& cfg, const ProtocolResult& result) {
  const fs::path out(cfg.out_dir);
  json doc = protocol_result_to_json(result);
  doc["config"] = cfg.echo();
  doc["config"]["protocol"] = result.protocol;
  write_json(out / ("eval_" + result.protocol + ".json"), doc);
  for (const auto& f : result.folds) {
    csv::write_file(out / "confusion" / (result.protocol + "_" + f.fold.fold_id + ".csv"),
                    confusion_csv(f.report.confusion, kAllClasses));
  }
  csv::write_file(out / "confusion" / (result.protocol + "_pooled.csv"),
                  confusion_csv(result.pooled.confusion, kAllClasses));
  csv::write_file(out / ("predictions_" + result.protocol + ".csv"), write_predictions(result.predictions));
  return {{"protocol", result.protocol},
          {"pooled_macro_f1", result.pooled.macro_f1},
          {"mean_fold_macro_f1", result.mean_fold_macro_f1},
          {"folds", result.folds.size()}};
}

// Frames restricted to those with a prediction (out-of-fold frames of a protocol run).
FrameSet predicted_subset(const FrameSet& frames, const PredictionSet& predictions) {
  std::vector<Frame> kept;
  for (const auto& f : frames.frames()) {
    if (predictions.count(f.frame_id)) kept.push_back(f);
  }
  return FrameSet(std::move(kept), frames.regions());
}

struct StreetwiseOutput {
  StreetwiseResult streetwise;
  BinaryReport binary;
};

StreetwiseOutput streetwise_from(const RunConfig& cfg, const FrameSet& frames, const PredictionSet& predictions,
                                 const std::string& tag, std::optional<double> framewise_macro_f1) {
  auto segments = derive_segments(frames, cfg.segmentation);
  auto sw = streetwise_report(std::move(segments), predictions, cfg.segmentation.collapse);
  sw.report.protocol = tag;
  const auto bin = binary_report(sw.segments, cfg.segmentation.collapse);
  const fs::path out(cfg.out_dir);
  json doc = {{"protocol", tag},
              {"n_segments", sw.segments.size()},
              {"streetwise", report_to_json(sw.report)},
              {"binary", binary_report_to_json(bin)},
              {"segments", segments_to_json(sw.segments, cfg.segmentation.collapse)},
              {"config", cfg.echo()}};
  if (framewise_macro_f1) doc["framewise_macro_f1"] = *framewise_macro_f1;
  write_json(out / ("streetwise_" + tag + ".json"), doc);
  csv::write_file(out / "confusion" / ("streetwise_" + tag + ".csv"),
                  confusion_csv(sw.report.confusion, kSurfaceClasses));
  csv::write_file(out / "confusion" / ("binary_" + tag + ".csv"), binary_confusion_csv(bin));
  return {std::move(sw), bin};
}

// Predictions for streetwise/export: imported directly, or out-of-fold from the protocol.
struct PredictionSource {
  FrameSet frames;
  PredictionSet predictions;
  std::string tag;
  std::optional<double> framewise_macro_f1;
};

PredictionSource prediction_source(const RunConfig& cfg, const FrameSet& frames) {
  if (cfg.classifier.kind == ClassifierConfig::Kind::Predictions) {
    return {frames, import_predictions(cfg.classifier.predictions, frames), "imported", std::nullopt};
  }
  ClassifierContext ctx;
  const auto protocol = resolve_protocol(cfg, frames, cfg.protocol);
  const auto result = run_protocol(frames, protocol, ctx.make(cfg, frames), metrics_options(cfg));
  return {predicted_subset(frames, result.predictions), result.predictions, result.protocol,
          result.pooled.macro_f1};
}

json run_synth(const RunConfig& cfg) {
  const auto gen = cfg.generator.value_or(GeneratorConfig::bremen_like());
  const auto ds = generate(gen, cfg.out_dir);
  return {{"command", "synth"},
          {"n_frames", ds.n_frames},
          {"n_transitions", ds.n_transitions},
          {"manifest", ds.manifest.string()},
          {"regions", ds.regions.string()}};
}

json ingest_summary(const Dataset& ds, const fs::path& out) {
  const auto table = class_distribution(ds.frames);
  csv::write_file(out / "distribution.csv", write_distribution_csv(table));
  std::vector<SurfaceClass> labels;
  for (auto i : ds.frames.time_order()) labels.push_back(*ds.frames[i].true_label);
  json summary = {{"command", "ingest"},
                  {"n_frames", ds.frames.size()},
                  {"unassigned", ds.unassigned},
                  {"grand_total", table.grand_total}};
  if (!labels.empty()) {
    const auto rl = run_length_stats(labels);
    summary["run_count"] = rl.run_count;
    summary["mean_run_length"] = rl.mean_run_length;
  }
  write_json(out / "ingest.json", summary);
  return summary;
}

json run_pipeline(const RunConfig& cfg) {
  const fs::path out(cfg.out_dir);
  const auto gen = cfg.generator.value_or(GeneratorConfig::bremen_like());
  const auto data = generate(gen, out / "data");
  RunConfig inner = cfg;
  inner.manifest = data.manifest.string();
  inner.regions = data.regions.string();
  inner.image_root = data.image_root.string();

  const auto ds = load_dataset(inner.manifest, inner.regions);
  const FrameSet& frames = ds.frames;
  ingest_summary(ds, out);

  ClassifierContext ctx;
  const auto classify = ctx.make(inner, frames);
  const auto options = metrics_options(inner);

  json summary = {{"command", "pipeline"}, {"n_frames", frames.size()}, {"seed", gen.seed}};
  const auto cons = run_protocol(frames, resolve_protocol(inner, frames, "conservative"), classify, options);
  const auto loro = run_protocol(frames, resolve_protocol(inner, frames, "loro"), classify, options);
  summary["framewise"]["conservative"] = write_eval(inner, cons);
  summary["framewise"]["loro"] = write_eval(inner, loro);
  if (frames.regions().cities().size() >= 2) {
    const auto cross = run_protocol(frames, resolve_protocol(inner, frames, "cross-city"), classify, options);
    summary["framewise"]["cross-city"] = write_eval(inner, cross);
  }

  const auto sw_cons = streetwise_from(inner, predicted_subset(frames, cons.predictions), cons.predictions,
                                       "conservative", cons.pooled.macro_f1);
  const auto sw_loro = streetwise_from(inner, predicted_subset(frames, loro.predictions), loro.predictions,
                                       "loro", loro.pooled.macro_f1);
  summary["streetwise"]["conservative"] = {{"macro_f1", sw_cons.streetwise.report.macro_f1},
                                           {"binary_f1", sw_cons.binary.f1}};
  summary["streetwise"]["loro"] = {{"macro_f1", sw_loro.streetwise.report.macro_f1},
                                   {"binary_f1", sw_loro.binary.f1},
                                   {"binary_accuracy", sw_loro.binary.accuracy}};
  export_geojson(sw_loro.streetwise.segments, out / "accessibility_map.geojson", inner.segmentation.collapse);
  write_json(out / "summary.json", summary);
  return summary;
}

}  // namespace

json run(const RunConfig& config) {
  config.validate();
  RunConfig cfg = config;
  if ((cfg.command == Command::Synth || cfg.command == Command::Pipeline) && !cfg.generator) {
    cfg.generator = GeneratorConfig::bremen_like();
  }
  const fs::path out(cfg.out_dir);
  json summary;
  switch (cfg.command) {
    case Command::Synth:
      summary = run_synth(cfg);
      break;
    case Command::Ingest:
      summary = ingest_summary(load_dataset(cfg.manifest, cfg.regions), out);
      break;
    case Command::Eval: {
      const auto ds = load_dataset(cfg.manifest, cfg.regions);
      ClassifierContext ctx;
      const auto protocol = resolve_protocol(cfg, ds.frames, cfg.protocol);
      const auto result = run_protocol(ds.frames, protocol, ctx.make(cfg, ds.frames), metrics_options(cfg));
      summary = write_eval(cfg, result);
      break;
    }
    case Command::Streetwise: {
      const auto ds = load_dataset(cfg.manifest, cfg.regions);
      const auto src = prediction_source(cfg, ds.frames);
      const auto sw = streetwise_from(cfg, src.frames, src.predictions, src.tag, src.framewise_macro_f1);
      summary = {{"command", "streetwise"},
                 {"protocol", src.tag},
                 {"n_segments", sw.streetwise.segments.size()},
                 {"streetwise_macro_f1", sw.streetwise.report.macro_f1},
                 {"binary_f1", sw.binary.f1}};
      break;
    }
    case Command::ExportGeojson: {
      const auto ds = load_dataset(cfg.manifest, cfg.regions);
      const auto src = prediction_source(cfg, ds.frames);
      auto segments = derive_segments(src.frames, cfg.segmentation);
      const auto sw = streetwise_report(std::move(segments), src.predictions, cfg.segmentation.collapse);
      export_geojson(sw.segments, out / "accessibility_map.geojson", cfg.segmentation.collapse);
      summary = {{"command", "export-geojson"},
                 {"n_segments", sw.segments.size()},
                 {"path", (out / "accessibility_map.geojson").string()}};
      break;
    }
    case Command::Pipeline:
      summary = run_pipeline(cfg);
      break;
    case Command::Serve:
      throw Error(ErrorCode::Config, "serve is not a batch command");
  }
  write_json(out / "run.json", cfg.to_json());
  return summary;
}

}  // namespace kerbside
