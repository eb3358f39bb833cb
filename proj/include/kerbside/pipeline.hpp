#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerbside/eval.hpp"
#include "kerbside/segments.hpp"
#include "kerbside/synth.hpp"

namespace kerbside {

enum class Command { Synth, Ingest, Eval, Streetwise, ExportGeojson, Pipeline, Serve };

std::string command_name(Command c);
Command parse_command(const std::string& name);  // throws Config

struct ClassifierConfig {
  enum class Kind { Knn, Predictions, Oracle };
  Kind kind = Kind::Knn;
  int k = 5;
  std::string predictions;  // CSV path for Kind::Predictions
};

// Fully resolved parameters of one run. Every run writes it to out_dir/run.json;
// feeding that file back reproduces the run.
struct RunConfig {
  Command command = Command::Pipeline;
  std::string manifest;
  std::string regions;
  std::string image_root;
  std::string out_dir;
  std::string labels;  // serve: NDJSON label log

  std::string protocol = "loro";                // conservative | loro | cross-city
  std::vector<std::vector<std::string>> pairs;  // conservative; empty = consecutive pairing of the scope
  std::vector<std::string> scope_regions;       // conservative/loro; empty = regions of `city`
  std::string city;                             // empty = city of the first declared region
  std::vector<std::string> cities;              // cross-city; empty = every city

  ClassifierConfig classifier;
  SegmentationOptions segmentation;
  bool include_transition_in_macro = true;
  std::optional<GeneratorConfig> generator;  // synth, pipeline

  std::string host = "127.0.0.1";
  int port = 8765;
  std::string static_dir;  // serve: optional directory of UI assets

  // Throws Config for unknown keys' types or invalid values.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  // Parameters only (no paths); echoed into reports.
  nlohmann::json echo() const;

  // Referenced input files exist; out_dir is creatable. Throws Config.
  void validate() const;
};

// Executes the configured command, writes artifacts under out_dir plus
// out_dir/run.json, and returns a JSON summary. Serve is not handled here.
nlohmann::json run(const RunConfig& config);

// Loaded, region-assigned frames.
struct Dataset {
  FrameSet frames;
  std::size_t unassigned = 0;
};
Dataset load_dataset(const std::string& manifest, const std::string& regions);

SplitProtocol resolve_protocol(const RunConfig& config, const FrameSet& frames, const std::string& protocol);

}  // namespace kerbside
