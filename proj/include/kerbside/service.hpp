#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "kerbside/segments.hpp"

namespace kerbside {

struct ServiceOptions {
  std::filesystem::path manifest;
  std::filesystem::path regions;  // optional
  std::filesystem::path image_root;
  std::filesystem::path labels;  // NDJSON label log, created if missing
  std::filesystem::path static_dir;  // optional UI assets mounted at /
  SegmentationOptions segmentation;
};

// Local annotation and export service.
//   GET  /api/batches/next?max=N   -> {batch_id, frame_ids, image_urls, classes} or 204
//   POST /api/batches/{id}/labels  {decisions:[{start,end,label}]} -> 204
//   GET  /api/frames/{id}/image    -> image bytes
//   GET  /api/progress             -> {labeled, total, mean_run_length}
//   GET  /api/export/geojson       -> accessibility map of labelled segments
// Errors are JSON {error, message} with 400, 404 or 500.
class AnnotationService {
 public:
  // Loads the manifest and replays the label log. Throws Io, Parse, Config.
  explicit AnnotationService(const ServiceOptions& options);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Binds host:port (port 0 picks a free one) and returns the bound port. Throws Io.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kerbside
