#include "kerbside/kerbside.h"

#include <cstdlib>
#include <cstring>
#include <nlohmann/json.hpp>

#include "kerbside/error.hpp"
#include "kerbside/ingest.hpp"
#include "kerbside/pipeline.hpp"
#include "kerbside/service.hpp"

struct kb_frameset {
  kerbside::FrameSet frames;
  std::size_t unassigned = 0;
};

struct kb_service {
  std::unique_ptr<kerbside::AnnotationService> service;
};

namespace {

thread_local std::string g_message;
thread_local std::string g_json;

void set_error(kerbside::ErrorCode code, const std::string& message, const nlohmann::json& extra = {}) {
  g_message = message;
  nlohmann::json j = {{"error", kerbside::error_code_name(code)}, {"message", message}};
  if (extra.is_object()) j.update(extra);
  g_json = j.dump();
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class F>
kb_status guarded(F&& f) {
  try {
    f();
    g_message.clear();
    g_json.clear();
    return KB_OK;
  } catch (const kerbside::ParseError& e) {
    set_error(e.code(), e.what(), {{"line", e.line()}, {"column", e.column()}});
    return static_cast<kb_status>(e.code());
  } catch (const kerbside::Error& e) {
    set_error(e.code(), e.what());
    return static_cast<kb_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    set_error(kerbside::ErrorCode::Parse, e.what());
    return KB_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    set_error(kerbside::ErrorCode::Internal, "out of memory");
    return KB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(kerbside::ErrorCode::Internal, e.what());
    return KB_ERR_INTERNAL;
  }
}

kb_status null_argument(const char* name) {
  set_error(kerbside::ErrorCode::InvalidArgument, std::string(name) + " is NULL");
  return KB_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* kb_version(void) { return "0.1.0"; }

const char* kb_status_name(kb_status status) {
  return kerbside::error_code_name(static_cast<kerbside::ErrorCode>(status));
}

const char* kb_last_error(void) { return g_message.c_str(); }
const char* kb_last_error_json(void) { return g_json.c_str(); }
void kb_string_free(char* s) { std::free(s); }

kb_status kb_parse_surface_class(const char* name, int* out_class) {
  if (!name) return null_argument("name");
  if (!out_class) return null_argument("out_class");
  return guarded([&] { *out_class = static_cast<int>(kerbside::parse_surface_class(name)); });
}

const char* kb_surface_class_name(int surface_class) {
  if (surface_class < 0 || surface_class >= static_cast<int>(kerbside::kNumClasses)) return nullptr;
  return kerbside::canonical_name(static_cast<kerbside::SurfaceClass>(surface_class)).data();
}

kb_status kb_route_accuracy(double p_segment, int segments_per_route, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = kerbside::route_accuracy(kerbside::RouteModel(p_segment, segments_per_route)); });
}

kb_status kb_frameset_load(const char* manifest_path, const char* regions_path, kb_frameset** out) {
  if (!manifest_path) return null_argument("manifest_path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<kb_frameset>();
    if (regions_path) {
      auto ds = kerbside::load_dataset(manifest_path, regions_path);
      handle->frames = std::move(ds.frames);
      handle->unassigned = ds.unassigned;
    } else {
      handle->frames = kerbside::load_manifest(manifest_path);
    }
    *out = handle.release();
  });
}

size_t kb_frameset_size(const kb_frameset* frames) { return frames ? frames->frames.size() : 0; }
size_t kb_frameset_unassigned(const kb_frameset* frames) { return frames ? frames->unassigned : 0; }

kb_status kb_frameset_distribution_csv(const kb_frameset* frames, char** out_csv) {
  if (!frames) return null_argument("frames");
  if (!out_csv) return null_argument("out_csv");
  return guarded([&] {
    const auto csv = kerbside::write_distribution_csv(kerbside::class_distribution(frames->frames));
    *out_csv = dup_string(csv);
    if (!*out_csv) throw std::bad_alloc();
  });
}

void kb_frameset_free(kb_frameset* frames) { delete frames; }

kb_status kb_run(const char* config_json, char** out_summary) {
  if (!config_json) return null_argument("config_json");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw kerbside::ParseError(0, e.byte, std::string("run config: ") + e.what());
    }
    const auto summary = kerbside::run(kerbside::RunConfig::from_json(j));
    if (out_summary) {
      *out_summary = dup_string(summary.dump(2));
      if (!*out_summary) throw std::bad_alloc();
    }
  });
}

kb_status kb_service_open(const char* config_json, kb_service** out) {
  if (!config_json) return null_argument("config_json");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto j = nlohmann::json::parse(config_json);
    if (j.is_object() && !j.contains("command")) j["command"] = "serve";
    const auto cfg = kerbside::RunConfig::from_json(j);
    if (cfg.command != kerbside::Command::Serve) {
      throw kerbside::Error(kerbside::ErrorCode::Config, "service config must have command \"serve\"");
    }
    cfg.validate();
    kerbside::ServiceOptions options;
    options.manifest = cfg.manifest;
    options.regions = cfg.regions;
    options.image_root = cfg.image_root;
    options.labels = cfg.labels.empty() ? std::string("labels.ndjson") : cfg.labels;
    options.static_dir = cfg.static_dir;
    options.segmentation = cfg.segmentation;
    auto handle = std::make_unique<kb_service>();
    handle->service = std::make_unique<kerbside::AnnotationService>(options);
    *out = handle.release();
  });
}

kb_status kb_service_bind(kb_service* service, const char* host, int port, int* out_port) {
  if (!service) return null_argument("service");
  return guarded([&] {
    const int bound = service->service->bind(host ? host : "127.0.0.1", port);
    if (out_port) *out_port = bound;
  });
}

kb_status kb_service_listen(kb_service* service) {
  if (!service) return null_argument("service");
  return guarded([&] { service->service->listen(); });
}

void kb_service_stop(kb_service* service) {
  if (service) service->service->stop();
}

void kb_service_free(kb_service* service) { delete service; }

}  // extern "C"
