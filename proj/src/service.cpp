#include "kerbside/service.hpp"

#include <httplib.h>

#include <fstream>
#include <iterator>
#include <mutex>
#include <nlohmann/json.hpp>

#include "kerbside/annotation.hpp"
#include "kerbside/error.hpp"
#include "kerbside/geojson.hpp"
#include "kerbside/image.hpp"
#include "kerbside/ingest.hpp"

namespace kerbside {

namespace {

using json = nlohmann::json;

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownBatch:
    case ErrorCode::UnknownFrameId:
    case ErrorCode::MissingImage:
      return 404;
    case ErrorCode::Internal:
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", code}, {"message", message}}.dump(), "application/json");
}

std::size_t as_index(const json& v, const char* key) {
  const auto& x = v.at(key);
  if (!x.is_number_integer() || x.get<std::int64_t>() < 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a non-negative integer");
  }
  return x.get<std::size_t>();
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

struct AnnotationService::Impl {
  ServiceOptions options;
  FrameSet base;
  std::mutex mu;  // guards store and issued
  LabelStore store;
  std::map<std::string, AnnotationBatch> issued;
  httplib::Server server;

  FrameSet labelled_view() { return with_labels(base, store); }

  json batch_json(const AnnotationBatch& b) const {
    json urls = json::array();
    for (const auto& id : b.frame_ids) urls.push_back("/api/frames/" + percent_encode(id) + "/image");
    json classes = json::array();
    for (auto c : kAllClasses) classes.push_back(canonical_name(c));
    return {{"batch_id", b.batch_id}, {"frame_ids", b.frame_ids}, {"image_urls", urls}, {"classes", classes}};
  }

  void next_batch(const httplib::Request& req, httplib::Response& res) {
    int max = 12;
    if (req.has_param("max")) {
      const std::string v = req.get_param_value("max");
      try {
        std::size_t used = 0;
        max = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "max must be an integer");
      }
    }
    std::lock_guard lock(mu);
    const auto batches = propose_batches(labelled_view(), max, options.segmentation);
    if (batches.empty()) {
      res.status = 204;
      return;
    }
    issued[batches.front().batch_id] = batches.front();
    res.set_content(batch_json(batches.front()).dump(), "application/json");
  }

  void post_labels(const httplib::Request& req, httplib::Response& res) {
    const std::string batch_id = req.matches[1];
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("request body: ") + e.what());
    }
    std::vector<LabelDecision> decisions;
    std::string annotator;
    try {
      for (const auto& d : body.at("decisions")) {
        decisions.push_back({as_index(d, "start"), as_index(d, "end"),
                             parse_surface_class(d.at("label").get<std::string>())});
      }
      annotator = body.value("annotator", std::string("ui"));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("request body: ") + e.what());
    }
    std::lock_guard lock(mu);
    auto it = issued.find(batch_id);
    if (it == issued.end()) throw Error(ErrorCode::UnknownBatch, "unknown batch '" + batch_id + "'");
    apply_labels(store, it->second, std::move(decisions), annotator, now_ms());
    issued.erase(it);
    res.status = 204;
  }

  void frame_image(const httplib::Request& req, httplib::Response& res) {
    const std::string frame_id = req.matches[1];
    const Frame* f = base.find(frame_id);
    if (!f) throw Error(ErrorCode::UnknownFrameId, "unknown frame '" + frame_id + "'");
    const auto path = options.image_root / f->image_ref;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingImage, "image for frame '" + frame_id + "' is missing");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto type = sniff_content_type(
        std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    res.set_content(std::move(bytes), type);
  }

  void progress(httplib::Response& res) {
    std::lock_guard lock(mu);
    const FrameSet view = labelled_view();
    std::vector<SurfaceClass> labels;
    for (auto i : view.time_order()) {
      if (view[i].true_label) labels.push_back(*view[i].true_label);
    }
    const double mean = labels.empty() ? 0.0 : run_length_stats(labels).mean_run_length;
    res.set_content(json{{"labeled", labels.size()}, {"total", view.size()}, {"mean_run_length", mean}}.dump(),
                    "application/json");
  }

  void export_map(httplib::Response& res) {
    std::vector<Frame> labelled;
    {
      std::lock_guard lock(mu);
      const FrameSet view = labelled_view();
      for (const auto& f : view.frames()) {
        if (f.true_label) labelled.push_back(f);
      }
    }
    std::vector<Segment> segments;
    try {
      segments = derive_segments(FrameSet(std::move(labelled)), options.segmentation);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoSegmentableFrames) throw;
    }
    res.set_content(accessibility_map(segments, options.segmentation.collapse).dump(),
                    "application/geo+json");
  }

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), error_code_name(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, error_code_name(ErrorCode::Internal), e.what());
      }
    };
  }

  void routes() {
    server.Get("/api/batches/next", guarded([this](const auto& req, auto& res) { next_batch(req, res); }));
    server.Post(R"(/api/batches/([^/]+)/labels)",
                guarded([this](const auto& req, auto& res) { post_labels(req, res); }));
    server.Get(R"(/api/frames/([^/]+)/image)", guarded([this](const auto& req, auto& res) { frame_image(req, res); }));
    server.Get("/api/progress", guarded([this](const auto&, auto& res) { progress(res); }));
    server.Get("/api/export/geojson", guarded([this](const auto&, auto& res) { export_map(res); }));
    if (!options.static_dir.empty()) {
      if (!server.set_mount_point("/", options.static_dir.string())) {
        throw Error(ErrorCode::Config, "static dir '" + options.static_dir.string() + "' does not exist");
      }
    }
  }
};

AnnotationService::AnnotationService(const ServiceOptions& options) : impl_(std::make_unique<Impl>()) {
  impl_->options = options;
  FrameSet frames = load_manifest(options.manifest);
  if (!options.regions.empty()) frames = assign_regions(std::move(frames), load_regions(options.regions)).frames;
  impl_->base = std::move(frames);
  impl_->store = LabelStore::open(options.labels);
  impl_->routes();
}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void AnnotationService::listen() { impl_->server.listen_after_bind(); }

void AnnotationService::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace kerbside
