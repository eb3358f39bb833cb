#include "kerbside/annotation.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"
#include "kerbside/geo.hpp"

namespace kerbside {

std::string label_event_to_ndjson(const LabelEvent& e) {
  const nlohmann::json j = {{"frame_id", e.frame_id},
                            {"label", canonical_name(e.label)},
                            {"annotator", e.annotator},
                            {"timestamp_ms", e.timestamp_ms}};
  return j.dump();
}

LabelEvent label_event_from_ndjson(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    LabelEvent e;
    e.frame_id = j.at("frame_id").get<std::string>();
    e.label = parse_surface_class(j.at("label").get<std::string>());
    e.annotator = j.value("annotator", std::string{});
    e.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
    return e;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, 0, std::string("label log: ") + e.what());
  }
}

LabelStore LabelStore::open(const std::filesystem::path& path) {
  LabelStore store;
  if (std::filesystem::exists(path)) {
    const std::string text = csv::read_file(path);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      ++line_no;
      const std::string_view line(text.data() + pos, end - pos);
      pos = end + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        const LabelEvent e = label_event_from_ndjson(line);
        store.log_.push_back(e);
        store.current_[e.frame_id] = e.label;
      } catch (const Error& e) {
        throw ParseError(line_no, 1, e.what());
      }
    }
  } else if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  store.path_ = path;
  store.out_.open(path, std::ios::app | std::ios::binary);
  if (!store.out_) throw Error(ErrorCode::Io, "cannot open label log '" + path.string() + "'");
  return store;
}

void LabelStore::append(const LabelEvent& event) {
  if (out_.is_open()) {
    out_ << label_event_to_ndjson(event) << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::Io, "failed writing label log '" + path_.string() + "'");
  }
  log_.push_back(event);
  current_[event.frame_id] = event.label;
}

std::optional<SurfaceClass> LabelStore::label_of(const std::string& frame_id) const {
  auto it = current_.find(frame_id);
  if (it == current_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, SurfaceClass> LabelStore::replay(std::span<const LabelEvent> log) {
  std::map<std::string, SurfaceClass> view;
  for (const auto& e : log) view[e.frame_id] = e.label;
  return view;
}

std::vector<AnnotationBatch> propose_batches(const FrameSet& frames, int max_batch,
                                             const SegmentationOptions& options) {
  if (max_batch < 1) throw Error(ErrorCode::InvalidArgument, "max_batch must be >= 1");
  std::vector<AnnotationBatch> batches;
  AnnotationBatch current;
  const Frame* prev = nullptr;
  auto flush = [&] {
    if (current.frame_ids.empty()) return;
    current.batch_id = "batch-" + current.frame_ids.front() + "-" + std::to_string(current.frame_ids.size());
    batches.push_back(std::move(current));
    current = AnnotationBatch{};
  };
  for (auto i : frames.time_order()) {
    const Frame& f = frames[i];
    if (f.true_label) {
      flush();
      prev = nullptr;
      continue;
    }
    if (prev && (f.timestamp_ms - prev->timestamp_ms > options.max_gap_ms ||
                 geo::distance_m(prev->location, f.location) > options.max_jump_m)) {
      flush();
    }
    if (current.frame_ids.size() == static_cast<std::size_t>(max_batch)) flush();
    current.frame_ids.push_back(f.frame_id);
    prev = &f;
  }
  flush();
  return batches;
}

std::vector<LabelDecision> decisions_from_splits(std::size_t batch_size, std::vector<std::size_t> splits,
                                                 std::span<const SurfaceClass> labels) {
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
  if (labels.size() != splits.size() + 1) {
    throw Error(ErrorCode::InvalidArgument, "need one label per split range");
  }
  std::vector<LabelDecision> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= splits.size(); ++i) {
    const std::size_t end = i < splits.size() ? splits[i] : batch_size;
    if (end <= start || end > batch_size) {
      throw Error(ErrorCode::InvalidArgument, "split point outside the batch");
    }
    out.push_back({start, end, labels[i]});
    start = end;
  }
  return out;
}

void apply_labels(LabelStore& store, const AnnotationBatch& batch, std::vector<LabelDecision> decisions,
                  const std::string& annotator, std::int64_t timestamp_ms) {
  std::sort(decisions.begin(), decisions.end(),
            [](const LabelDecision& a, const LabelDecision& b) { return a.start < b.start; });
  const std::size_t n = batch.frame_ids.size();
  std::size_t covered = 0;
  for (const auto& d : decisions) {
    if (d.end <= d.start) throw Error(ErrorCode::RangeGap, "empty or inverted range");
    if (d.start < covered) {
      throw Error(ErrorCode::RangeOverlap, "range [" + std::to_string(d.start) + "," + std::to_string(d.end) +
                                               ") overlaps an earlier range");
    }
    if (d.start > covered) {
      throw Error(ErrorCode::RangeGap, "positions [" + std::to_string(covered) + "," + std::to_string(d.start) +
                                           ") are not labelled");
    }
    if (d.end > n) throw Error(ErrorCode::RangeOverlap, "range extends past the end of the batch");
    covered = d.end;
  }
  if (covered != n) {
    throw Error(ErrorCode::RangeGap,
                "positions [" + std::to_string(covered) + "," + std::to_string(n) + ") are not labelled");
  }
  for (const auto& d : decisions) {
    for (std::size_t i = d.start; i < d.end; ++i) {
      store.append({batch.frame_ids[i], d.label, annotator, timestamp_ms});
    }
  }
}

FrameSet with_labels(FrameSet frames, const LabelStore& store) {
  for (const auto& [id, label] : store.current()) {
    if (auto i = frames.index_of(id)) frames.set_true_label(*i, label);
  }
  return frames;
}

}  // namespace kerbside
