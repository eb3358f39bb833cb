#include "kerbside/segments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"
#include "kerbside/geo.hpp"

namespace kerbside {
namespace {

Segment make_segment(std::string id, const FrameSet& frames, std::vector<std::size_t> members,
                     const CollapseTable& collapse) {
  Segment s;
  s.segment_id = std::move(id);
  std::vector<SurfaceClass> truth;
  for (auto i : members) {
    s.frame_ids.push_back(frames[i].frame_id);
    s.geometry.push_back(frames[i].location);
    truth.push_back(*frames[i].true_label);
  }
  s.frame_indices = std::move(members);
  s.true_class = aggregate_label(truth, collapse);
  return s;
}

}  // namespace

std::vector<Segment> derive_segments(const FrameSet& frames, const SegmentationOptions& options) {
  std::size_t unlabeled = 0;
  for (const auto& f : frames.frames()) unlabeled += !f.true_label;
  if (unlabeled) {
    throw Error(ErrorCode::UnlabeledFrames, std::to_string(unlabeled) + " frame(s) have no label");
  }

  const CollapseTable& collapse = options.collapse;
  std::vector<Segment> segments;

  // Explicit ids: FrameSet order already groups by segment_id, then time.
  std::map<std::string, std::vector<std::size_t>> explicit_groups;
  std::vector<std::size_t> unsegmented;
  for (auto i : frames.time_order()) {
    const Frame& f = frames[i];
    if (f.segment_id) {
      auto& group = explicit_groups[*f.segment_id];
      if (*f.true_label != SurfaceClass::Transition) group.push_back(i);
    } else {
      unsegmented.push_back(i);
    }
  }
  for (auto& [id, members] : explicit_groups) {
    if (!members.empty()) segments.push_back(make_segment(id, frames, std::move(members), collapse));
  }

  std::size_t auto_id = 0;
  std::vector<std::size_t> current;
  auto flush = [&] {
    if (current.empty()) return;
    char id[32];
    std::snprintf(id, sizeof id, "auto-%05zu", ++auto_id);
    segments.push_back(make_segment(id, frames, std::move(current), collapse));
    current.clear();
  };
  const Frame* prev = nullptr;
  for (auto i : unsegmented) {
    const Frame& f = frames[i];
    if (*f.true_label == SurfaceClass::Transition) {
      flush();
      prev = &f;
      continue;
    }
    if (prev && (f.timestamp_ms - prev->timestamp_ms > options.max_gap_ms ||
                 geo::distance_m(prev->location, f.location) > options.max_jump_m)) {
      flush();
    }
    current.push_back(i);
    prev = &f;
  }
  flush();

  if (segments.empty()) {
    throw Error(ErrorCode::NoSegmentableFrames, "no segmentable frames (all frames are transitions)");
  }
  return segments;
}

Vote tally(std::span<const SurfaceClass> labels, const CollapseTable& collapse) {
  Vote v;
  for (auto c : labels) {
    if (c == SurfaceClass::Transition) continue;
    ++v.counts[index_of(c)];
    ++v.voters;
  }
  auto better = [&](SurfaceClass a, SurfaceClass b) {
    const auto ca = v.counts[index_of(a)];
    const auto cb = v.counts[index_of(b)];
    if (ca != cb) return ca > cb;
    const bool ia = collapse(a) == Accessibility::Inaccessible;
    const bool ib = collapse(b) == Accessibility::Inaccessible;
    if (ia != ib) return ia;
    return index_of(a) < index_of(b);
  };
  SurfaceClass best = kSurfaceClasses.front();
  for (auto c : kSurfaceClasses) {
    if (better(c, best)) best = c;
  }
  v.winner = best;
  std::size_t runner_up = 0;
  for (auto c : kSurfaceClasses) {
    if (c != best) runner_up = std::max(runner_up, v.counts[index_of(c)]);
  }
  if (v.voters) {
    v.margin = static_cast<double>(v.counts[index_of(best)] - runner_up) / static_cast<double>(v.voters);
  }
  return v;
}

SurfaceClass aggregate_label(std::span<const SurfaceClass> labels, const CollapseTable& collapse) {
  if (labels.empty()) throw Error(ErrorCode::EmptySequence, "aggregate_label of empty list");
  const Vote v = tally(labels, collapse);
  if (v.voters == 0) throw Error(ErrorCode::OnlyTransitions, "aggregate_label: only transition labels");
  return v.winner;
}

StreetwiseResult streetwise_report(std::vector<Segment> segments, const PredictionSet& predictions,
                                   const CollapseTable& collapse) {
  StreetwiseResult out;
  ConfusionMatrix m;
  for (auto& s : segments) {
    std::vector<SurfaceClass> predicted;
    predicted.reserve(s.frame_ids.size());
    for (const auto& id : s.frame_ids) {
      auto it = predictions.find(id);
      if (it == predictions.end()) {
        throw Error(ErrorCode::MissingPredictions,
                    "segment '" + s.segment_id + "' has no prediction for frame '" + id + "'");
      }
      predicted.push_back(it->second.label);
    }
    // A segment predicted entirely as Transition falls to the tie-break (fail-safe).
    const Vote v = tally(predicted, collapse);
    s.predicted_class = v.winner;
    s.vote_margin = v.margin;
    m.add(s.true_class, v.winner);
  }
  if (segments.empty()) throw Error(ErrorCode::EmptyInput, "streetwise_report without segments");
  out.report = metrics(m);
  out.report.fold_id = "streetwise";
  out.segments = std::move(segments);
  return out;
}

BinaryReport binary_report(std::span<const Accessibility> truth, std::span<const Accessibility> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::LengthMismatch, "binary_report: length mismatch");
  }
  BinaryReport r;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Accessibility::Excluded || predicted[i] == Accessibility::Excluded) continue;
    const int t = truth[i] == Accessibility::Accessible ? 0 : 1;
    const int p = predicted[i] == Accessibility::Accessible ? 0 : 1;
    ++r.confusion[t][p];
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyInput, "binary_report without segments");
  const double tp = static_cast<double>(r.confusion[0][0]);
  const double fp = static_cast<double>(r.confusion[1][0]);
  const double fn = static_cast<double>(r.confusion[0][1]);
  r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.accuracy = static_cast<double>(r.confusion[0][0] + r.confusion[1][1]) / static_cast<double>(n);
  return r;
}

BinaryReport binary_report(std::span<const Segment> segments, const CollapseTable& collapse) {
  std::vector<Accessibility> truth;
  std::vector<Accessibility> predicted;
  for (const auto& s : segments) {
    if (!s.predicted_class) {
      throw Error(ErrorCode::MissingPredictions, "segment '" + s.segment_id + "' has no predicted class");
    }
    truth.push_back(collapse(s.true_class));
    predicted.push_back(collapse(*s.predicted_class));
  }
  return binary_report(truth, predicted);
}

RouteModel::RouteModel(double p_segment, int segments_per_route) : p_(p_segment), k_(segments_per_route) {
  if (!(p_segment >= 0.0 && p_segment <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "p_segment must lie in [0,1]");
  }
  if (segments_per_route < 0) {
    throw Error(ErrorCode::InvalidArgument, "segments_per_route must be >= 0");
  }
}

double route_accuracy(const RouteModel& model) {
  double result = 1.0;
  for (int i = 0; i < model.segments_per_route(); ++i) result *= model.p_segment();
  return result;
}

nlohmann::json segments_to_json(std::span<const Segment> segments, const CollapseTable& collapse) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : segments) {
    nlohmann::json j = {{"id", s.segment_id},
                        {"n_frames", s.frame_ids.size()},
                        {"true_class", canonical_name(s.true_class)},
                        {"true_accessible", collapse(s.true_class) == Accessibility::Accessible}};
    if (s.predicted_class) {
      j["predicted_class"] = canonical_name(*s.predicted_class);
      j["predicted_accessible"] = collapse(*s.predicted_class) == Accessibility::Accessible;
      j["vote_margin"] = s.vote_margin;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

nlohmann::json binary_report_to_json(const BinaryReport& r) {
  return {{"classes", {"accessible", "inaccessible"}},
          {"confusion", {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}}},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"accuracy", r.accuracy}};
}

std::string binary_confusion_csv(const BinaryReport& r) {
  std::string out = "true\\predicted,accessible,inaccessible\n";
  out += "accessible," + std::to_string(r.confusion[0][0]) + "," + std::to_string(r.confusion[0][1]) + "\n";
  out += "inaccessible," + std::to_string(r.confusion[1][0]) + "," + std::to_string(r.confusion[1][1]) + "\n";
  return out;
}

}  // namespace kerbside
