#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerbside/classifier.hpp"
#include "kerbside/eval.hpp"
#include "kerbside/taxonomy.hpp"

namespace kerbside {

struct SegmentationOptions {
  std::int64_t max_gap_ms = 5000;  // a larger gap between consecutive frames starts a new segment
  double max_jump_m = 10.0;        // a larger GPS jump starts a new segment
  CollapseTable collapse;          // drives the tie-break of the ground-truth vote
};

struct Segment {
  std::string segment_id;
  std::vector<std::string> frame_ids;     // capture order, Transition frames excluded
  std::vector<std::size_t> frame_indices; // into the FrameSet the segment was derived from
  SurfaceClass true_class = SurfaceClass::Asphalt;
  std::optional<SurfaceClass> predicted_class;
  double vote_margin = 0.0;  // of the predicted vote
  std::vector<GeoPoint> geometry;
};

// Frames with a segment_id are grouped by it. The remaining frames are split in
// capture order at Transition runs, time gaps and GPS jumps. Transition-labelled
// frames belong to no segment. Throws UnlabeledFrames, NoSegmentableFrames.
std::vector<Segment> derive_segments(const FrameSet& frames, const SegmentationOptions& options = {});

struct Vote {
  SurfaceClass winner = SurfaceClass::Asphalt;
  std::array<std::size_t, kNumClasses> counts{};
  std::size_t voters = 0;  // non-Transition labels
  double margin = 0.0;     // (winner - runner-up) / voters, 0 when voters == 0
};

// Plurality over non-Transition labels. Ties prefer a class that collapses to
// Inaccessible, then canonical order. With no voters the tie-break alone decides.
Vote tally(std::span<const SurfaceClass> labels, const CollapseTable& collapse = {});

// Throws EmptySequence for an empty list and OnlyTransitions when nothing is left.
SurfaceClass aggregate_label(std::span<const SurfaceClass> labels, const CollapseTable& collapse = {});

struct StreetwiseResult {
  std::vector<Segment> segments;  // with predicted_class and vote_margin filled in
  EvaluationReport report;        // five surface classes; Transition never occurs
};

// Throws MissingPredictions naming the first segment with an unpredicted frame.
StreetwiseResult streetwise_report(std::vector<Segment> segments, const PredictionSet& predictions,
                                   const CollapseTable& collapse = {});

struct BinaryReport {
  // [truth][predicted], index 0 = accessible, 1 = inaccessible
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  double precision = 0.0;  // of the Accessible class
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

// Segment labels are aggregated first and collapsed afterwards.
BinaryReport binary_report(std::span<const Segment> segments, const CollapseTable& collapse = {});
BinaryReport binary_report(std::span<const Accessibility> truth, std::span<const Accessibility> predicted);

class RouteModel {
 public:
  // Throws InvalidArgument for p outside [0,1] or a negative segment count.
  RouteModel(double p_segment, int segments_per_route);
  double p_segment() const { return p_; }
  int segments_per_route() const { return k_; }

 private:
  double p_;
  int k_;
};

// p_segment ^ segments_per_route: every segment of the route classified correctly.
double route_accuracy(const RouteModel& model);

nlohmann::json segments_to_json(std::span<const Segment> segments, const CollapseTable& collapse = {});
nlohmann::json binary_report_to_json(const BinaryReport& report);
std::string binary_confusion_csv(const BinaryReport& report);

}  // namespace kerbside
