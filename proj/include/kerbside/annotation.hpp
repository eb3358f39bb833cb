#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kerbside/segments.hpp"
#include "kerbside/taxonomy.hpp"

namespace kerbside {

struct LabelEvent {
  std::string frame_id;
  SurfaceClass label = SurfaceClass::Asphalt;
  std::string annotator;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const LabelEvent&, const LabelEvent&) = default;
};

// Append-only label log with a materialised last-write-wins view. When opened
// on a file, every append is written as one JSON line and flushed.
class LabelStore {
 public:
  LabelStore() = default;
  // Replays an existing log (if any) and appends to it. Throws Io, Parse.
  static LabelStore open(const std::filesystem::path& path);

  void append(const LabelEvent& event);

  std::span<const LabelEvent> log() const { return log_; }
  const std::map<std::string, SurfaceClass>& current() const { return current_; }
  std::optional<SurfaceClass> label_of(const std::string& frame_id) const;

  static std::map<std::string, SurfaceClass> replay(std::span<const LabelEvent> log);

 private:
  std::vector<LabelEvent> log_;
  std::map<std::string, SurfaceClass> current_;
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string label_event_to_ndjson(const LabelEvent& event);
LabelEvent label_event_from_ndjson(std::string_view line);

struct AnnotationBatch {
  std::string batch_id;
  std::vector<std::string> frame_ids;  // capture order
};

// Runs of consecutive unlabelled frames (capture order) split where
// derive_segments would split (time gap, GPS jump) or at a labelled frame,
// then chunked to max_batch. Throws InvalidArgument for max_batch < 1.
std::vector<AnnotationBatch> propose_batches(const FrameSet& frames, int max_batch,
                                             const SegmentationOptions& options = {});

// Half-open range [start, end) of batch positions.
struct LabelDecision {
  std::size_t start = 0;
  std::size_t end = 0;
  SurfaceClass label = SurfaceClass::Asphalt;
};

// Ranges from split points: splits {2} over a batch of 5 with labels {P, T}
// gives [0,2)=P and [2,5)=T. Throws InvalidArgument on a count mismatch.
std::vector<LabelDecision> decisions_from_splits(std::size_t batch_size, std::vector<std::size_t> splits,
                                                 std::span<const SurfaceClass> labels);

// Ranges must tile the batch exactly. Throws RangeGap, RangeOverlap.
void apply_labels(LabelStore& store, const AnnotationBatch& batch, std::vector<LabelDecision> decisions,
                  const std::string& annotator, std::int64_t timestamp_ms);

// Frames with their true_label replaced by the store's materialised view where present.
FrameSet with_labels(FrameSet frames, const LabelStore& store);

}  // namespace kerbside
