#pragma once

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerbside/classifier.hpp"
#include "kerbside/taxonomy.hpp"

namespace kerbside {

// Adjacent regions are tested together and never trained with each other.
struct Conservative {
  std::vector<std::vector<std::string>> pairs;
};
struct LeaveOneRegionOut {
  std::vector<std::string> regions;
};
// Each city is tested against a model trained only on the other listed cities.
struct CrossCity {
  std::vector<std::string> cities;
};

using SplitProtocol = std::variant<Conservative, LeaveOneRegionOut, CrossCity>;

std::string protocol_name(const SplitProtocol& protocol);  // conservative | loro | cross-city

// Consecutive pairing (A,B), (C,D), ... Throws Config for an odd count.
std::vector<std::vector<std::string>> default_pairs(const std::vector<std::string>& region_ids);

struct Fold {
  std::string fold_id;
  std::set<std::string> test_regions;
  std::set<std::string> train_regions;
};

// Throws UnknownRegion, EmptyRegion, Config (pairs not disjoint) and
// OverlapViolation if a generated fold would leak test regions into training.
std::vector<Fold> make_folds(const FrameSet& frames, const SplitProtocol& protocol);

// rows = true class, columns = predicted class, canonical class order.
class ConfusionMatrix {
 public:
  void add(SurfaceClass truth, SurfaceClass predicted, std::size_t n = 1) {
    counts_[index_of(truth)][index_of(predicted)] += n;
  }
  std::size_t at(SurfaceClass truth, SurfaceClass predicted) const {
    return counts_[index_of(truth)][index_of(predicted)];
  }
  std::size_t total() const;
  std::size_t support(SurfaceClass c) const;         // row sum
  std::size_t predicted_count(SurfaceClass c) const;  // column sum

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts_{};
};

// Throws LengthMismatch, EmptyInput.
ConfusionMatrix confusion(std::span<const SurfaceClass> truth, std::span<const SurfaceClass> predicted);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricsOptions {
  // When false, Transition is left out of the macro average.
  bool include_transition = true;
};

struct EvaluationReport {
  ConfusionMatrix confusion;
  std::array<ClassMetrics, kNumClasses> per_class{};
  std::array<bool, kNumClasses> in_macro{};  // classes averaged into macro_f1
  double macro_f1 = 0.0;
  std::string protocol;
  std::string fold_id;
};

// Zero denominators give 0. macro_f1 averages classes with support > 0.
// Throws EmptyMatrix.
EvaluationReport metrics(const ConfusionMatrix& matrix, const MetricsOptions& options = {});

// Classifies frames[test] given frames[train]; returns one prediction per test index.
using FoldClassifier = std::function<std::vector<Prediction>(std::span<const std::size_t> train,
                                                             std::span<const std::size_t> test)>;

FoldClassifier oracle_classifier(const FrameSet& frames);
FoldClassifier constant_classifier(SurfaceClass label);
// kNN over precomputed features (indexed like frames), trained on each fold's train frames.
FoldClassifier knn_fold_classifier(const FrameSet& frames, const std::vector<FeatureVector>& features, int k);
// Looks predictions up by frame id; ignores the training split. Throws MissingPredictions.
FoldClassifier imported_classifier(const FrameSet& frames, const PredictionSet& predictions);

struct FoldResult {
  Fold fold;
  std::vector<std::size_t> test_frames;
  EvaluationReport report;
};

struct ProtocolResult {
  std::string protocol;
  std::vector<FoldResult> folds;
  EvaluationReport pooled;  // metrics of the summed fold matrices
  double mean_fold_macro_f1 = 0.0;
  PredictionSet predictions;  // every tested frame, from the fold that tested it
};

// Throws UnlabeledFrames if any in-scope frame lacks a ground-truth label.
ProtocolResult run_protocol(const FrameSet& frames, const SplitProtocol& protocol,
                            const FoldClassifier& classify, const MetricsOptions& options = {});

nlohmann::json report_to_json(const EvaluationReport& report);
nlohmann::json protocol_result_to_json(const ProtocolResult& result);

// Header "true\predicted,<class>..." then one row per class, restricted to `classes`.
std::string confusion_csv(const ConfusionMatrix& matrix, std::span<const SurfaceClass> classes);

}  // namespace kerbside
