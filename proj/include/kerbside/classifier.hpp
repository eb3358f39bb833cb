#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kerbside/features.hpp"
#include "kerbside/taxonomy.hpp"

namespace kerbside {

struct Prediction {
  SurfaceClass label = SurfaceClass::Asphalt;
  double confidence = 1.0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// frame_id -> prediction, iterated in frame_id order.
using PredictionSet = std::map<std::string, Prediction>;

struct LabeledFeatures {
  FeatureVector features;
  SurfaceClass label;
};

// Brute-force k-nearest-neighbour vote under Euclidean distance. Immutable
// once trained; safe to share across threads.
class KnnClassifier {
 public:
  // Throws EmptyTrainingSet, MixedDescriptors, or InvalidArgument for k < 1 or even k.
  KnnClassifier(std::vector<LabeledFeatures> training, int k);

  // Majority among the k nearest; ties go to the class with the closest member,
  // then to the lower canonical class. Points at equal distance enter the
  // neighbourhood in canonical class order. Confidence is winner votes / k.
  Prediction predict(const FeatureVector& query) const;

  int k() const { return k_; }
  std::size_t size() const { return labels_.size(); }
  const std::string& descriptor_id() const { return descriptor_id_; }

 private:
  int k_;
  std::string descriptor_id_;
  std::size_t dim_ = 0;
  std::vector<double> points_;  // size() x dim_, row-major
  std::vector<SurfaceClass> labels_;
};

KnnClassifier train_knn(std::vector<LabeledFeatures> training, int k);

// Loads, preprocesses and describes every frame's image (image_ref relative to
// image_root). Result is indexed like frames. Throws MissingImage.
std::vector<FeatureVector> compute_features(const FrameSet& frames,
                                            const std::filesystem::path& image_root);

// Each frame is classified from its own image only.
PredictionSet predict_frames(const KnnClassifier& classifier, const FrameSet& frames,
                             const std::filesystem::path& image_root);

// CSV with header frame_id,predicted_label[,confidence]; confidence defaults to 1.0.
// Throws ParseError, UnknownFrameId, DuplicatePrediction.
PredictionSet parse_predictions(std::string_view text, const FrameSet& frames);
PredictionSet import_predictions(const std::filesystem::path& path, const FrameSet& frames);
std::string write_predictions(const PredictionSet& predictions);

// Copies predictions onto the frames (predicted_label, confidence). Throws UnknownFrameId.
void apply_predictions(FrameSet& frames, const PredictionSet& predictions);

}  // namespace kerbside
