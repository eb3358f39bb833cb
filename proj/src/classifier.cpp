#include "kerbside/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"
#include "kerbside/image.hpp"
#include "kerbside/parallel.hpp"
#include "kerbside/text.hpp"

namespace kerbside {

KnnClassifier::KnnClassifier(std::vector<LabeledFeatures> training, int k) : k_(k) {
  if (k < 1 || k % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "k must be a positive odd integer, got " + std::to_string(k));
  }
  if (training.empty()) throw Error(ErrorCode::EmptyTrainingSet, "training set is empty");
  descriptor_id_ = training.front().features.descriptor_id;
  dim_ = training.front().features.values.size();
  points_.reserve(training.size() * dim_);
  labels_.reserve(training.size());
  for (const auto& item : training) {
    if (item.features.descriptor_id != descriptor_id_ || item.features.values.size() != dim_) {
      throw Error(ErrorCode::MixedDescriptors, "training vectors mix descriptors '" + descriptor_id_ +
                                                   "' and '" + item.features.descriptor_id + "'");
    }
    points_.insert(points_.end(), item.features.values.begin(), item.features.values.end());
    labels_.push_back(item.label);
  }
}

Prediction KnnClassifier::predict(const FeatureVector& query) const {
  if (query.descriptor_id != descriptor_id_ || query.values.size() != dim_) {
    throw Error(ErrorCode::MixedDescriptors,
                "query descriptor '" + query.descriptor_id + "' does not match '" + descriptor_id_ + "'");
  }
  const std::size_t n = labels_.size();
  // (distance, class, index): equidistant points enter the neighbourhood in canonical class order.
  std::vector<std::tuple<double, std::size_t, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = points_.data() + i * dim_;
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double diff = p[j] - query.values[j];
      d2 += diff * diff;
    }
    dist[i] = {d2, index_of(labels_[i]), i};
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  std::array<int, kNumClasses> votes{};
  std::array<double, kNumClasses> nearest;
  nearest.fill(std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < k; ++i) {
    const auto [d2, c, idx] = dist[i];
    ++votes[c];
    nearest[c] = std::min(nearest[c], d2);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && nearest[c] < nearest[best])) {
      best = c;
    }
  }
  return {static_cast<SurfaceClass>(best), static_cast<double>(votes[best]) / static_cast<double>(k)};
}

KnnClassifier train_knn(std::vector<LabeledFeatures> training, int k) {
  return KnnClassifier(std::move(training), k);
}

std::vector<FeatureVector> compute_features(const FrameSet& frames,
                                            const std::filesystem::path& image_root) {
  std::vector<FeatureVector> out(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) {
    const Frame& f = frames[i];
    Image img;
    try {
      img = load_image(image_root / f.image_ref);
    } catch (const Error& e) {
      throw Error(ErrorCode::MissingImage, "frame '" + f.frame_id + "': " + e.what());
    }
    out[i] = extract_features(preprocess(img));
  });
  return out;
}

PredictionSet predict_frames(const KnnClassifier& classifier, const FrameSet& frames,
                             const std::filesystem::path& image_root) {
  const auto features = compute_features(frames, image_root);
  std::vector<Prediction> preds(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) { preds[i] = classifier.predict(features[i]); });
  PredictionSet out;
  for (std::size_t i = 0; i < frames.size(); ++i) out.emplace(frames[i].frame_id, preds[i]);
  return out;
}

PredictionSet parse_predictions(std::string_view text, const FrameSet& frames) {
  const auto records = csv::parse(text);
  if (records.empty()) throw ParseError(1, 1, "missing header row");
  const auto& header = records.front().fields;
  const bool has_confidence = header.size() == 3;
  if (header.size() < 2 || header.size() > 3 || header[0] != "frame_id" ||
      header[1] != "predicted_label" || (has_confidence && header[2] != "confidence")) {
    throw ParseError(records.front().line, 1,
                     "header must be 'frame_id,predicted_label,confidence'");
  }
  PredictionSet out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw ParseError(rec.line, 1, "expected " + std::to_string(header.size()) + " fields");
    }
    const std::string& id = rec.fields[0];
    if (!frames.find(id)) throw Error(ErrorCode::UnknownFrameId, "unknown frame_id '" + id + "'");
    Prediction p;
    try {
      p.label = parse_surface_class(rec.fields[1]);
    } catch (const Error& e) {
      throw ParseError(rec.line, 2, e.what());
    }
    if (has_confidence && !rec.fields[2].empty()) {
      const auto v = text::parse_double(rec.fields[2]);
      if (!v) throw ParseError(rec.line, 3, "confidence '" + rec.fields[2] + "' is not a number");
      if (*v < 0.0 || *v > 1.0) {
        throw ParseError(rec.line, 3, "confidence " + rec.fields[2] + " outside [0,1]");
      }
      p.confidence = *v;
    }
    if (!out.emplace(id, p).second) {
      throw Error(ErrorCode::DuplicatePrediction, "duplicate prediction for frame '" + id + "'");
    }
  }
  return out;
}

PredictionSet import_predictions(const std::filesystem::path& path, const FrameSet& frames) {
  return parse_predictions(csv::read_file(path), frames);
}

std::string write_predictions(const PredictionSet& predictions) {
  std::string out = "frame_id,predicted_label,confidence\n";
  for (const auto& [id, p] : predictions) {
    out += csv::join({id, std::string(canonical_name(p.label)), text::format_double(p.confidence)});
    out += '\n';
  }
  return out;
}

void apply_predictions(FrameSet& frames, const PredictionSet& predictions) {
  for (const auto& [id, p] : predictions) {
    const auto i = frames.index_of(id);
    if (!i) throw Error(ErrorCode::UnknownFrameId, "unknown frame_id '" + id + "'");
    frames.set_prediction(*i, p.label, p.confidence);
  }
}

}  // namespace kerbside
