#include "kerbside/eval.hpp"

#include <algorithm>
#include <map>

#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"

namespace kerbside {

std::string protocol_name(const SplitProtocol& protocol) {
  struct Visitor {
    std::string operator()(const Conservative&) const { return "conservative"; }
    std::string operator()(const LeaveOneRegionOut&) const { return "loro"; }
    std::string operator()(const CrossCity&) const { return "cross-city"; }
  };
  return std::visit(Visitor{}, protocol);
}

std::vector<std::vector<std::string>> default_pairs(const std::vector<std::string>& region_ids) {
  if (region_ids.size() % 2 != 0) {
    throw Error(ErrorCode::Config, "conservative protocol needs explicit pairs: " +
                                       std::to_string(region_ids.size()) +
                                       " regions cannot be paired consecutively");
  }
  std::vector<std::vector<std::string>> pairs;
  for (std::size_t i = 0; i < region_ids.size(); i += 2) {
    pairs.push_back({region_ids[i], region_ids[i + 1]});
  }
  return pairs;
}

namespace {

std::map<std::string, std::size_t> frames_per_region(const FrameSet& frames) {
  std::map<std::string, std::size_t> counts;
  for (const auto& f : frames.frames()) {
    if (f.region_id) ++counts[*f.region_id];
  }
  return counts;
}

class RegionCheck {
 public:
  explicit RegionCheck(const FrameSet& frames) : frames_(frames), counts_(frames_per_region(frames)) {}

  void require(const std::string& region) const {
    const bool declared = frames_.regions().empty() ? counts_.count(region) > 0
                                                    : frames_.regions().find(region) != nullptr;
    if (!declared) throw Error(ErrorCode::UnknownRegion, "unknown region '" + region + "'");
    if (!counts_.count(region)) {
      throw Error(ErrorCode::EmptyRegion, "region '" + region + "' has no frames");
    }
  }

 private:
  const FrameSet& frames_;
  std::map<std::string, std::size_t> counts_;
};

void check_fold(const Fold& fold) {
  for (const auto& r : fold.test_regions) {
    if (fold.train_regions.count(r)) {
      throw Error(ErrorCode::OverlapViolation,
                  "fold '" + fold.fold_id + "' tests and trains on region '" + r + "'");
    }
  }
}

}  // namespace

std::vector<Fold> make_folds(const FrameSet& frames, const SplitProtocol& protocol) {
  const RegionCheck check(frames);
  std::vector<Fold> folds;

  if (const auto* cons = std::get_if<Conservative>(&protocol)) {
    if (cons->pairs.empty()) throw Error(ErrorCode::Config, "conservative protocol without pairs");
    std::set<std::string> scope;
    for (const auto& group : cons->pairs) {
      if (group.empty()) throw Error(ErrorCode::Config, "empty region group in conservative pairs");
      for (const auto& r : group) {
        check.require(r);
        if (!scope.insert(r).second) {
          throw Error(ErrorCode::Config, "region '" + r + "' appears in more than one pair");
        }
      }
    }
    for (std::size_t i = 0; i < cons->pairs.size(); ++i) {
      Fold fold;
      fold.fold_id = "S" + std::to_string(i + 1);
      fold.test_regions.insert(cons->pairs[i].begin(), cons->pairs[i].end());
      for (const auto& r : scope) {
        if (!fold.test_regions.count(r)) fold.train_regions.insert(r);
      }
      folds.push_back(std::move(fold));
    }
  } else if (const auto* loro = std::get_if<LeaveOneRegionOut>(&protocol)) {
    if (loro->regions.size() < 2) {
      throw Error(ErrorCode::Config, "leave-one-region-out needs at least two regions");
    }
    std::set<std::string> scope;
    for (const auto& r : loro->regions) {
      check.require(r);
      if (!scope.insert(r).second) throw Error(ErrorCode::Config, "region '" + r + "' listed twice");
    }
    for (const auto& r : loro->regions) {
      Fold fold;
      fold.fold_id = r;
      fold.test_regions.insert(r);
      for (const auto& other : scope) {
        if (other != r) fold.train_regions.insert(other);
      }
      folds.push_back(std::move(fold));
    }
  } else {
    const auto& cross = std::get<CrossCity>(protocol);
    if (cross.cities.size() < 2) throw Error(ErrorCode::Config, "cross-city needs at least two cities");
    std::map<std::string, std::vector<std::string>> by_city;
    for (const auto& city : cross.cities) {
      if (by_city.count(city)) throw Error(ErrorCode::Config, "city '" + city + "' listed twice");
      auto ids = frames.regions().region_ids_in_city(city);
      if (ids.empty()) throw Error(ErrorCode::UnknownRegion, "unknown city '" + city + "'");
      for (const auto& r : ids) check.require(r);
      by_city[city] = std::move(ids);
    }
    for (const auto& city : cross.cities) {
      Fold fold;
      fold.fold_id = city;
      for (const auto& [other, ids] : by_city) {
        (other == city ? fold.test_regions : fold.train_regions).insert(ids.begin(), ids.end());
      }
      folds.push_back(std::move(fold));
    }
  }

  for (const auto& fold : folds) check_fold(fold);
  return folds;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts_) {
    for (auto v : row) t += v;
  }
  return t;
}

std::size_t ConfusionMatrix::support(SurfaceClass c) const {
  std::size_t t = 0;
  for (auto v : counts_[index_of(c)]) t += v;
  return t;
}

std::size_t ConfusionMatrix::predicted_count(SurfaceClass c) const {
  std::size_t t = 0;
  for (const auto& row : counts_) t += row[index_of(c)];
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    for (std::size_t j = 0; j < kNumClasses; ++j) counts_[i][j] += other.counts_[i][j];
  }
  return *this;
}

ConfusionMatrix confusion(std::span<const SurfaceClass> truth, std::span<const SurfaceClass> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::LengthMismatch, "confusion: " + std::to_string(truth.size()) +
                                               " truths vs " + std::to_string(predicted.size()) +
                                               " predictions");
  }
  if (truth.empty()) throw Error(ErrorCode::EmptyInput, "confusion of empty input");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
  return m;
}

EvaluationReport metrics(const ConfusionMatrix& matrix, const MetricsOptions& options) {
  if (matrix.total() == 0) throw Error(ErrorCode::EmptyMatrix, "metrics of an empty confusion matrix");
  EvaluationReport report;
  report.confusion = matrix;
  double f1_sum = 0.0;
  std::size_t averaged = 0;
  for (auto c : kAllClasses) {
    const double tp = static_cast<double>(matrix.at(c, c));
    const double predicted = static_cast<double>(matrix.predicted_count(c));
    const std::size_t support = matrix.support(c);
    ClassMetrics& m = report.per_class[index_of(c)];
    m.support = support;
    m.precision = predicted > 0 ? tp / predicted : 0.0;
    m.recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    const bool include = support > 0 && (options.include_transition || c != SurfaceClass::Transition);
    report.in_macro[index_of(c)] = include;
    if (include) {
      f1_sum += m.f1;
      ++averaged;
    }
  }
  report.macro_f1 = averaged ? f1_sum / static_cast<double>(averaged) : 0.0;
  return report;
}

FoldClassifier oracle_classifier(const FrameSet& frames) {
  return [&frames](std::span<const std::size_t>, std::span<const std::size_t> test) {
    std::vector<Prediction> out;
    out.reserve(test.size());
    for (auto i : test) out.push_back({frames[i].true_label.value(), 1.0});
    return out;
  };
}

FoldClassifier constant_classifier(SurfaceClass label) {
  return [label](std::span<const std::size_t>, std::span<const std::size_t> test) {
    return std::vector<Prediction>(test.size(), Prediction{label, 1.0});
  };
}

FoldClassifier knn_fold_classifier(const FrameSet& frames, const std::vector<FeatureVector>& features, int k) {
  return [&frames, &features, k](std::span<const std::size_t> train, std::span<const std::size_t> test) {
    std::vector<LabeledFeatures> training;
    training.reserve(train.size());
    for (auto i : train) training.push_back({features[i], frames[i].true_label.value()});
    const KnnClassifier knn(std::move(training), k);
    std::vector<Prediction> out(test.size());
    for (std::size_t t = 0; t < test.size(); ++t) out[t] = knn.predict(features[test[t]]);
    return out;
  };
}

FoldClassifier imported_classifier(const FrameSet& frames, const PredictionSet& predictions) {
  return [&frames, &predictions](std::span<const std::size_t>, std::span<const std::size_t> test) {
    std::vector<Prediction> out;
    out.reserve(test.size());
    for (auto i : test) {
      auto it = predictions.find(frames[i].frame_id);
      if (it == predictions.end()) {
        throw Error(ErrorCode::MissingPredictions, "no prediction for frame '" + frames[i].frame_id + "'");
      }
      out.push_back(it->second);
    }
    return out;
  };
}

ProtocolResult run_protocol(const FrameSet& frames, const SplitProtocol& protocol,
                            const FoldClassifier& classify, const MetricsOptions& options) {
  const auto folds = make_folds(frames, protocol);

  std::map<std::string, std::vector<std::size_t>> by_region;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].region_id) by_region[*frames[i].region_id].push_back(i);
  }
  auto collect = [&](const std::set<std::string>& regions) {
    std::vector<std::size_t> idx;
    for (const auto& r : regions) {
      auto it = by_region.find(r);
      if (it != by_region.end()) idx.insert(idx.end(), it->second.begin(), it->second.end());
    }
    std::sort(idx.begin(), idx.end());
    return idx;
  };

  std::size_t unlabeled = 0;
  for (const auto& fold : folds) {
    for (auto i : collect(fold.test_regions)) unlabeled += !frames[i].true_label;
  }
  if (unlabeled) {
    throw Error(ErrorCode::UnlabeledFrames,
                std::to_string(unlabeled) + " in-scope frame(s) have no ground-truth label");
  }

  ProtocolResult result;
  result.protocol = protocol_name(protocol);
  ConfusionMatrix pooled;
  double fold_sum = 0.0;
  for (const auto& fold : folds) {
    const auto train = collect(fold.train_regions);
    const auto test = collect(fold.test_regions);
    for (auto i : train) {
      if (!frames[i].true_label) {
        throw Error(ErrorCode::UnlabeledFrames, "training frame '" + frames[i].frame_id + "' has no label");
      }
    }
    const auto preds = classify(train, test);
    if (preds.size() != test.size()) {
      throw Error(ErrorCode::Internal, "classifier returned the wrong number of predictions");
    }
    ConfusionMatrix m;
    for (std::size_t t = 0; t < test.size(); ++t) {
      m.add(*frames[test[t]].true_label, preds[t].label);
      result.predictions[frames[test[t]].frame_id] = preds[t];
    }
    FoldResult fr{fold, test, metrics(m, options)};
    fr.report.protocol = result.protocol;
    fr.report.fold_id = fold.fold_id;
    fold_sum += fr.report.macro_f1;
    pooled += m;
    result.folds.push_back(std::move(fr));
  }
  result.pooled = metrics(pooled, options);
  result.pooled.protocol = result.protocol;
  result.pooled.fold_id = "pooled";
  result.mean_fold_macro_f1 = fold_sum / static_cast<double>(result.folds.size());
  return result;
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  nlohmann::json matrix = nlohmann::json::array();
  nlohmann::json per_class = nlohmann::json::object();
  for (auto t : kAllClasses) {
    classes.push_back(canonical_name(t));
    nlohmann::json row = nlohmann::json::array();
    for (auto p : kAllClasses) row.push_back(report.confusion.at(t, p));
    matrix.push_back(row);
    const auto& m = report.per_class[index_of(t)];
    per_class[std::string(canonical_name(t))] = {{"precision", m.precision},
                                                 {"recall", m.recall},
                                                 {"f1", m.f1},
                                                 {"support", m.support},
                                                 {"in_macro", report.in_macro[index_of(t)]}};
  }
  return {{"protocol", report.protocol}, {"fold_id", report.fold_id}, {"classes", classes},
          {"confusion", matrix},         {"per_class", per_class},    {"macro_f1", report.macro_f1},
          {"total", report.confusion.total()}};
}

nlohmann::json protocol_result_to_json(const ProtocolResult& result) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : result.folds) {
    folds.push_back({{"fold_id", f.fold.fold_id},
                     {"test_regions", f.fold.test_regions},
                     {"train_regions", f.fold.train_regions},
                     {"n_test", f.test_frames.size()},
                     {"report", report_to_json(f.report)}});
  }
  return {{"protocol", result.protocol},
          {"folds", folds},
          {"pooled", report_to_json(result.pooled)},
          {"mean_fold_macro_f1", result.mean_fold_macro_f1}};
}

std::string confusion_csv(const ConfusionMatrix& matrix, std::span<const SurfaceClass> classes) {
  std::vector<std::string> header = {"true\\predicted"};
  for (auto c : classes) header.emplace_back(canonical_name(c));
  std::string out = csv::join(header) + "\n";
  for (auto t : classes) {
    std::vector<std::string> row = {std::string(canonical_name(t))};
    for (auto p : classes) row.push_back(std::to_string(matrix.at(t, p)));
    out += csv::join(row) + "\n";
  }
  return out;
}

}  // namespace kerbside
