#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "kerbside/classifier.hpp"
#include "kerbside/error.hpp"
#include "kerbside/features.hpp"
#include "kerbside/image.hpp"
#include "kerbside/synth.hpp"
#include "support.hpp"

using namespace kbtest;

namespace {

FeatureVector fv(std::vector<double> v, std::string id = "test") { return {std::move(v), std::move(id)}; }

// Brute-force reference: sort all points by (distance, class, index), vote over the first k,
// break ties by the nearest member then canonical order.
Prediction reference_knn(const std::vector<LabeledFeatures>& train, const FeatureVector& q, int k) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> d;
  for (std::size_t i = 0; i < train.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < q.values.size(); ++j) {
      s += (train[i].features.values[j] - q.values[j]) * (train[i].features.values[j] - q.values[j]);
    }
    d.push_back({s, index_of(train[i].label), i});
  }
  std::sort(d.begin(), d.end());
  const std::size_t kk = std::min<std::size_t>(k, d.size());
  std::map<SurfaceClass, std::pair<int, double>> tally;
  for (std::size_t i = 0; i < kk; ++i) {
    const auto [dist, cls, idx] = d[i];
    auto& [votes, nearest] = tally.try_emplace(train[idx].label, 0, 1e300).first->second;
    ++votes;
    nearest = std::min(nearest, dist);
  }
  auto best = tally.begin();
  for (auto it = tally.begin(); it != tally.end(); ++it) {
    if (it->second.first > best->second.first ||
        (it->second.first == best->second.first && it->second.second < best->second.second)) {
      best = it;
    }
  }
  return {best->first, static_cast<double>(best->second.first) / static_cast<double>(kk)};
}

}  // namespace

TEST_CASE("single training point predicts its class") {
  const auto knn = train_knn({{fv({1, 2}), G}}, 1);
  for (double x : {-5.0, 0.0, 100.0}) {
    const auto p = knn.predict(fv({x, x}));
    CHECK(p.label == G);
    CHECK(p.confidence == 1.0);
  }
}

TEST_CASE("two near asphalt points outvote a far grass point") {
  const std::vector<LabeledFeatures> train = {{fv({0.1, 0}), A}, {fv({0, 0.2}), A}, {fv({5, 5}), G}};
  const auto p = train_knn(train, 3).predict(fv({0, 0}));
  CHECK(p.label == A);
  CHECK(p.confidence == doctest::Approx(2.0 / 3.0));
  CHECK(p == reference_knn(train, fv({0, 0}), 3));
}

TEST_CASE("vote ties go to the nearest member, then canonical order") {
  // k=3 with three different classes: one vote each, the nearest wins.
  const auto knn = train_knn({{fv({3}), A}, {fv({1}), P}, {fv({2}), C}}, 3);
  CHECK(knn.predict(fv({0})).label == P);
  // equal distances as well: lower canonical class wins
  const auto eq = train_knn({{fv({1}), P}, {fv({-1}), C}, {fv({5}), G}}, 1);
  CHECK(eq.predict(fv({0})).label == C);
  const auto eq3 = train_knn({{fv({1}), P}, {fv({-1}), C}, {fv({9}), G}}, 3);
  CHECK(eq3.predict(fv({0})).label == C);
}

TEST_CASE("training preconditions") {
  KB_CHECK_CODE(train_knn({}, 1), ErrorCode::EmptyTrainingSet);
  KB_CHECK_CODE(train_knn({{fv({1}), A}}, 2), ErrorCode::InvalidArgument);
  KB_CHECK_CODE(train_knn({{fv({1}), A}}, 0), ErrorCode::InvalidArgument);
  KB_CHECK_CODE(train_knn({{fv({1}, "x"), A}, {fv({1}, "y"), A}}, 1), ErrorCode::MixedDescriptors);
  KB_CHECK_CODE(train_knn({{fv({1}), A}}, 1).predict(fv({1}, "other")), ErrorCode::MixedDescriptors);
}

TEST_CASE("kNN agrees with a brute-force reference; zero distance dominates at k=1") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> d(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LabeledFeatures> train(1 + rng() % 40);
    for (auto& t : train) {
      // coarse grid so equal distances actually happen
      t.features = fv({std::round(d(rng) * 4), std::round(d(rng) * 4), std::round(d(rng) * 4)});
      t.label = kAllClasses[rng() % 6];
    }
    const int k = 1 + 2 * static_cast<int>(rng() % 4);
    const auto knn = train_knn(train, k);
    const auto q = fv({std::round(d(rng) * 4), std::round(d(rng) * 4), std::round(d(rng) * 4)});
    CHECK(knn.predict(q) == reference_knn(train, q, k));

    const auto& pick = train[rng() % train.size()];
    bool unique = std::count_if(train.begin(), train.end(),
                                [&](const auto& t) { return t.features == pick.features; }) == 1;
    if (unique) CHECK(train_knn(train, 1).predict(pick.features).label == pick.label);
  }
}

TEST_CASE("predict_frames is independent of ordering and of other frames") {
  TempDir dir;
  std::vector<Frame> frames;
  std::vector<LabeledFeatures> train;
  for (int i = 0; i < 12; ++i) {
    const auto cls = kSurfaceClasses[i % 5];
    Rng rng = Rng::stream(99, {static_cast<std::uint64_t>(i)});
    const Image img = texture(cls, TextureStyle{}, rng);
    auto f = frame("f" + std::to_string(i), i, 53, 8, cls);
    save_image(img, dir / f.image_ref, ImageFormat::Pgm);
    train.push_back({extract_features(preprocess(img)), cls});
    frames.push_back(f);
  }
  const auto knn = train_knn(train, 3);
  const FrameSet fs(frames);
  const auto base = predict_frames(knn, fs, dir.path());
  CHECK(base.size() == frames.size());

  std::mt19937 rng(1);
  std::shuffle(frames.begin(), frames.end(), rng);
  for (auto& f : frames) f.timestamp_ms = static_cast<std::int64_t>(rng() % 1000);
  CHECK(predict_frames(knn, FrameSet(frames), dir.path()) == base);

  // replace one frame's image; only its prediction may change
  save_image(Image(480, 640, 1, 3), dir / "images/f4.pgm", ImageFormat::Pgm);
  const auto changed = predict_frames(knn, fs, dir.path());
  for (const auto& [id, p] : base) {
    if (id != "f4") CHECK(changed.at(id) == p);
  }

  CHECK(predict_frames(knn, FrameSet(), dir.path()).empty());
  std::filesystem::remove(dir / "images/f7.pgm");
  KB_CHECK_CODE(predict_frames(knn, fs, dir.path()), ErrorCode::MissingImage);
}

TEST_CASE("prediction import") {
  const FrameSet fs({frame("a", 1, 53, 8), frame("b", 2, 53, 8), frame("c", 3, 53, 8)});
  const auto all = parse_predictions("frame_id,predicted_label,confidence\na,Pavement,0.9\nb,pavement,\nc,PAVEMENT,1\n", fs);
  CHECK(all.size() == fs.size());
  CHECK(all.at("a") == Prediction{P, 0.9});
  CHECK(all.at("b").confidence == 1.0);

  const auto two = parse_predictions("frame_id,predicted_label\na,grass\n", fs);
  CHECK(two.at("a") == Prediction{G, 1.0});
  CHECK(parse_predictions(write_predictions(all), fs) == all);

  KB_CHECK_CODE(parse_predictions("frame_id,predicted_label,confidence\nzz,grass,1\n", fs), ErrorCode::UnknownFrameId);
  KB_CHECK_CODE(parse_predictions("frame_id,predicted_label,confidence\na,grass,1.2\n", fs), ErrorCode::Parse);
  KB_CHECK_CODE(parse_predictions("frame_id,predicted_label,confidence\na,grass,-0.1\n", fs), ErrorCode::Parse);
  KB_CHECK_CODE(parse_predictions("frame_id,predicted_label,confidence\na,snow,1\n", fs), ErrorCode::Parse);
  KB_CHECK_CODE(parse_predictions("frame_id,label\na,grass\n", fs), ErrorCode::Parse);
  KB_CHECK_CODE(parse_predictions("frame_id,predicted_label\na,grass\na,asphalt\n", fs), ErrorCode::DuplicatePrediction);

  FrameSet copy = fs;
  apply_predictions(copy, all);
  CHECK(copy.find("a")->predicted_label == P);
  CHECK(copy.find("a")->confidence == doctest::Approx(0.9));
}
