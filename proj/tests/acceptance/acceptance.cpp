// Acceptance suite: one PASS/FAIL line per criterion. Usage: acceptance <work-dir>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kerbside/error.hpp"
#include "kerbside/eval.hpp"
#include "kerbside/image.hpp"
#include "kerbside/ingest.hpp"
#include "kerbside/pipeline.hpp"
#include "kerbside/segments.hpp"

using namespace kerbside;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr auto A = SurfaceClass::Asphalt;
constexpr auto C = SurfaceClass::Cobblestone;
constexpr auto G = SurfaceClass::Grass;
constexpr auto U = SurfaceClass::GroundUnimproved;
constexpr auto P = SurfaceClass::Pavement;
constexpr auto T = SurfaceClass::Transition;

// First failure observed by a criterion; empty means pass.
struct Check {
  std::string failure;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

struct Outcome {
  int failed = 0;
  void report(int id, const std::string& name, double limit_s, const std::function<void(Check&)>& body) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0) {
      std::ostringstream msg;
      msg << "took " << secs << " s, limit " << limit_s << " s";
      check.expect(secs < limit_s, msg.str());
    }
    const bool ok = check.failure.empty();
    if (!ok) ++failed;
    std::printf("%s %d %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(), secs, ok ? "" : ": ",
                check.failure.c_str());
    std::fflush(stdout);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- 1 ------------------------------------------------------------------

// The published regional class distribution (asphalt, cobblestone, grass,
// ground_unimproved, pavement, transition).
const std::vector<std::pair<std::string, std::array<std::size_t, 6>>> kTable1 = {
    {"A", {0, 1656, 0, 0, 930, 632}},        {"B", {44, 577, 0, 1224, 1696, 423}},
    {"C", {1017, 47, 0, 0, 3501, 300}},      {"D", {78, 132, 662, 4252, 0, 39}},
    {"E", {1500, 476, 571, 288, 1940, 161}}, {"F", {1249, 785, 807, 730, 2677, 192}},
    {"G", {619, 563, 381, 572, 3034, 227}},  {"H", {1136, 1090, 333, 957, 3612, 211}},
};
const std::array<std::size_t, 8> kRowTotals = {3218, 3964, 4865, 5163, 4936, 6440, 5396, 7339};

void table1(Check& check) {
  const fs::path dir = fs::path(KERBSIDE_FIXTURES) / "table1";
  const auto assigned = assign_regions(load_manifest(dir / "manifest.csv"), load_regions(dir / "regions.geojson"));
  check.expect(assigned.unassigned == 0, "unassigned frames");
  const auto t = class_distribution(assigned.frames);
  check.expect(t.rows.size() == kTable1.size(), "row count");
  std::size_t cells = 0;
  for (std::size_t r = 0; r < std::min(t.rows.size(), kTable1.size()); ++r) {
    check.expect(t.rows[r].region_id == kTable1[r].first, "row order");
    for (std::size_t c = 0; c < 6; ++c) {
      if (t.rows[r].counts[c] == kTable1[r].second[c]) ++cells;
    }
    check.expect(t.rows[r].total == kRowTotals[r], "row total " + kTable1[r].first);
  }
  check.expect(cells == 48, std::to_string(cells) + "/48 cells match");
  check.expect(t.grand_total == 41321, "grand total " + std::to_string(t.grand_total));
}

// ---- 3 ------------------------------------------------------------------

void anti_leakage(Check& check) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_regions = 2 + static_cast<int>(rng() % 11);
    const int n_cities = 1 + static_cast<int>(rng() % std::min(n_regions, 4));
    std::vector<Region> regions;
    std::vector<std::string> ids;
    for (int r = 0; r < n_regions; ++r) {
      const std::string id = "R" + std::to_string(r);
      const int city = r < n_cities ? r : static_cast<int>(rng() % n_cities);
      const double lon = 0.02 * r;
      regions.push_back({id, "city" + std::to_string(city), {{10.0, lon}, {10.0, lon + 0.01}, {10.01, lon + 0.01}, {10.01, lon}}});
      ids.push_back(id);
    }
    std::vector<Frame> frames;
    for (int r = 0; r < n_regions; ++r) {
      const int n = 1 + static_cast<int>(rng() % 15);
      for (int i = 0; i < n; ++i) {
        Frame f;
        f.frame_id = "f" + std::to_string(r) + "_" + std::to_string(i);
        f.timestamp_ms = i;
        f.location = {10.001 + 0.008 * static_cast<double>(rng() % 1000) / 1000.0,
                      0.02 * r + 0.001 + 0.008 * static_cast<double>(rng() % 1000) / 1000.0};
        f.image_ref = f.frame_id + ".pgm";
        f.true_label = kAllClasses[rng() % 6];
        frames.push_back(f);
      }
    }
    const RegionSet rs(regions);
    const auto fset = assign_regions(FrameSet(frames), rs).frames;

    std::vector<SplitProtocol> protocols = {LeaveOneRegionOut{ids}};
    auto shuffled = ids;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (shuffled.size() % 2) shuffled.pop_back();
    protocols.push_back(Conservative{default_pairs(shuffled)});
    if (rs.cities().size() >= 2) protocols.push_back(CrossCity{rs.cities()});

    for (const auto& protocol : protocols) {
      // The classifier sees the actual frame split of every fold.
      std::map<std::string, int> tested;
      const FoldClassifier spy = [&](std::span<const std::size_t> train, std::span<const std::size_t> test) {
        std::set<std::size_t> train_set(train.begin(), train.end());
        std::set<std::string> test_regions;
        for (auto i : test) {
          check.expect(train_set.count(i) == 0, "frame in both train and test");
          test_regions.insert(*fset[i].region_id);
          ++tested[fset[i].frame_id];
        }
        for (auto i : train) check.expect(test_regions.count(*fset[i].region_id) == 0, "test region in training");
        return std::vector<Prediction>(test.size(), Prediction{A, 1.0});
      };
      for (const auto& fold : make_folds(fset, protocol)) {
        for (const auto& r : fold.test_regions) check.expect(fold.train_regions.count(r) == 0, "fold region leak");
      }
      run_protocol(fset, protocol, spy);
      if (std::holds_alternative<LeaveOneRegionOut>(protocol)) {
        check.expect(tested.size() == fset.size(), "LORO missed a frame");
        for (const auto& [id, n] : tested) check.expect(n == 1, "LORO tested " + id + " more than once");
      }
    }
    if (!check.failure.empty()) return;
  }
}

// ---- 4 ------------------------------------------------------------------

void metrics_check(Check& check) {
  const std::vector<SurfaceClass> truth{A, A, C, C}, pred{A, C, C, C};
  const auto r = metrics(confusion(truth, pred));
  check.expect(std::abs(r.per_class[index_of(A)].f1 - 2.0 / 3.0) < 1e-12, "f1(asphalt)");
  check.expect(std::abs(r.per_class[index_of(C)].f1 - 0.8) < 1e-12, "f1(cobblestone)");
  check.expect(std::abs(r.macro_f1 - 0.7333333333333333) < 1e-9, "macro f1");

  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng() % 80;
    std::vector<SurfaceClass> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = kAllClasses[rng() % 6];
      p[i] = rng() % 2 ? t[i] : kAllClasses[rng() % 6];
    }
    const auto rep = metrics(confusion(t, p));
    double sum = 0;
    int present = 0;
    for (std::size_t c = 0; c < 6; ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool is_t = index_of(t[i]) == c, is_p = index_of(p[i]) == c;
        tp += is_t && is_p;
        fp += !is_t && is_p;
        fn += is_t && !is_p;
      }
      const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      check.expect(std::abs(rep.per_class[c].precision - prec) < 1e-12, "precision mismatch");
      check.expect(std::abs(rep.per_class[c].recall - rec) < 1e-12, "recall mismatch");
      check.expect(std::abs(rep.per_class[c].f1 - f1) < 1e-12, "f1 mismatch");
      if (tp + fn > 0) {
        sum += f1;
        ++present;
      }
    }
    check.expect(std::abs(rep.macro_f1 - sum / present) < 1e-12, "macro mismatch");
    if (!check.failure.empty()) return;
  }
}

// ---- 5 ------------------------------------------------------------------

// Most frequent non-transition class; ties go to cobblestone, grass,
// ground_unimproved, asphalt, pavement in that order. nullopt: nothing to vote.
std::optional<SurfaceClass> exhaustive_plurality(const std::vector<SurfaceClass>& seq) {
  int best_count = 0;
  std::optional<SurfaceClass> best;
  for (auto c : {C, G, U, A, P}) {
    const int n = static_cast<int>(std::count(seq.begin(), seq.end(), c));
    if (n > best_count) {
      best_count = n;
      best = c;
    }
  }
  return best;
}

void aggregation(Check& check) {
  std::size_t checked = 0;
  for (std::size_t len = 1; len <= 8; ++len) {
    std::vector<int> digits(len, 0);
    std::vector<SurfaceClass> seq(len, A);
    while (true) {
      for (std::size_t i = 0; i < len; ++i) seq[i] = kAllClasses[digits[i]];
      const auto expected = exhaustive_plurality(seq);
      if (expected) {
        check.expect(aggregate_label(seq) == *expected, "plurality mismatch");
      } else {
        try {
          aggregate_label(seq);
          check.expect(false, "all-transition sequence accepted");
        } catch (const Error& e) {
          check.expect(e.code() == ErrorCode::OnlyTransitions, "wrong error for all-transition sequence");
        }
      }
      ++checked;
      if (!check.failure.empty()) return;
      std::size_t i = 0;
      while (i < len && ++digits[i] == 6) digits[i++] = 0;
      if (i == len) break;
    }
  }
  check.expect(checked == 2015538, "enumerated " + std::to_string(checked) + " sequences");
  try {
    aggregate_label(std::vector<SurfaceClass>{});
    check.expect(false, "empty sequence accepted");
  } catch (const Error& e) {
    check.expect(e.code() == ErrorCode::EmptySequence, "wrong error for empty sequence");
  }
}

// ---- 6 ------------------------------------------------------------------

void preprocessing(Check& check) {
  Image portrait(480, 640, 1);
  for (int y = 0; y < 640; ++y) {
    for (int x = 0; x < 480; ++x) portrait.at(x, y) = static_cast<std::uint8_t>((x * 7 + y * 13) % 256);
  }
  const Image sq = crop_to_square(portrait);
  check.expect(sq.width() == 480 && sq.height() == 480, "crop size");
  bool top = true;
  for (int y = 0; y < 480 && top; ++y) {
    for (int x = 0; x < 480; ++x) top = top && sq.at(x, y) == portrait.at(x, y);
  }
  check.expect(top, "crop keeps the top rows");

  const Image flat(480, 480, 1, 117);
  const Image small = resize_bilinear(flat, 224);
  check.expect(small.width() == 224 && small.height() == 224, "resize size");
  check.expect(std::all_of(small.pixels().begin(), small.pixels().end(), [](auto v) { return v == 117; }),
               "constant image stays constant");

  const Image tiny(2, 2, 1, std::vector<std::uint8_t>{0, 2, 4, 6});
  const Image one = resize_bilinear(tiny, 1);
  check.expect(one.width() == 1 && one.pixels().size() == 1 && one.at(0, 0) == 3, "2x2 -> 1x1 gives [3]");
}

// ---- 7, 8 ---------------------------------------------------------------

json run_pipeline_into(const fs::path& out) {
  fs::remove_all(out);
  RunConfig cfg;
  cfg.command = Command::Pipeline;
  cfg.out_dir = out.string();
  return run(cfg);
}

void orderings(Check& check, const fs::path& work) {
  const auto s = run_pipeline_into(work / "pipeline_a");
  const auto summary = json::parse(slurp(work / "pipeline_a/summary.json"));
  check.expect(summary == s, "summary.json differs from the returned summary");
  const double cons = summary["framewise"]["conservative"]["pooled_macro_f1"];
  const double loro = summary["framewise"]["loro"]["pooled_macro_f1"];
  const double cross = summary["framewise"]["cross-city"]["pooled_macro_f1"];
  const double sw_loro = summary["streetwise"]["loro"]["macro_f1"];
  const double bin_loro = summary["streetwise"]["loro"]["binary_f1"];
  std::printf("  frames %d  conservative %.4f  loro %.4f  streetwise %.4f  binary %.4f  cross-city %.4f\n",
              summary["n_frames"].get<int>(), cons, loro, sw_loro, bin_loro, cross);
  check.expect(cons <= loro, "(a) conservative pooled > LORO pooled");
  check.expect(sw_loro >= loro, "(b) streetwise LORO < framewise LORO");
  check.expect(bin_loro >= sw_loro, "(c) binary F1 < streetwise macro F1");
  check.expect(cross < loro, "(d) cross-city F1 not below within-city F1");
}

void determinism(Check& check, const fs::path& work) {
  const fs::path a = work / "pipeline_a";
  if (!fs::exists(a / "run.json")) run_pipeline_into(a);
  for (const char* name : {"pipeline_b", "pipeline_c"}) {
    auto j = json::parse(slurp(a / "run.json"));
    j["out_dir"] = (work / name).string();
    fs::remove_all(work / name);
    run(RunConfig::from_json(j));
  }
  // b and c come from the same run.json; a must agree with both as well.
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(work / "pipeline_b")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), work / "pipeline_b");
    const std::string bytes = slurp(e.path());
    if (rel == "run.json") {
      // Identical apart from where each run was told to write.
      auto without_out = [](const fs::path& p) {
        auto j = json::parse(slurp(p));
        j.erase("out_dir");
        return j;
      };
      check.expect(without_out(e.path()) == without_out(work / "pipeline_c" / rel), "run.json differs");
      check.expect(without_out(e.path()) == without_out(a / rel), "run.json differs from the original");
    } else {
      check.expect(bytes == slurp(work / "pipeline_c" / rel), rel.string() + " differs between replays");
      check.expect(bytes == slurp(a / rel), rel.string() + " differs from the original");
    }
    ++compared;
  }
  const auto count = [](const fs::path& root) {
    return std::count_if(fs::recursive_directory_iterator(root), fs::recursive_directory_iterator{},
                         [](const auto& e) { return e.is_regular_file(); });
  };
  check.expect(count(work / "pipeline_c") == static_cast<long>(compared), "replays wrote different file sets");
  for (const char* f : {"summary.json", "accessibility_map.geojson", "eval_loro.json", "streetwise_loro.json"}) {
    check.expect(fs::exists(work / "pipeline_b" / f), std::string("missing ") + f);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "kerbside_acceptance";
  fs::create_directories(work);
  Outcome out;
  out.report(1, "regional distribution fixture", 5, table1);
  out.report(2, "route accuracy", 0, [](Check& c) {
    const double v = route_accuracy(RouteModel(0.952, 4));
    c.expect(std::abs(v - 0.8214) <= 1e-4, "got " + std::to_string(v));
  });
  out.report(3, "anti-leakage over random assignments", 10, anti_leakage);
  out.report(4, "metrics", 10, metrics_check);
  out.report(5, "segment aggregation", 60, aggregation);
  out.report(6, "preprocessing goldens", 0, preprocessing);
  out.report(7, "synthetic orderings", 300, [&](Check& c) { orderings(c, work); });
  out.report(8, "determinism", 0, [&](Check& c) { determinism(c, work); });
  std::printf("%d failed\n", out.failed);
  return out.failed == 0 ? 0 : 1;
}
