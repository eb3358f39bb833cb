#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"
#include "kerbside/geo.hpp"
#include "kerbside/ingest.hpp"
#include "support.hpp"

using namespace kbtest;

namespace {

const std::string kHeader = std::string(kManifestHeader) + "\n";

// Published per-region frame counts (asphalt..transition).
const std::vector<std::pair<std::string, std::array<std::size_t, 6>>> kTable1 = {
    {"A", {0, 1656, 0, 0, 930, 632}},        {"B", {44, 577, 0, 1224, 1696, 423}},
    {"C", {1017, 47, 0, 0, 3501, 300}},      {"D", {78, 132, 662, 4252, 0, 39}},
    {"E", {1500, 476, 571, 288, 1940, 161}}, {"F", {1249, 785, 807, 730, 2677, 192}},
    {"G", {619, 563, 381, 572, 3034, 227}},  {"H", {1136, 1090, 333, 957, 3612, 211}},
};

}  // namespace

TEST_CASE("header-only manifest is an empty frame set") {
  CHECK(parse_manifest(kHeader).size() == 0);
}

TEST_CASE("manifest rows parse into frames") {
  const auto fs = parse_manifest(kHeader +
                                 "f2,2000,53.1,8.8,img/f2.png,s1,Pavement\n"
                                 "f1,1000,53.1,8.8,img/f1.png,s1,ground\n"
                                 "f3,500,53.2,8.9,img/f3.png,,\n");
  REQUIRE(fs.size() == 3);
  CHECK(fs[0].frame_id == "f3");
  CHECK_FALSE(fs[0].segment_id.has_value());
  CHECK_FALSE(fs[0].true_label.has_value());
  CHECK(fs[1].frame_id == "f1");
  CHECK(fs[1].true_label == U);
  CHECK(fs[2].image_ref == "img/f2.png");
  CHECK(fs[2].location == GeoPoint{53.1, 8.8});
}

TEST_CASE("manifest errors carry line and column") {
  auto parse_error_at = [](const std::string& text, std::size_t line, std::size_t column) {
    try {
      parse_manifest(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() == column);
    }
  };
  parse_error_at(kHeader + "f1,1000,95.0,8.8,x.png,,\n", 2, 3);
  parse_error_at(kHeader + "f1,1000,53,181,x.png,,\n", 2, 4);
  parse_error_at(kHeader + "f1,1000,,8.8,x.png,,\n", 2, 3);
  parse_error_at(kHeader + "f0,1,1,1,x,,\nf1,abc,53,8,x.png,,\n", 3, 2);
  parse_error_at(kHeader + "f1,1000,53,8,x.png,,snow\n", 2, 7);
  parse_error_at(kHeader + "f1,1000,53,8\n", 2, 5);
  parse_error_at("frame_id,timestamp,lat,lon,image_ref,segment_id,label\n", 1, 2);
  parse_error_at("", 1, 1);
  KB_CHECK_CODE(parse_manifest(kHeader + "f1,1,1,1,x,,\nf1,2,1,1,y,,\n"), ErrorCode::DuplicateFrameId);
  KB_CHECK_CODE(load_manifest("/nonexistent/manifest.csv"), ErrorCode::Io);
}

TEST_CASE("a bad row anywhere fails the whole load") {
  std::string text = kHeader;
  for (int i = 0; i < 100; ++i) text += "f" + std::to_string(i) + ",1,53,8,x,,pavement\n";
  text += "bad,1,53,,x,,pavement\n";
  KB_CHECK_CODE(parse_manifest(text), ErrorCode::Parse);
}

TEST_CASE("manifest write/parse round-trip") {
  FrameSet fs({frame("a,1", 10, 53.123456789, 8.5, P, "seg \"1\""), frame("b", 5, -1.5, 179.25)});
  CHECK(parse_manifest(write_manifest(fs)) == FrameSet(std::vector<Frame>(fs.frames().begin(), fs.frames().end())));
}

TEST_CASE("region geojson parse and round-trip") {
  const std::string geo = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"region_id":"A","city":"Bremen"},
     "geometry":{"type":"Polygon","coordinates":[[[8.0,53.0],[8.01,53.0],[8.01,53.01],[8.0,53.01],[8.0,53.0]]]}}]})";
  const auto rs = parse_regions(geo);
  REQUIRE(rs.size() == 1);
  CHECK(rs.regions()[0].boundary.size() == 4);
  CHECK(rs.regions()[0].boundary[1] == GeoPoint{53.0, 8.01});
  CHECK(parse_regions(write_regions(rs)) == rs);

  KB_CHECK_CODE(parse_regions("{"), ErrorCode::Parse);
  KB_CHECK_CODE(parse_regions(R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"city":"X"},
     "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})"),
                ErrorCode::Parse);
}

TEST_CASE("assign_regions: inside, outside") {
  const RegionSet rs({square("A", "Bremen", 53.0, 8.0), square("B", "Bremen", 53.0, 8.02)});
  auto res = assign_regions(FrameSet({frame("in", 1, 53.005, 8.005), frame("out", 2, 54, 8),
                                      frame("inB", 3, 53.005, 8.025)}),
                            rs);
  CHECK(res.frames.find("in")->region_id == "A");
  CHECK(res.frames.find("inB")->region_id == "B");
  CHECK_FALSE(res.frames.find("out")->region_id.has_value());
  CHECK(res.unassigned == 1);

  SUBCASE("idempotent") {
    const auto again = assign_regions(res.frames, rs);
    CHECK(again.frames == res.frames);
    CHECK(again.unassigned == res.unassigned);
  }
}

TEST_CASE("assign_regions: overlapping squares are rejected exactly where both contain the point") {
  // Two unit squares sharing the interior [0.5,1]x[0,1].
  const Region a{"A", "X", {{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
  const Region b{"B", "X", {{0.5, 0}, {0.5, 1}, {1.5, 1}, {1.5, 0}}};
  const RegionSet rs({a, b});
  // Independent containment oracle for axis-aligned boxes.
  auto in_box = [](const GeoPoint& p, double lat0, double lat1) {
    return p.lat >= lat0 && p.lat <= lat1 && p.lon >= 0 && p.lon <= 1;
  };
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-0.25, 1.75);
  for (int i = 0; i < 300; ++i) {
    const GeoPoint p{d(rng), d(rng)};
    const int hits = in_box(p, 0, 1) + in_box(p, 0.5, 1.5);
    FrameSet fs({frame("f", 1, p.lat, p.lon)});
    if (hits == 2) {
      KB_CHECK_CODE(assign_regions(fs, rs), ErrorCode::OverlappingRegions);
    } else {
      const auto res = assign_regions(fs, rs);
      CHECK(res.unassigned == (hits == 0 ? 1u : 0u));
    }
  }
  KB_CHECK_CODE(assign_regions(FrameSet({frame("shared", 1, 0.75, 0.5)}), rs), ErrorCode::OverlappingRegions);
}

TEST_CASE("a point on a shared edge of two regions is an overlap") {
  const RegionSet rs({square("A", "X", 0, 0, 1), square("B", "X", 0, 1, 1)});
  KB_CHECK_CODE(assign_regions(FrameSet({frame("edge", 1, 0.5, 1.0)}), rs), ErrorCode::OverlappingRegions);
}

TEST_CASE("class_distribution: single frame") {
  const RegionSet rs({square("A", "Bremen", 53.0, 8.0)});
  auto res = assign_regions(FrameSet({frame("g", 1, 53.005, 8.005, G)}), rs);
  const auto t = class_distribution(res.frames);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].counts[index_of(G)] == 1);
  CHECK(t.rows[0].total == 1);
  CHECK(t.grand_total == 1);
  KB_CHECK_CODE(class_distribution(FrameSet({frame("x", 1, 53, 8)})), ErrorCode::UnlabeledFrames);
}

TEST_CASE("class_distribution is permutation invariant and conserves frames") {
  const RegionSet rs({square("A", "Bremen", 53.0, 8.0), square("B", "Bremen", 53.0, 8.02)});
  std::mt19937 rng(5);
  std::vector<Frame> frames;
  for (int i = 0; i < 400; ++i) {
    const double lon = (i % 3 == 0) ? 8.005 : (i % 3 == 1 ? 8.025 : 9.0);
    frames.push_back(frame("f" + std::to_string(i), i, 53.005, lon, kAllClasses[rng() % 6]));
  }
  const auto t1 = class_distribution(assign_regions(FrameSet(frames), rs).frames);
  std::shuffle(frames.begin(), frames.end(), rng);
  const auto t2 = class_distribution(assign_regions(FrameSet(frames), rs).frames);
  CHECK(t1.grand_total == 400);
  std::size_t sum = 0;
  for (std::size_t r = 0; r < t1.rows.size(); ++r) {
    CHECK(t1.rows[r].counts == t2.rows[r].counts);
    std::size_t row = 0;
    for (auto n : t1.rows[r].counts) row += n;
    CHECK(row == t1.rows[r].total);
    sum += row;
  }
  CHECK(sum == t1.grand_total);
  CHECK(t1.rows.back().region_id.empty());  // unassigned row last
}

TEST_CASE("Table 1 fixture reproduces every published cell") {
  const std::filesystem::path dir = KERBSIDE_FIXTURES "/table1";
  const auto res = assign_regions(load_manifest(dir / "manifest.csv"), load_regions(dir / "regions.geojson"));
  CHECK(res.frames.size() == 41321);
  CHECK(res.unassigned == 0);
  const auto t = class_distribution(res.frames);
  REQUIRE(t.rows.size() == kTable1.size());
  const std::array<std::size_t, 8> row_totals = {3218, 3964, 4865, 5163, 4936, 6440, 5396, 7339};
  for (std::size_t r = 0; r < kTable1.size(); ++r) {
    CHECK(t.rows[r].region_id == kTable1[r].first);
    CHECK(t.rows[r].counts == kTable1[r].second);
    CHECK(t.rows[r].total == row_totals[r]);
  }
  CHECK(t.class_totals == std::array<std::size_t, 6>{5643, 5326, 2754, 8023, 17390, 2185});
  CHECK(t.grand_total == 41321);

  const auto csv_text = write_distribution_csv(t);
  const auto recs = csv::parse(csv_text);
  CHECK(recs.back().fields.front() == "Total");
  CHECK(recs.back().fields.back() == "41321");
  CHECK(recs[1].fields == std::vector<std::string>{"A", "Bremen", "0", "1656", "0", "0", "930", "632", "3218"});
}

TEST_CASE("run_length_stats") {
  auto s = run_length_stats(std::vector<SurfaceClass>{A, A, A, C, C});
  CHECK(s.run_count == 2);
  CHECK(s.mean_run_length == 2.5);
  s = run_length_stats(std::vector<SurfaceClass>{A});
  CHECK(s.run_count == 1);
  CHECK(s.mean_run_length == 1.0);
  KB_CHECK_CODE(run_length_stats(std::vector<SurfaceClass>{}), ErrorCode::EmptySequence);

  // 10 alternating labels against a brute-force splitter
  std::vector<SurfaceClass> alt;
  for (int i = 0; i < 10; ++i) alt.push_back(i % 2 ? P : C);
  std::size_t runs = 0;
  for (std::size_t i = 0; i < alt.size(); ++i) runs += (i == 0 || alt[i] != alt[i - 1]);
  s = run_length_stats(alt);
  CHECK(s.run_count == runs);
  CHECK(s.run_count == 10);
  CHECK(s.mean_run_length == 1.0);
}

TEST_CASE("run_length_stats properties on random sequences") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<SurfaceClass> labels(1 + rng() % 200);
    const unsigned alphabet = 1 + rng() % 6;
    for (auto& l : labels) l = kAllClasses[rng() % alphabet];
    const auto s = run_length_stats(labels);
    CHECK(s.run_count <= labels.size());
    CHECK(s.mean_run_length * static_cast<double>(s.run_count) ==
          doctest::Approx(static_cast<double>(labels.size())).epsilon(1e-15));
  }
}
