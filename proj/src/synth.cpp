#include "kerbside/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"
#include "kerbside/ingest.hpp"
#include "kerbside/parallel.hpp"

namespace kerbside {

GeneratorConfig GeneratorConfig::bremen_like() {
  GeneratorConfig c;
  c.cities = {{"Bremen", 6, 0.0}, {"Hamburg", 1, 1.0}, {"Hannover", 1, 1.0}};
  c.class_mix = {5643, 5326, 2754, 8023, 17390, 0};
  return c;
}

void GeneratorConfig::validate() const {
  if (cities.empty()) throw Error(ErrorCode::Config, "generator needs at least one city");
  int total_regions = 0;
  for (const auto& city : cities) {
    if (city.name.empty()) throw Error(ErrorCode::Config, "city without a name");
    if (city.n_regions < 1) throw Error(ErrorCode::Config, "city '" + city.name + "' needs >= 1 region");
    if (!(city.style_shift >= 0.0)) throw Error(ErrorCode::Config, "style_shift must be >= 0");
    total_regions += city.n_regions;
  }
  if (total_regions > 702) throw Error(ErrorCode::Config, "too many regions");
  if (segments_per_region < 1 || segments_per_region > 60) {
    throw Error(ErrorCode::Config, "segments_per_region must lie in [1, 60]");
  }
  if (min_frames_per_segment < 1 || min_frames_per_segment > max_frames_per_segment ||
      max_frames_per_segment > 500) {
    throw Error(ErrorCode::Config, "frames_per_segment must satisfy 1 <= min <= max <= 500");
  }
  double sum = 0.0;
  for (auto c : kSurfaceClasses) {
    if (!(class_mix[index_of(c)] >= 0.0)) throw Error(ErrorCode::Config, "class weights must be >= 0");
    sum += class_mix[index_of(c)];
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::Config, "class_mix has no positive surface weight");
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) {
    throw Error(ErrorCode::Config, "noise_level must lie in [0,1]");
  }
}

nlohmann::json to_json(const GeneratorConfig& config) {
  nlohmann::json cities = nlohmann::json::array();
  for (const auto& c : config.cities) {
    cities.push_back({{"name", c.name}, {"n_regions", c.n_regions}, {"style_shift", c.style_shift}});
  }
  nlohmann::json mix = nlohmann::json::object();
  for (auto c : kSurfaceClasses) mix[std::string(canonical_name(c))] = config.class_mix[index_of(c)];
  return {{"seed", config.seed},
          {"cities", cities},
          {"segments_per_region", config.segments_per_region},
          {"frames_per_segment", {config.min_frames_per_segment, config.max_frames_per_segment}},
          {"class_mix", mix},
          {"noise_level", config.noise_level},
          {"image_format", config.image_format == ImageFormat::Png ? "png" : "pgm"}};
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  GeneratorConfig c = GeneratorConfig::bremen_like();
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("cities")) {
      c.cities.clear();
      for (const auto& city : j.at("cities")) {
        c.cities.push_back({city.at("name").get<std::string>(), city.value("n_regions", 1),
                            city.value("style_shift", 0.0)});
      }
    }
    c.segments_per_region = j.value("segments_per_region", c.segments_per_region);
    if (j.contains("frames_per_segment")) {
      c.min_frames_per_segment = j.at("frames_per_segment").at(0).get<int>();
      c.max_frames_per_segment = j.at("frames_per_segment").at(1).get<int>();
    }
    if (j.contains("class_mix")) {
      c.class_mix.fill(0.0);
      for (const auto& [name, weight] : j.at("class_mix").items()) {
        c.class_mix[index_of(parse_surface_class(name))] = weight.get<double>();
      }
    }
    c.noise_level = j.value("noise_level", c.noise_level);
    if (j.contains("image_format")) {
      const auto fmt = j.at("image_format").get<std::string>();
      if (fmt == "png") {
        c.image_format = ImageFormat::Png;
      } else if (fmt == "pgm") {
        c.image_format = ImageFormat::Pgm;
      } else {
        throw Error(ErrorCode::Config, "image_format must be 'pgm' or 'png'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("generator config: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, std::string("generator config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

// Smoothly interpolated lattice noise in [-1, 1].
class ValueNoise {
 public:
  ValueNoise(Rng& rng, double period, int width, int height)
      : period_(std::max(1.0, period)),
        cols_(static_cast<int>(width / period_) + 3),
        rows_(static_cast<int>(height / period_) + 3),
        offset_x_(rng.uniform()),
        offset_y_(rng.uniform()),
        lattice_(static_cast<std::size_t>(cols_) * rows_) {
    for (auto& v : lattice_) v = rng.uniform(-1.0, 1.0);
  }

  double at(int x, int y) const {
    const double fx = x / period_ + offset_x_;
    const double fy = y / period_ + offset_y_;
    const int ix = static_cast<int>(fx);
    const int iy = static_cast<int>(fy);
    const double tx = smooth(fx - ix);
    const double ty = smooth(fy - iy);
    const double a = lattice_[iy * cols_ + ix];
    const double b = lattice_[iy * cols_ + ix + 1];
    const double c = lattice_[(iy + 1) * cols_ + ix];
    const double d = lattice_[(iy + 1) * cols_ + ix + 1];
    return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

  double period_;
  int cols_;
  int rows_;
  double offset_x_;
  double offset_y_;
  std::vector<double> lattice_;
};

using Field = std::vector<double>;

Field asphalt_field(const TextureStyle& s, Rng& rng, int w, int h) {
  ValueNoise grain(rng, 4.0 * s.scale, w, h);
  Field f(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 92.0 + 7.0 * grain.at(x, y) + 9.0 * rng.pixel_noise();
      if (rng.uniform() < 0.02) v += 35.0;
      f[y * w + x] = v;
    }
  }
  return f;
}

Field cobblestone_field(const TextureStyle& s, Rng& rng, int w, int h) {
  const double cell = 34.0 * s.scale;
  const int cols = static_cast<int>(w / cell) + 3;
  const int rows = static_cast<int>(h / cell) + 3;
  struct Stone {
    double x, y, tone;
  };
  std::vector<Stone> stones(static_cast<std::size_t>(cols) * rows);
  for (int gy = 0; gy < rows; ++gy) {
    for (int gx = 0; gx < cols; ++gx) {
      const double stagger = (gy % 2) ? 0.5 : 0.0;
      stones[gy * cols + gx] = {(gx - 1 + stagger + rng.uniform(0.3, 0.7)) * cell,
                                (gy - 1 + rng.uniform(0.3, 0.7)) * cell, rng.uniform(128.0, 178.0)};
    }
  }
  const double mortar = 2.5 * s.scale;
  Field f(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const int cy = static_cast<int>(y / cell) + 1;
    for (int x = 0; x < w; ++x) {
      const int cx = static_cast<int>(x / cell) + 1;
      double d1 = 1e30, d2 = 1e30;
      const Stone* nearest = nullptr;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int gx = cx + dx;
          const int gy = cy + dy;
          if (gx < 0 || gy < 0 || gx >= cols || gy >= rows) continue;
          const Stone& st = stones[gy * cols + gx];
          const double d = (x - st.x) * (x - st.x) + (y - st.y) * (y - st.y);
          if (d < d1) {
            d2 = d1;
            d1 = d;
            nearest = &st;
          } else if (d < d2) {
            d2 = d;
          }
        }
      }
      d1 = std::sqrt(d1);
      d2 = std::sqrt(d2);
      const double edge = 0.5 * (d2 - d1);
      double v;
      if (edge < mortar) {
        v = 58.0 + 8.0 * rng.pixel_noise();
      } else {
        const double dome = std::max(0.0, 1.0 - d1 / (0.75 * cell));
        v = nearest->tone + 20.0 * dome - 10.0 + 5.0 * rng.pixel_noise();
      }
      f[y * w + x] = v;
    }
  }
  return f;
}

Field grass_field(const TextureStyle& s, Rng& rng, int w, int h) {
  ValueNoise fine(rng, 2.5 * s.scale, w, h);
  ValueNoise clumps(rng, 12.0 * s.scale, w, h);
  Field f(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f[y * w + x] = 90.0 + 28.0 * fine.at(x, y) + 18.0 * clumps.at(x, y) + 22.0 * rng.pixel_noise();
    }
  }
  return f;
}

Field ground_field(const TextureStyle& s, Rng& rng, int w, int h) {
  ValueNoise blotches(rng, 26.0 * s.scale, w, h);
  ValueNoise detail(rng, 9.0 * s.scale, w, h);
  ValueNoise patches(rng, 90.0 * s.scale, w, h);
  Field f(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 122.0 + 30.0 * blotches.at(x, y) + 15.0 * detail.at(x, y) + 7.0 * rng.pixel_noise();
      if (patches.at(x, y) > 0.3) v -= 28.0;
      f[y * w + x] = v;
    }
  }
  return f;
}

Field pavement_field(const TextureStyle& s, Rng& rng, int w, int h) {
  ValueNoise shade(rng, 100.0 * s.scale, w, h);
  const double slab = 78.0 * s.scale;
  const double joint = 3.0 * s.scale;
  const double ox = rng.uniform(0.0, slab);
  const double oy = rng.uniform(0.0, slab);
  Field f(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const bool row_joint = std::fmod(y + oy, slab) < joint;
    for (int x = 0; x < w; ++x) {
      const bool col_joint = std::fmod(x + ox, slab) < joint;
      f[y * w + x] = (row_joint || col_joint) ? 75.0 + 6.0 * rng.pixel_noise()
                                              : 168.0 + 6.0 * shade.at(x, y) + 4.0 * rng.pixel_noise();
    }
  }
  return f;
}

Field class_field(SurfaceClass cls, const TextureStyle& s, Rng& rng, int w, int h) {
  switch (cls) {
    case SurfaceClass::Asphalt: return asphalt_field(s, rng, w, h);
    case SurfaceClass::Cobblestone: return cobblestone_field(s, rng, w, h);
    case SurfaceClass::Grass: return grass_field(s, rng, w, h);
    case SurfaceClass::GroundUnimproved: return ground_field(s, rng, w, h);
    case SurfaceClass::Pavement: return pavement_field(s, rng, w, h);
    case SurfaceClass::Transition: break;
  }
  throw Error(ErrorCode::InvalidArgument, "texture() has no archetype for transition");
}

Image render(const Field& f, const TextureStyle& s, Rng& rng, int w, int h) {
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 128.0 + (f[y * w + x] - 128.0) * s.contrast + s.brightness;
      if (s.noise_sigma > 0) v += s.noise_sigma * rng.pixel_noise();
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
  }
  return img;
}

}  // namespace

Image texture(SurfaceClass cls, const TextureStyle& style, Rng& rng) {
  const Field f = class_field(cls, style, rng, kCaptureWidth, kCaptureHeight);
  return render(f, style, rng, kCaptureWidth, kCaptureHeight);
}

Image transition_texture(SurfaceClass from, SurfaceClass to, const TextureStyle& style, Rng& rng) {
  const int w = kCaptureWidth;
  const int h = kCaptureHeight;
  const Field a = class_field(from, style, rng, w, h);
  const Field b = class_field(to, style, rng, w, h);
  // Split line through a point in the middle band of the visible square, at a random slant.
  const double px = rng.uniform(0.3, 0.7) * w;
  const double py = rng.uniform(0.3, 0.7) * w;
  const double angle = rng.uniform(0.25, 1.25) * (rng.uniform() < 0.5 ? 1.0 : -1.0);
  const double nx = std::sin(angle);
  const double ny = -std::cos(angle);
  Field f(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool side = (x - px) * nx + (y - py) * ny < 0;
      f[y * w + x] = side ? a[y * w + x] : b[y * w + x];
    }
  }
  return render(f, style, rng, w, h);
}

namespace {

std::string region_name(int global_index) {
  if (global_index < 26) return std::string(1, static_cast<char>('A' + global_index));
  const int hi = global_index / 26 - 1;
  const int lo = global_index % 26;
  return std::string{static_cast<char>('A' + hi), static_cast<char>('A' + lo)};
}

struct PlannedFrame {
  Frame frame;
  SurfaceClass from;
  SurfaceClass to;
  TextureStyle style;
};

// Largest-remainder allocation of n segments over the class weights.
std::vector<SurfaceClass> allocate_classes(const std::array<double, kNumClasses>& mix, int n) {
  double sum = 0.0;
  for (auto c : kSurfaceClasses) sum += mix[index_of(c)];
  std::array<int, kNumClasses> quota{};
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (auto c : kSurfaceClasses) {
    const double exact = n * mix[index_of(c)] / sum;
    quota[index_of(c)] = static_cast<int>(std::floor(exact));
    assigned += quota[index_of(c)];
    remainders.push_back({-(exact - std::floor(exact)), index_of(c)});
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++quota[remainders[i].second];
  std::vector<SurfaceClass> out;
  for (auto c : kSurfaceClasses) out.insert(out.end(), quota[index_of(c)], c);
  return out;
}

TextureStyle jitter(TextureStyle s, Rng& rng, double brightness, double contrast, double scale) {
  s.brightness += rng.uniform(-brightness, brightness);
  s.contrast *= rng.uniform(1.0 - contrast, 1.0 + contrast);
  s.scale *= rng.uniform(1.0 - scale, 1.0 + scale);
  return s;
}

}  // namespace

GeneratedDataset generate(const GeneratorConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + (out_dir / "images").string() + "'");

  constexpr double kRegionSize = 0.008;
  constexpr double kFrameStep = 1e-5;
  constexpr std::int64_t kCadenceMs = 800;
  const char* ext = config.image_format == ImageFormat::Png ? ".png" : ".pgm";

  std::vector<Region> regions;
  std::vector<PlannedFrame> plan;
  int global_region = 0;
  for (std::size_t ci = 0; ci < config.cities.size(); ++ci) {
    const CitySpec& city = config.cities[ci];
    const double lat0 = 52.0 + 0.5 * static_cast<double>(ci);
    const double lon0 = 8.5 + 0.5 * static_cast<double>(ci);

    TextureStyle city_style;
    city_style.noise_sigma = 30.0 * config.noise_level;
    {
      Rng r = Rng::stream(config.seed, {1, ci});
      const double sb = r.uniform() < 0.5 ? -1.0 : 1.0;
      const double sc = r.uniform() < 0.5 ? -1.0 : 1.0;
      const double ss = r.uniform() < 0.5 ? -1.0 : 1.0;
      city_style.brightness += sb * 45.0 * city.style_shift;
      city_style.contrast *= std::max(0.3, 1.0 + sc * 0.5 * city.style_shift);
      city_style.scale *= std::pow(1.8, ss * city.style_shift);
    }

    auto classes = allocate_classes(config.class_mix, city.n_regions * config.segments_per_region);
    {
      Rng r = Rng::stream(config.seed, {2, ci});
      for (std::size_t i = classes.size(); i > 1; --i) std::swap(classes[i - 1], classes[r.below(i)]);
    }

    TextureStyle district_style;
    for (int ri = 0; ri < city.n_regions; ++ri, ++global_region) {
      const std::string rid = region_name(global_region);
      const double lat_base = lat0;
      const double lon_base = lon0 + ri * 0.01;
      regions.push_back({rid, city.name,
                         {{lat_base, lon_base},
                          {lat_base, lon_base + kRegionSize},
                          {lat_base + kRegionSize, lon_base + kRegionSize},
                          {lat_base + kRegionSize, lon_base}}});

      // Neighbouring regions come in pairs and share a district look.
      if (ri % 2 == 0) {
        Rng r = Rng::stream(config.seed, {3, ci, static_cast<std::uint64_t>(ri / 2)});
        district_style = jitter(city_style, r, 12.0, 0.12, 0.15);
      }
      Rng region_rng = Rng::stream(config.seed, {4, static_cast<std::uint64_t>(global_region)});
      const TextureStyle region_style = jitter(district_style, region_rng, 4.0, 0.04, 0.05);

      std::int64_t t = 1'600'000'000'000LL + static_cast<std::int64_t>(global_region) * 100'000'000LL;
      int seq = 0;
      const double row_spacing = (kRegionSize - 0.0008) / config.segments_per_region;
      for (int s = 0; s < config.segments_per_region; ++s) {
        const SurfaceClass cls = classes[static_cast<std::size_t>(ri * config.segments_per_region + s)];
        Rng seg_rng = Rng::stream(config.seed, {5, static_cast<std::uint64_t>(global_region),
                                                static_cast<std::uint64_t>(s)});
        const int n = seg_rng.range(config.min_frames_per_segment, config.max_frames_per_segment);
        const double lat = lat_base + 0.0004 + s * row_spacing;
        double lon = lon_base + 0.0004;
        char seg_id[64];
        std::snprintf(seg_id, sizeof seg_id, "%s-s%02d", rid.c_str(), s);

        auto emit = [&](SurfaceClass label, SurfaceClass from, SurfaceClass to, bool in_segment) {
          char fid[64];
          std::snprintf(fid, sizeof fid, "%s-%05d", rid.c_str(), seq++);
          PlannedFrame pf;
          pf.frame.frame_id = fid;
          pf.frame.timestamp_ms = t;
          pf.frame.location = {lat, lon};
          pf.frame.image_ref = std::string("images/") + fid + ext;
          if (in_segment) pf.frame.segment_id = seg_id;
          pf.frame.true_label = label;
          pf.from = from;
          pf.to = to;
          pf.style = region_style;
          plan.push_back(std::move(pf));
          t += kCadenceMs + seg_rng.range(-40, 40);
          lon += kFrameStep;
        };
        for (int j = 0; j < n; ++j) emit(cls, cls, cls, true);

        if (s + 1 < config.segments_per_region) {
          const SurfaceClass next = classes[static_cast<std::size_t>(ri * config.segments_per_region + s + 1)];
          if (next != cls) {
            const int nt = seg_rng.range(1, 3);
            for (int j = 0; j < nt; ++j) emit(SurfaceClass::Transition, cls, next, false);
          }
        }
      }
    }
  }

  parallel_for(plan.size(), [&](std::size_t i) {
    const PlannedFrame& pf = plan[i];
    Rng rng = Rng::stream(config.seed, {6, i});
    TextureStyle style = jitter(pf.style, rng, 6.0, 0.03, 0.07);
    const Image img = pf.from == pf.to ? texture(pf.from, style, rng)
                                       : transition_texture(pf.from, pf.to, style, rng);
    save_image(img, out_dir / pf.frame.image_ref, config.image_format);
  });

  GeneratedDataset out;
  std::vector<Frame> frames;
  frames.reserve(plan.size());
  for (auto& pf : plan) {
    out.n_transitions += pf.frame.true_label == SurfaceClass::Transition;
    frames.push_back(std::move(pf.frame));
  }
  out.n_frames = frames.size();
  const FrameSet set(std::move(frames));
  const RegionSet region_set(std::move(regions));
  out.manifest = out_dir / "manifest.csv";
  out.regions = out_dir / "regions.geojson";
  out.image_root = out_dir;
  csv::write_file(out.manifest, write_manifest(set));
  csv::write_file(out.regions, write_regions(region_set));
  csv::write_file(out_dir / "generator.json", to_json(config).dump(2) + "\n");
  return out;
}

}  // namespace kerbside
