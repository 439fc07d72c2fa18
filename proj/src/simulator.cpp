#include "rgbt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rgbt/image_io.hpp"
#include "rgbt/imaging.hpp"

namespace rgbt {

namespace {

namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;
constexpr double kGoldenAngle = kPi * (3.0 - 2.2360679774997896964);  // pi(3-sqrt5)

// Stream tags under the per-plant seed, so adding a stream never shifts
// another one.
constexpr uint64_t kPhenotypeTag = 1;
constexpr uint64_t kThermalNoiseTag = 2;
constexpr uint64_t kAmbientTag = 3;

double inner_radius(const SimulatorConfig& config) {
  return std::max(2.0,
                  0.03 * std::min(config.canvas_width, config.canvas_height));
}

struct LeafEllipse {
  double cx = 0.0, cy = 0.0;  // ellipse center
  double ux = 0.0, uy = 0.0;  // unit vector along the leaf
  double a = 0.0, b = 0.0;    // half length, half width
};

LeafEllipse leaf_ellipse(const SimulatorConfig& config,
                         const PlantState& state, const Leaf& leaf) {
  double age = state.day - leaf.birth_day;
  // Saturating growth; a brand-new leaf already shows as a short, thin
  // cigar and widens as it matures.
  double length = leaf.max_length_px * (1.0 - std::exp(-(age + 0.8) / 3.0));
  double width = length * (0.42 - 0.26 * std::exp(-age / 2.0));
  double ux = std::cos(leaf.angle_rad);
  double uy = std::sin(leaf.angle_rad);
  double reach = inner_radius(config) + length / 2.0;
  return {state.center_x + ux * reach, state.center_y + uy * reach,
          ux,                          uy,
          length / 2.0,                width / 2.0};
}

double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
             const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; output has positive signed area.
std::vector<std::array<double, 2>> convex_hull(
    std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  size_t n = pts.size();
  if (n < 3) throw std::runtime_error("convex_hull: degenerate point set");
  std::vector<std::array<double, 2>> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw std::runtime_error("convex_hull: collinear input");
  return hull;
}

// Moves every edge of a convex, positively oriented polygon outward by
// `margin`, joining at the miter point.
std::vector<std::array<double, 2>> offset_convex(
    const std::vector<std::array<double, 2>>& poly, double margin) {
  size_t n = poly.size();
  std::vector<std::array<double, 2>> out(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& prev = poly[(i + n - 1) % n];
    const auto& cur = poly[i];
    const auto& next = poly[(i + 1) % n];
    auto normal = [](const std::array<double, 2>& p,
                     const std::array<double, 2>& q) {
      double ex = q[0] - p[0], ey = q[1] - p[1];
      double len = std::hypot(ex, ey);
      return std::array<double, 2>{ey / len, -ex / len};
    };
    auto n1 = normal(prev, cur);
    auto n2 = normal(cur, next);
    double mx = n1[0] + n2[0], my = n1[1] + n2[1];
    double len = std::hypot(mx, my);
    if (len < 1e-9) {
      mx = n1[0];
      my = n1[1];
      len = 1.0;
    }
    mx /= len;
    my /= len;
    double cos_half = std::max(0.2, mx * n1[0] + my * n1[1]);
    out[i] = {cur[0] + mx * margin / cos_half, cur[1] + my * margin / cos_half};
  }
  return out;
}

}  // namespace

void SimulatorConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("simulator config: " + what);
  };
  if (plants_per_treatment < 1) fail("plants_per_treatment must be positive");
  if (days < 1) fail("days must be positive");
  if (canvas_width < 48 || canvas_height < 48)
    fail("canvas must be at least 48x48");
  if (!(ambient_low_c <= ambient_high_c))
    fail("ambient range is inverted");
  if (leaf_cooling_c < 0.0) fail("leaf_cooling_c must be non-negative");
  for (int t = 0; t + 1 < 4; ++t)
    if (!(treatment_offsets_c[t] < treatment_offsets_c[t + 1]))
      fail("treatment offsets must be strictly increasing");
  if (sensor_noise_sigma_c < 0.0 || leaf_temp_sigma_c < 0.0)
    fail("noise sigmas must be non-negative");
  for (double v : leaf_interval_days)
    if (!(v >= 1.0)) fail("leaf intervals must be at least one day");
  for (double v : leaf_growth_scale)
    if (!(v > 0.0)) fail("growth scales must be positive");
  if (initial_leaves < 1) fail("initial_leaves must be positive");
  if (annotation_margin_px < 1) fail("annotation margin must be positive");
}

PlantState grow_plant(const SimulatorConfig& config, const PlantId& plant,
                      int day) {
  config.validate();
  if (day < 1 || day > config.days)
    throw std::invalid_argument("grow_plant: day " + std::to_string(day) +
                                " outside 1.." + std::to_string(config.days));
  if (plant.index < 1 || plant.index > config.plants_per_treatment)
    throw std::invalid_argument("grow_plant: plant index " +
                                std::to_string(plant.index) + " outside 1.." +
                                std::to_string(config.plants_per_treatment));

  int t = static_cast<int>(plant.treatment);
  Rng rng(mix_seed(mix_seed(config.seed, plant_seed_tag(plant)),
                   kPhenotypeTag));

  PlantState state;
  state.id = plant;
  state.day = day;

  // Fixed draw order; per-leaf draws happen for the whole horizon so every
  // day sees the same phenotype.
  double length_scale = rng.uniform(0.92, 1.08);
  double angle0 = rng.uniform(0.0, 2.0 * kPi);
  double bud_phase = rng.uniform();
  double interval = config.leaf_interval_days[t] * rng.uniform(0.9, 1.1);
  state.center_x =
      config.canvas_width / 2.0 + rng.uniform(-0.05, 0.05) * config.canvas_width;
  state.center_y = config.canvas_height / 2.0 +
                   rng.uniform(-0.05, 0.05) * config.canvas_height;

  std::vector<double> births;
  for (int j = 0; j < config.initial_leaves; ++j)
    births.push_back(1.0 - (config.initial_leaves - j) * interval);
  for (double b = 1.0 + bud_phase * interval; b <= config.days + 1e-9;
       b += interval) {
    births.push_back(b);
    state.budding_days.push_back(b);
  }

  double base_length = 0.28 *
                       std::min(config.canvas_width, config.canvas_height) *
                       config.leaf_growth_scale[t] * length_scale;
  constexpr std::array<int, 3> kBaseColor = {46, 138, 58};
  for (size_t k = 0; k < births.size(); ++k) {
    Leaf leaf;
    leaf.length_jitter = rng.uniform(0.9, 1.1);
    for (int c = 0; c < 3; ++c) {
      long v = kBaseColor[c] + std::lround(rng.uniform(-18.0, 18.0));
      leaf.color[c] = static_cast<uint8_t>(std::clamp(v, 0L, 255L));
    }
    if (births[k] > day + 1e-9) continue;  // births ascend, draws already done
    leaf.angle_rad = angle0 + static_cast<double>(k) * kGoldenAngle;
    leaf.birth_day = births[k];
    leaf.max_length_px = base_length * leaf.length_jitter;
    state.leaves.push_back(leaf);
  }
  return state;
}

std::vector<double> ambient_series(const SimulatorConfig& config) {
  config.validate();
  Rng rng(mix_seed(config.seed, kAmbientTag));
  std::vector<double> out(config.days);
  for (double& v : out)
    v = std::llround(rng.uniform(config.ambient_low_c, config.ambient_high_c) *
                     100.0) /
        100.0;
  return out;
}

ContourAnnotation plant_contour(const SimulatorConfig& config,
                                const PlantState& state) {
  if (state.leaves.empty())
    throw std::invalid_argument("plant_contour: plant has no leaves");
  std::vector<std::array<double, 2>> samples;
  samples.reserve(state.leaves.size() * 48);
  for (const Leaf& leaf : state.leaves) {
    LeafEllipse e = leaf_ellipse(config, state, leaf);
    for (int k = 0; k < 48; ++k) {
      double th = 2.0 * kPi * k / 48.0;
      double s = e.a * std::cos(th), t = e.b * std::sin(th);
      samples.push_back(
          {e.cx + s * e.ux - t * e.uy, e.cy + s * e.uy + t * e.ux});
    }
  }
  auto hull = convex_hull(std::move(samples));
  auto outer =
      offset_convex(hull, static_cast<double>(config.annotation_margin_px));

  ContourAnnotation contour;
  for (const auto& p : outer) {
    std::array<int, 2> v = {static_cast<int>(std::llround(p[0])),
                            static_cast<int>(std::llround(p[1]))};
    if (contour.points.empty() || contour.points.back() != v)
      contour.points.push_back(v);
  }
  while (contour.points.size() > 1 &&
         contour.points.front() == contour.points.back())
    contour.points.pop_back();
  if (contour.points.size() < 3)
    throw std::runtime_error("plant_contour: degenerate outline");
  return contour;
}

ImageU8 render_plant_rgb(const SimulatorConfig& config,
                         const PlantState& state) {
  if (state.leaves.empty())
    throw std::invalid_argument("render_plant_rgb: plant has no leaves");
  ImageU8 img = ImageU8::zeros(config.canvas_width, config.canvas_height, 3);
  for (const Leaf& leaf : state.leaves) {
    LeafEllipse e = leaf_ellipse(config, state, leaf);
    double age = state.day - leaf.birth_day;
    double brightness = 1.0 + 0.3 * std::exp(-age / 2.5);  // young = lighter
    int x0 = std::max(0, static_cast<int>(std::floor(e.cx - e.a - 1.0)));
    int x1 = std::min(config.canvas_width - 1,
                      static_cast<int>(std::ceil(e.cx + e.a + 1.0)));
    int y0 = std::max(0, static_cast<int>(std::floor(e.cy - e.a - 1.0)));
    int y1 = std::min(config.canvas_height - 1,
                      static_cast<int>(std::ceil(e.cy + e.a + 1.0)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double dx = x + 0.5 - e.cx, dy = y + 0.5 - e.cy;
        double s = (dx * e.ux + dy * e.uy) / e.a;
        double t = (-dx * e.uy + dy * e.ux) / e.b;
        if (s * s + t * t > 1.0) continue;
        for (int c = 0; c < 3; ++c) {
          long v = std::lround(leaf.color[c] * brightness);
          img.at(x, y, c) = static_cast<uint8_t>(std::clamp(v, 0L, 255L));
        }
      }
    }
  }
  return img;
}

ImageU16 render_plant_thermal(const SimulatorConfig& config,
                              const PlantState& state, double ambient_c,
                              Rng& rng) {
  ContourAnnotation contour = plant_contour(config, state);
  Mask mask =
      rasterize_contour(contour, config.canvas_width, config.canvas_height);
  Mask plant = erode(mask, kDefaultErosionRadius);

  double offset = config.treatment_offsets_c[static_cast<int>(
      state.id.treatment)];
  if (config.day13_anomaly && state.day == 13 &&
      state.id.treatment == Treatment::D)
    offset = config.treatment_offsets_c[0];

  double leaf_c = ambient_c - config.leaf_cooling_c + offset +
                  rng.normal() * config.leaf_temp_sigma_c;
  bool noisy = config.sensor_noise_sigma_c > 0.0;

  ImageU16 img = ImageU16::zeros(config.canvas_width, config.canvas_height);
  for (int y = 0; y < config.canvas_height; ++y) {
    for (int x = 0; x < config.canvas_width; ++x) {
      double c = plant.get(x, y) ? leaf_c : ambient_c;
      if (noisy) c += rng.normal() * config.sensor_noise_sigma_c;
      c = std::clamp(c, kSensorMinC, kSensorMaxC);
      img.at(x, y) = static_cast<uint16_t>(std::llround(c * 100.0));
    }
  }
  return img;
}

DatasetConfig dataset_config(const SimulatorConfig& config) {
  DatasetConfig ds;
  ds.plants_per_treatment = config.plants_per_treatment;
  ds.days = config.days;
  std::erase_if(ds.test_indices, [&](int i) {
    return i > config.plants_per_treatment;
  });
  return ds;
}

void simulate_to_directory(const SimulatorConfig& config, const fs::path& root,
                           int jobs) {
  config.validate();
  if (jobs < 1)
    throw std::invalid_argument("simulate_to_directory: jobs must be positive");
  fs::create_directories(root);

  std::vector<double> ambient = ambient_series(config);
  {
    std::ofstream out(root / "ambient.csv");
    if (!out)
      throw std::runtime_error("cannot write " +
                               (root / "ambient.csv").string());
    out << "day,ambient_c\n";
    for (int d = 0; d < config.days; ++d)
      out << (d + 1) << ',' << format_fixed(ambient[d], 2) << '\n';
  }

  std::vector<PlantId> plants;
  for (Treatment t : kAllTreatments)
    for (int idx = 1; idx <= config.plants_per_treatment; ++idx)
      plants.push_back({t, idx});

  std::vector<std::string> manifest_rows(plants.size());
  parallel_for(static_cast<int64_t>(plants.size()), jobs, [&](int64_t i) {
    const PlantId plant = plants[i];
    fs::path dir = plant_directory(root, plant);
    fs::create_directories(dir);
    uint64_t plant_seed = mix_seed(config.seed, plant_seed_tag(plant));

    std::vector<double> budding;
    for (int day = 1; day <= config.days; ++day) {
      PlantState state = grow_plant(config, plant, day);
      ContourAnnotation contour = plant_contour(config, state);
      Rng rng(mix_seed(mix_seed(plant_seed, kThermalNoiseTag),
                       static_cast<uint64_t>(day)));
      ImageU16 thermal =
          render_plant_thermal(config, state, ambient[day - 1], rng);
      write_pgm16(dir / image_file_name(day, Modality::Thermal), thermal);
      save_contour(dir / contour_file_name(day, Modality::Thermal), contour);
      if (config.emit_rgb) {
        ImageU8 rgb = render_plant_rgb(config, state);
        write_png_rgb8(dir / image_file_name(day, Modality::Rgb), rgb);
        save_contour(dir / contour_file_name(day, Modality::Rgb), contour);
      }
      if (day == config.days) budding = state.budding_days;
    }

    std::string row;
    row += treatment_letter(plant.treatment);
    row += ',' + std::to_string(plant.index) + ',';
    for (size_t b = 0; b < budding.size(); ++b) {
      if (b) row += '|';
      row += format_fixed(budding[b], 2);
    }
    manifest_rows[i] = std::move(row);
  });

  std::ofstream manifest(root / "manifest.csv");
  if (!manifest)
    throw std::runtime_error("cannot write " +
                             (root / "manifest.csv").string());
  manifest << "treatment,plant,budding_days\n";
  for (const std::string& row : manifest_rows) manifest << row << '\n';
}

}  // namespace rgbt
