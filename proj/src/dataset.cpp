#include "rgbt/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;

namespace rgbt {

char treatment_letter(Treatment t) {
  return static_cast<char>('A' + static_cast<int>(t));
}

Treatment treatment_from_letter(char c) {
  if (c < 'A' || c > 'D')
    throw std::invalid_argument(std::string("unknown treatment letter: ") + c);
  return static_cast<Treatment>(c - 'A');
}

double irrigation_fraction(Treatment t) {
  static constexpr double kFractions[4] = {1.0, 0.8, 0.6, 0.4};
  return kFractions[static_cast<int>(t)];
}

const char* modality_name(Modality m) {
  return m == Modality::Rgb ? "rgb" : "thermal";
}

std::string plant_name(const PlantId& p) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c/%02d", treatment_letter(p.treatment),
                p.index);
  return buf;
}

uint64_t plant_seed_tag(const PlantId& p) {
  return static_cast<uint64_t>(static_cast<int>(p.treatment)) * 1000 +
         static_cast<uint64_t>(p.index);
}

ContourAnnotation load_contour(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open contour: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": bad contour JSON: " + e.what());
  }
  if (!doc.is_array())
    throw std::runtime_error(path.string() + ": contour must be a point array");
  ContourAnnotation out;
  out.points.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_array() || item.size() != 2 ||
        !item[0].is_number_integer() || !item[1].is_number_integer())
      throw std::runtime_error(path.string() +
                               ": contour points must be integer [x, y] pairs");
    out.points.push_back({item[0].get<int>(), item[1].get<int>()});
  }
  if (out.points.size() < 3)
    throw std::runtime_error(path.string() + ": contour needs at least 3 points");
  return out;
}

void save_contour(const fs::path& path, const ContourAnnotation& contour) {
  if (contour.points.size() < 3)
    throw std::invalid_argument("save_contour: contour needs at least 3 points");
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& p : contour.points) doc.push_back({p[0], p[1]});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write contour: " + path.string());
  out << doc.dump() << "\n";
}

Mask rasterize_contour(const ContourAnnotation& contour, int width,
                       int height) {
  const auto& pts = contour.points;
  if (pts.size() < 3)
    throw std::invalid_argument("rasterize_contour: fewer than 3 points");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("rasterize_contour: bad mask dimensions");

  bool collinear = true;
  for (size_t i = 2; i < pts.size() && collinear; ++i) {
    long long cross =
        static_cast<long long>(pts[1][0] - pts[0][0]) * (pts[i][1] - pts[0][1]) -
        static_cast<long long>(pts[1][1] - pts[0][1]) * (pts[i][0] - pts[0][0]);
    if (cross != 0) collinear = false;
  }
  if (collinear)
    throw std::invalid_argument("rasterize_contour: degenerate contour");

  Mask mask = Mask::zeros(width, height);
  std::vector<double> xs;
  xs.reserve(pts.size());
  for (int y = 0; y < height; ++y) {
    double cy = y + 0.5;
    xs.clear();
    for (size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      const auto& q = pts[(i + 1) % pts.size()];
      // half-open span in y avoids double-counting shared vertices
      if ((p[1] > cy) == (q[1] > cy)) continue;
      // multiply before dividing: the product is a half-integer and exact,
      // so a crossing that lands exactly on a pixel center stays exact
      xs.push_back(p[0] +
                   (cy - p[1]) * (q[0] - p[0]) / (q[1] - p[1]));
    }
    if (xs.empty()) continue;
    std::sort(xs.begin(), xs.end());
    for (int x = 0; x < width; ++x) {
      double cx = x + 0.5;
      // inside when an odd number of crossings lie strictly right of center
      size_t right = xs.end() - std::upper_bound(xs.begin(), xs.end(), cx);
      if (right & 1) mask.set(x, y, true);
    }
  }
  return mask;
}

TemperatureGrid decode_thermal(const ImageU16& raw) {
  if (raw.width <= 0 || raw.height <= 0 || raw.pixels.empty())
    throw std::invalid_argument("decode_thermal: empty raster");
  TemperatureGrid grid = TemperatureGrid::zeros(raw.width, raw.height);
  for (size_t i = 0; i < raw.pixels.size(); ++i)
    grid.celsius[i] = raw.pixels[i] / 100.0;
  return grid;
}

TemperatureGrid decode_thermal(const ImageU16& raw, int expected_width,
                               int expected_height) {
  if (raw.width != expected_width || raw.height != expected_height)
    throw std::runtime_error(
        "decode_thermal: raster is " + std::to_string(raw.width) + "x" +
        std::to_string(raw.height) + ", expected " +
        std::to_string(expected_width) + "x" + std::to_string(expected_height));
  return decode_thermal(raw);
}

bool DatasetIndex::has(const PlantId& plant, int day, Modality m) const {
  return records.count(RecordKey{plant, day, m}) != 0;
}

const ImageRecord& DatasetIndex::at(const PlantId& plant, int day,
                                    Modality m) const {
  auto it = records.find(RecordKey{plant, day, m});
  if (it == records.end())
    throw std::runtime_error("no record for " + plant_name(plant) + " day " +
                             std::to_string(day) + " " + modality_name(m));
  return it->second;
}

std::vector<PlantId> DatasetIndex::plants() const {
  std::vector<PlantId> out;
  for (const auto& [key, rec] : records) {
    if (out.empty() || out.back() != key.plant) out.push_back(key.plant);
  }
  return out;  // map order keeps this sorted and unique
}

std::string image_file_name(int day, Modality m) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02d.%s.%s", day, modality_name(m),
                m == Modality::Rgb ? "png" : "pgm");
  return buf;
}

std::string contour_file_name(int day, Modality m) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02d.%s.contour.json", day,
                modality_name(m));
  return buf;
}

fs::path plant_directory(const fs::path& root, const PlantId& plant) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", plant.index);
  return root / std::string(1, treatment_letter(plant.treatment)) / buf;
}

namespace {

// Day prefix of a record file name: one or two digits before the first dot.
int parse_day_prefix(const std::string& name, const fs::path& where) {
  size_t dot = name.find('.');
  if (dot == std::string::npos || dot == 0 || dot > 2)
    throw std::runtime_error("malformed file name: " + (where / name).string());
  int day = 0;
  for (size_t i = 0; i < dot; ++i) {
    char c = name[i];
    if (c < '0' || c > '9')
      throw std::runtime_error("malformed file name: " +
                               (where / name).string());
    day = day * 10 + (c - '0');
  }
  if (day < 1)
    throw std::runtime_error("malformed file name: " + (where / name).string());
  return day;
}

int parse_plant_dir(const std::string& name, const fs::path& where) {
  if (name.empty() || name.size() > 2)
    throw std::runtime_error("malformed plant directory: " +
                             (where / name).string());
  int idx = 0;
  for (char c : name) {
    if (c < '0' || c > '9')
      throw std::runtime_error("malformed plant directory: " +
                               (where / name).string());
    idx = idx * 10 + (c - '0');
  }
  if (idx < 1)
    throw std::runtime_error("malformed plant directory: " +
                             (where / name).string());
  return idx;
}

}  // namespace

DatasetIndex load_dataset_index(const fs::path& root,
                                const DatasetConfig& config) {
  if (!fs::exists(root) || !fs::is_directory(root))
    throw std::runtime_error("dataset root is not a readable directory: " +
                             root.string());
  if (config.days < 1 || config.plants_per_treatment < 1)
    throw std::invalid_argument("load_dataset_index: bad dataset config");

  DatasetIndex index;
  index.root = root;
  index.config = config;

  std::map<RecordKey, fs::path> contours;

  for (Treatment t : kAllTreatments) {
    fs::path tdir = root / std::string(1, treatment_letter(t));
    if (!fs::exists(tdir)) {
      index.warnings.push_back("missing treatment directory: " +
                               tdir.string());
      continue;
    }
    std::vector<fs::path> plant_dirs;
    for (const auto& entry : fs::directory_iterator(tdir)) {
      if (!entry.is_directory())
        throw std::runtime_error("unexpected file in treatment directory: " +
                                 entry.path().string());
      plant_dirs.push_back(entry.path());
    }
    std::sort(plant_dirs.begin(), plant_dirs.end());
    for (const fs::path& pdir : plant_dirs) {
      int plant_idx = parse_plant_dir(pdir.filename().string(), tdir);
      PlantId plant{t, plant_idx};
      if (plant_idx > config.plants_per_treatment)
        index.warnings.push_back("plant index beyond configured range: " +
                                 pdir.string());

      std::vector<std::string> names;
      for (const auto& entry : fs::directory_iterator(pdir)) {
        if (!entry.is_regular_file())
          throw std::runtime_error("unexpected entry in plant directory: " +
                                   entry.path().string());
        names.push_back(entry.path().filename().string());
      }
      std::sort(names.begin(), names.end());
      for (const std::string& name : names) {
        int day = parse_day_prefix(name, pdir);
        Modality m;
        bool is_contour = false;
        std::string rest = name.substr(name.find('.'));
        if (rest == ".rgb.png") {
          m = Modality::Rgb;
        } else if (rest == ".thermal.pgm") {
          m = Modality::Thermal;
        } else if (rest == ".rgb.contour.json") {
          m = Modality::Rgb;
          is_contour = true;
        } else if (rest == ".thermal.contour.json") {
          m = Modality::Thermal;
          is_contour = true;
        } else {
          throw std::runtime_error("malformed file name: " +
                                   (pdir / name).string());
        }
        RecordKey key{plant, day, m};
        if (is_contour) {
          if (!contours.emplace(key, pdir / name).second)
            throw std::runtime_error("duplicate contour for " +
                                     plant_name(plant) + " day " +
                                     std::to_string(day));
        } else {
          if (!index.records.emplace(key, ImageRecord{pdir / name, {}}).second)
            throw std::runtime_error("duplicate record for " +
                                     plant_name(plant) + " day " +
                                     std::to_string(day) + " " +
                                     modality_name(m));
        }
      }
    }
  }

  for (auto& [key, path] : contours) {
    auto it = index.records.find(key);
    if (it == index.records.end()) {
      index.warnings.push_back("contour without image: " + path.string());
    } else {
      it->second.contour_path = path;
    }
  }

  if (index.records.empty())
    throw std::runtime_error("no records found under " + root.string());

  // report expected-but-absent files so gaps are visible downstream
  for (Treatment t : kAllTreatments) {
    for (int p = 1; p <= config.plants_per_treatment; ++p) {
      PlantId plant{t, p};
      if (!fs::exists(plant_directory(root, plant))) {
        index.warnings.push_back("missing plant directory: " +
                                 plant_directory(root, plant).string());
        continue;
      }
      for (int day = 1; day <= config.days; ++day) {
        for (Modality m : {Modality::Rgb, Modality::Thermal}) {
          auto it = index.records.find(RecordKey{plant, day, m});
          if (it == index.records.end()) {
            index.warnings.push_back(
                "missing image: " +
                (plant_directory(root, plant) / image_file_name(day, m))
                    .string());
          } else if (it->second.contour_path.empty()) {
            index.warnings.push_back(
                "missing contour: " +
                (plant_directory(root, plant) / contour_file_name(day, m))
                    .string());
          }
        }
      }
    }
  }

  return index;
}

DatasetSplit split_train_test(const DatasetIndex& index,
                              const std::vector<int>& test_indices) {
  std::set<int> test_set;
  for (int idx : test_indices) {
    if (idx < 1 || idx > index.config.plants_per_treatment)
      throw std::invalid_argument("test index out of range: " +
                                  std::to_string(idx));
    if (!test_set.insert(idx).second)
      throw std::invalid_argument("overlapping test index: " +
                                  std::to_string(idx));
  }

  DatasetSplit split;
  split.train.root = split.test.root = index.root;
  split.train.config = split.test.config = index.config;
  for (const auto& [key, rec] : index.records) {
    (test_set.count(key.plant.index) ? split.test : split.train)
        .records.emplace(key, rec);
  }
  if (split.train.records.empty())
    throw std::runtime_error("split_train_test: empty training set");
  return split;
}

}  // namespace rgbt
