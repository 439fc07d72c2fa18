// Command-line front end: simulate, ingest, train, evaluate, baseline,
// report. Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rgbt/baseline.hpp"
#include "rgbt/common.hpp"
#include "rgbt/dataset.hpp"
#include "rgbt/fusion.hpp"
#include "rgbt/image_io.hpp"
#include "rgbt/imaging.hpp"
#include "rgbt/network.hpp"
#include "rgbt/pipeline.hpp"
#include "rgbt/simulator.hpp"
#include "rgbt/svg.hpp"

namespace fs = std::filesystem;
using namespace rgbt;

namespace {

// Bad flag/config content discovered after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative output paths land under $RGBT_OUT_ROOT when it is set.
fs::path out_path(const fs::path& p) {
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("RGBT_OUT_ROOT"); root && *root)
    return fs::path(root) / p;
  return p;
}

std::ofstream open_csv(const fs::path& path, uint64_t seed,
                       const std::string& header) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# seed=" << seed << "\n" << header << "\n";
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// '#'-prefixed lines are comments (the seed echo uses one).
CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    if (table.header.empty())
      table.header = std::move(cells);
    else
      table.rows.push_back(std::move(cells));
  }
  if (table.header.empty())
    throw std::runtime_error(path.string() + ": no header row");
  return table;
}

size_t column(const CsvTable& table, const std::string& name,
              const fs::path& path) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end())
    throw std::runtime_error(path.string() + ": missing column " + name);
  return static_cast<size_t>(it - table.header.begin());
}

double cell_num(const std::vector<std::string>& row, size_t col,
                const fs::path& path) {
  if (col >= row.size())
    throw std::runtime_error(path.string() + ": short row");
  try {
    return std::stod(row[col]);
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ": bad number " + row[col]);
  }
}

void print_warnings(const DatasetIndex& index) {
  for (const std::string& w : index.warnings)
    std::cerr << "warning: " << w << "\n";
}

InputKind parse_model(const std::string& name) {
  if (name == "single-rgb") return {Modality::Rgb, false};
  if (name == "triplet-rgb") return {Modality::Rgb, true};
  if (name == "single-thermal") return {Modality::Thermal, false};
  if (name == "triplet-thermal") return {Modality::Thermal, true};
  throw UsageError("unknown model " + name +
                   " (expected single-rgb, single-thermal, triplet-rgb or "
                   "triplet-thermal)");
}

NetworkSpec model_spec(const InputKind& kind, const PreprocessOptions& pre) {
  int w = pre.target_width * (kind.triplet ? 3 : 1);
  return kind.modality == Modality::Rgb
             ? rgb_network_spec(pre.target_height, w)
             : thermal_network_spec(pre.target_height, w);
}

// Zeros fall back to the per-family defaults (RGB: Adam 1e-3, batch 24, 100
// epochs; thermal: SGD 1e-2, batch 32, 400 epochs).
struct TrainFlags {
  int epochs = 0;
  int batch = 0;
  double lr = 0.0;
  std::string optimizer;
};

TrainConfig family_train_config(const InputKind& kind, const TrainFlags& f,
                                bool augment, uint64_t seed) {
  bool rgb = kind.modality == Modality::Rgb;
  TrainConfig tc;
  tc.epochs = f.epochs > 0 ? f.epochs : (rgb ? 100 : 400);
  tc.batch_size = f.batch > 0 ? f.batch : (rgb ? 24 : 32);
  tc.optimizer = !f.optimizer.empty() ? f.optimizer : (rgb ? "adam" : "sgd");
  tc.learning_rate = f.lr > 0.0 ? f.lr : (rgb ? 1e-3 : 1e-2);
  tc.augment = augment;
  tc.policy =
      kind.triplet ? AugmentPolicy::day_strip() : AugmentPolicy::single_frame();
  tc.seed = seed;
  return tc;
}

TrainingSet collect(const DatasetIndex& index, const InputKind& kind,
                    const PreprocessOptions& pre, int jobs) {
  std::vector<std::pair<PlantId, int>> keys;
  for (const PlantId& plant : index.plants())
    for (int day = 1; day <= index.config.days; ++day)
      if (index.has(plant, day, kind.modality)) keys.emplace_back(plant, day);
  if (keys.empty())
    throw std::runtime_error("no usable " + input_kind_name(kind) + " records");

  TrainingSet set;
  set.images.resize(keys.size());
  set.labels.resize(keys.size());
  parallel_for(static_cast<int64_t>(keys.size()), jobs, [&](int64_t i) {
    set.images[i] =
        model_input(index, keys[i].first, keys[i].second, kind, pre);
    set.labels[i] = static_cast<int>(keys[i].first.treatment);
  });
  return set;
}

// --- report rendering (shared by evaluate/baseline/report) ------------------

// Series per distinct value of `group_col`, x/y from the named columns.
PlotSpec series_plot(const CsvTable& table, const fs::path& path,
                     const std::string& group_col, const std::string& x_col,
                     const std::string& y_col) {
  size_t g = column(table, group_col, path);
  size_t xc = column(table, x_col, path);
  size_t yc = column(table, y_col, path);
  PlotSpec spec;
  std::map<std::string, size_t> series_index;
  for (const auto& row : table.rows) {
    if (g >= row.size()) throw std::runtime_error(path.string() + ": short row");
    auto [it, fresh] =
        series_index.try_emplace(row[g], spec.series.size());
    if (fresh) spec.series.push_back({row[g], {}, {}});
    PlotSeries& s = spec.series[it->second];
    s.xs.push_back(cell_num(row, xc, path));
    s.ys.push_back(cell_num(row, yc, path));
  }
  return spec;
}

int render_reports(const fs::path& dir) {
  int written = 0;
  auto emit = [&](const fs::path& p) {
    std::cout << "wrote " << p.string() << "\n";
    ++written;
  };

  if (fs::exists(dir / "table2.csv")) {
    CsvTable t = read_csv(dir / "table2.csv");
    PlotSpec spec =
        series_plot(t, dir / "table2.csv", "model", "window", "accuracy");
    spec.title = "Rolling-window accuracy";
    spec.x_label = "window length (days)";
    spec.y_label = "accuracy";
    spec.y_min = 0.0;
    spec.y_max = 1.0;
    write_line_plot(dir / "accuracy_vs_window.svg", spec);
    emit(dir / "accuracy_vs_window.svg");
  }
  if (fs::exists(dir / "binary.csv")) {
    CsvTable t = read_csv(dir / "binary.csv");
    PlotSpec spec =
        series_plot(t, dir / "binary.csv", "model", "window", "accuracy");
    spec.title = "Fully irrigated vs stressed";
    spec.x_label = "window length (days)";
    spec.y_label = "accuracy";
    spec.y_min = 0.0;
    spec.y_max = 1.0;
    write_line_plot(dir / "binary_vs_window.svg", spec);
    emit(dir / "binary_vs_window.svg");
  }
  if (fs::exists(dir / "per_day.csv")) {
    CsvTable t = read_csv(dir / "per_day.csv");
    PlotSpec spec = series_plot(t, dir / "per_day.csv", "model", "day", "mean");
    spec.title = "Accuracy by day (all days so far)";
    spec.x_label = "day";
    spec.y_label = "mean class accuracy";
    spec.y_min = 0.0;
    spec.y_max = 1.0;
    write_line_plot(dir / "per_day.svg", spec);
    emit(dir / "per_day.svg");
  }
  if (fs::exists(dir / "ladder.csv")) {
    CsvTable t = read_csv(dir / "ladder.csv");
    size_t m = column(t, "metric", dir / "ladder.csv");
    size_t a = column(t, "accuracy", dir / "ladder.csv");
    BarSpec bars;
    bars.title = "Temperature baseline";
    bars.y_label = "accuracy";
    bars.y_min = 0.0;
    bars.y_max = 1.0;
    for (const auto& row : t.rows) {
      bars.labels.push_back(row[m]);
      bars.values.push_back(cell_num(row, a, dir / "ladder.csv"));
    }
    write_bar_plot(dir / "ladder.svg", bars);
    emit(dir / "ladder.svg");
  }
  if (fs::exists(dir / "noise_sweep.csv")) {
    CsvTable t = read_csv(dir / "noise_sweep.csv");
    PlotSpec spec =
        series_plot(t, dir / "noise_sweep.csv", "metric", "sigma", "accuracy");
    spec.title = "Baseline vs temperature noise";
    spec.x_label = "noise sigma (Celsius)";
    spec.y_label = "accuracy";
    spec.y_min = 0.0;
    spec.y_max = 1.0;
    write_line_plot(dir / "noise_sweep.svg", spec);
    emit(dir / "noise_sweep.svg");
  }

  PlotSpec losses;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.size() <= 9 || name.substr(name.size() - 9) != "_loss.csv")
      continue;
    CsvTable t = read_csv(entry.path());
    size_t e = column(t, "epoch", entry.path());
    size_t l = column(t, "loss", entry.path());
    PlotSeries s;
    s.label = name.substr(0, name.size() - 9);
    for (const auto& row : t.rows) {
      s.xs.push_back(cell_num(row, e, entry.path()));
      s.ys.push_back(cell_num(row, l, entry.path()));
    }
    losses.series.push_back(std::move(s));
  }
  if (!losses.series.empty()) {
    std::sort(losses.series.begin(), losses.series.end(),
              [](const PlotSeries& a, const PlotSeries& b) {
                return a.label < b.label;
              });
    losses.title = "Training loss";
    losses.x_label = "epoch";
    losses.y_label = "mean cross-entropy";
    write_line_plot(dir / "loss_curves.svg", losses);
    emit(dir / "loss_curves.svg");
  }
  return written;
}

// --- simulate ---------------------------------------------------------------

struct SimulateCmd {
  std::string out = "data";
  uint64_t seed = 1;
  int plants = 30;
  int days = 17;
  int width = kNativeWidth;
  int height = kNativeHeight;
  double noise = -1.0;  // sets both sigmas unless given individually
  double sensor_noise = -1.0;
  double leaf_noise = -1.0;
  double ambient_low = 34.0;
  double ambient_high = 39.0;
  std::vector<double> offsets;
  std::vector<double> intervals;
  std::vector<double> growth;
  int initial_leaves = 3;
  int margin = 2;
  bool anomaly = false;
  bool thermal_only = false;
  int jobs = 1;
};

SimulatorConfig simulate_config(const SimulateCmd& o) {
  SimulatorConfig cfg;
  cfg.plants_per_treatment = o.plants;
  cfg.days = o.days;
  cfg.canvas_width = o.width;
  cfg.canvas_height = o.height;
  cfg.ambient_low_c = o.ambient_low;
  cfg.ambient_high_c = o.ambient_high;
  cfg.sensor_noise_sigma_c =
      o.sensor_noise >= 0 ? o.sensor_noise : (o.noise >= 0 ? o.noise : 1.5);
  cfg.leaf_temp_sigma_c =
      o.leaf_noise >= 0 ? o.leaf_noise : (o.noise >= 0 ? o.noise : 0.8);
  auto quad = [](const std::vector<double>& v, std::array<double, 4>& dst,
                 const char* what) {
    if (v.empty()) return;
    if (v.size() != 4)
      throw UsageError(std::string(what) + " needs exactly 4 values");
    std::copy(v.begin(), v.end(), dst.begin());
  };
  quad(o.offsets, cfg.treatment_offsets_c, "--offsets");
  quad(o.intervals, cfg.leaf_interval_days, "--intervals");
  quad(o.growth, cfg.leaf_growth_scale, "--growth");
  cfg.initial_leaves = o.initial_leaves;
  cfg.annotation_margin_px = o.margin;
  cfg.day13_anomaly = o.anomaly;
  cfg.emit_rgb = !o.thermal_only;
  cfg.seed = o.seed;
  return cfg;
}

void run_simulate(const SimulateCmd& o) {
  SimulatorConfig cfg = simulate_config(o);
  fs::path root = out_path(o.out);
  simulate_to_directory(cfg, root, o.jobs);
  int rasters = 4 * cfg.plants_per_treatment * cfg.days *
                (cfg.emit_rgb ? 2 : 1);
  std::cout << "simulated " << 4 * cfg.plants_per_treatment << " plants x "
            << cfg.days << " days (" << rasters << " rasters) under "
            << root.string() << "\n";
}

// --- ingest -----------------------------------------------------------------

struct IngestCmd {
  std::string data;
  int plants = 30;
  int days = 17;
  std::vector<int> test = {5, 10, 15, 20};
  std::string dump_masks;
};

void run_ingest(const IngestCmd& o) {
  DatasetConfig cfg{o.plants, o.days, o.test};
  DatasetIndex index = load_dataset_index(o.data, cfg);
  print_warnings(index);

  int64_t rgb = 0, thermal = 0, without_contour = 0;
  for (const auto& [key, rec] : index.records) {
    (key.modality == Modality::Rgb ? rgb : thermal) += 1;
    if (rec.contour_path.empty()) ++without_contour;
  }
  std::cout << "root: " << index.root.string() << "\n"
            << "plants: " << index.plants().size() << "\n"
            << "rgb records: " << rgb << "\n"
            << "thermal records: " << thermal << "\n"
            << "records without contour: " << without_contour << "\n"
            << "warnings: " << index.warnings.size() << "\n";

  if (o.dump_masks.empty()) return;
  fs::path dump = out_path(o.dump_masks);
  fs::create_directories(dump);
  int64_t dumped = 0;
  for (const auto& [key, rec] : index.records) {
    if (rec.contour_path.empty()) continue;
    PgmFile probe;
    int w, h;
    if (key.modality == Modality::Thermal) {
      probe = read_pgm(rec.image_path);
      w = probe.image.width;
      h = probe.image.height;
    } else {
      ImageU8 img = read_png_rgb8(rec.image_path);
      w = img.width;
      h = img.height;
    }
    Mask mask = rasterize_contour(load_contour(rec.contour_path), w, h);
    Mask interior = erode(mask, kDefaultErosionRadius);
    Mask band = contour_band(mask, interior);
    char stem[64];
    std::snprintf(stem, sizeof(stem), "%c%02d_d%02d_%s",
                  treatment_letter(key.plant.treatment), key.plant.index,
                  key.day, modality_name(key.modality));
    write_mask_pgm(dump / (std::string(stem) + "_mask.pgm"), mask);
    write_mask_pgm(dump / (std::string(stem) + "_interior.pgm"), interior);
    write_mask_pgm(dump / (std::string(stem) + "_band.pgm"), band);
    ++dumped;
  }
  std::cout << "dumped masks for " << dumped << " records under "
            << dump.string() << "\n";
}

// --- train ------------------------------------------------------------------

struct TrainCmd {
  std::string data;
  std::string model = "single-thermal";
  std::string out = "models";
  std::string scale = "quarter";
  int plants = 30;
  int days = 17;
  std::vector<int> test = {5, 10, 15, 20};
  uint64_t seed = 1;
  TrainFlags flags;
  bool augment = true;
  int jobs = 1;
};

void run_train(const TrainCmd& o) {
  // reject bad arguments before touching the filesystem
  InputKind kind = parse_model(o.model);
  PreprocessOptions pre = input_scale(o.scale);

  DatasetConfig cfg{o.plants, o.days, o.test};
  DatasetIndex index = load_dataset_index(o.data, cfg);
  print_warnings(index);
  DatasetSplit split = split_train_test(index, cfg.test_indices);
  TrainingSet set = collect(split.train, kind, pre, o.jobs);

  Network net(model_spec(kind, pre));
  Rng init_rng(mix_seed(o.seed, 1));
  net.init_weights(init_rng);

  TrainConfig tc = family_train_config(kind, o.flags, o.augment,
                                       mix_seed(o.seed, 2));
  fs::path dir = out_path(o.out);
  fs::create_directories(dir);
  tc.loss_csv = dir / (o.model + "_loss.csv");
  tc.log = &std::cout;

  std::cout << net.spec().describe() << "\n"
            << "training on " << set.images.size() << " frames ("
            << tc.optimizer << ", lr=" << tc.learning_rate << ", batch "
            << tc.batch_size << ", " << tc.epochs << " epochs)\n";
  auto history = train(net, set.images, set.labels, tc);

  fs::path ckpt = dir / (o.model + ".ckpt");
  save_checkpoint(ckpt, net);
  std::cout << "final loss " << format_fixed(history.back().loss, 6)
            << ", train accuracy " << format_fixed(history.back().accuracy, 4)
            << "\nwrote " << ckpt.string() << "\n";
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateCmd {
  std::string data;
  std::string out = "evaluation";
  std::string scale = "quarter";
  std::string ratio = "auto";  // or "<thermal>:<rgb>" copies
  std::string inference = "stochastic";
  int plants = 30;
  int days = 17;
  std::vector<int> test = {5, 10, 15, 20};
  int holdout = 2;
  uint64_t seed = 1;
  TrainFlags rgb_flags;
  TrainFlags thermal_flags;
  bool augment = true;
  int jobs = 1;
  std::string save_models;
  std::string load_models;
};

constexpr const char* kModelNames[4] = {"single-rgb", "single-thermal",
                                        "triplet-rgb", "triplet-thermal"};

struct Combo {
  const char* name;
  const char* rgb;      // model name or nullptr
  const char* thermal;  // model name or nullptr
};

constexpr Combo kCombos[8] = {
    {"single-rgb", "single-rgb", nullptr},
    {"single-thermal", nullptr, "single-thermal"},
    {"triplet-rgb", "triplet-rgb", nullptr},
    {"triplet-thermal", nullptr, "triplet-thermal"},
    {"single-rgb+single-thermal", "single-rgb", "single-thermal"},
    {"single-rgb+triplet-thermal", "single-rgb", "triplet-thermal"},
    {"triplet-rgb+single-thermal", "triplet-rgb", "single-thermal"},
    {"triplet-rgb+triplet-thermal", "triplet-rgb", "triplet-thermal"},
};

std::vector<int> holdout_indices(const DatasetConfig& cfg, int holdout) {
  std::vector<int> candidates;
  for (int i = 1; i <= cfg.plants_per_treatment; ++i)
    if (std::find(cfg.test_indices.begin(), cfg.test_indices.end(), i) ==
        cfg.test_indices.end())
      candidates.push_back(i);
  if (static_cast<int>(candidates.size()) <= holdout)
    throw UsageError("--holdout " + std::to_string(holdout) +
                     " leaves no plants to train on");
  return {candidates.end() - holdout, candidates.end()};
}

void run_evaluate(const EvaluateCmd& o) {
  if (o.test.empty()) throw UsageError("--test must name at least one plant");
  bool auto_ratio = o.ratio == "auto";
  int fixed_thermal = 1, fixed_rgb = 1;
  if (!auto_ratio) {
    auto parts = split(o.ratio, ':');
    try {
      if (parts.size() != 2) throw std::invalid_argument(o.ratio);
      fixed_thermal = std::stoi(parts[0]);
      fixed_rgb = std::stoi(parts[1]);
    } catch (const std::exception&) {
      throw UsageError("--ratio must be auto or <thermal>:<rgb>, got " +
                       o.ratio);
    }
    if (fixed_thermal < 1 || fixed_rgb < 1)
      throw UsageError("--ratio copies must be positive");
  }
  bool stochastic;
  if (o.inference == "stochastic")
    stochastic = true;
  else if (o.inference == "deterministic")
    stochastic = false;
  else
    throw UsageError("--inference must be stochastic or deterministic");

  DatasetConfig cfg{o.plants, o.days, o.test};
  DatasetIndex index = load_dataset_index(o.data, cfg);
  print_warnings(index);
  DatasetSplit split = split_train_test(index, cfg.test_indices);
  if (split.test.plants().empty())
    throw std::runtime_error("test split has no plants on disk");

  DatasetIndex fit = split.train;
  DatasetIndex val;
  if (auto_ratio) {
    DatasetSplit v =
        split_train_test(split.train, holdout_indices(cfg, o.holdout));
    fit = std::move(v.train);
    val = std::move(v.test);
    if (val.plants().empty())
      throw std::runtime_error("validation fold has no plants on disk");
  }

  PreprocessOptions pre = input_scale(o.scale);
  fs::path dir = out_path(o.out);
  fs::create_directories(dir);

  // Train (or load) the four networks.
  std::map<std::string, std::unique_ptr<Network>> nets;
  for (int i = 0; i < 4; ++i) {
    std::string name = kModelNames[i];
    InputKind kind = parse_model(name);
    auto net = std::make_unique<Network>(model_spec(kind, pre));
    fs::path ckpt_in =
        o.load_models.empty() ? fs::path() : out_path(o.load_models) / (name + ".ckpt");
    if (!ckpt_in.empty() && fs::exists(ckpt_in)) {
      load_checkpoint(ckpt_in, *net);
      std::cout << name << ": loaded " << ckpt_in.string() << "\n";
    } else {
      const TrainFlags& flags =
          kind.modality == Modality::Rgb ? o.rgb_flags : o.thermal_flags;
      TrainConfig tc = family_train_config(kind, flags, o.augment,
                                           mix_seed(o.seed, 0xB0 + i));
      tc.loss_csv = dir / (name + "_loss.csv");
      tc.log = &std::cout;
      TrainingSet set = collect(fit, kind, pre, o.jobs);
      Rng init_rng(mix_seed(o.seed, 0xA0 + i));
      net->init_weights(init_rng);
      std::cout << name << ": training on " << set.images.size()
                << " frames (" << tc.optimizer << ", " << tc.epochs
                << " epochs)\n";
      train(*net, set.images, set.labels, tc);
    }
    if (!o.save_models.empty()) {
      fs::path ckpt_out = out_path(o.save_models) / (name + ".ckpt");
      fs::create_directories(ckpt_out.parent_path());
      save_checkpoint(ckpt_out, *net);
    }
    nets[name] = std::move(net);
  }

  // Per-model validation accuracy drives the duplication ratios.
  std::map<std::string, int> pct;
  if (auto_ratio) {
    auto ratios = open_csv(dir / "ratios.csv", o.seed,
                           "model,validation_accuracy,percent");
    for (int i = 0; i < 4; ++i) {
      std::string name = kModelNames[i];
      CnnDayClassifier det(name, nets[name].get(), parse_model(name), pre,
                           /*stochastic=*/false);
      double acc = single_frame_accuracy(det, val, mix_seed(o.seed, 0xC0 + i));
      pct[name] = static_cast<int>(std::lround(acc * 100.0));
      ratios << name << ',' << format_fixed(acc, 4) << ',' << pct[name]
             << "\n";
      std::cout << name << ": validation accuracy " << format_fixed(acc, 4)
                << "\n";
    }
  }

  auto table2 = open_csv(dir / "table2.csv", o.seed,
                         "model,window,windows,correct,accuracy");
  auto binary = open_csv(dir / "binary.csv", o.seed,
                         "model,window,windows,correct,accuracy");
  auto per_day =
      open_csv(dir / "per_day.csv", o.seed,
               "model,day,acc_a,acc_b,acc_c,acc_d,mean");

  for (int c = 0; c < 8; ++c) {
    const Combo& combo = kCombos[c];
    int rgb_copies = 0, thermal_copies = 0;
    if (combo.rgb && combo.thermal) {
      if (auto_ratio) {
        std::vector<std::string> warnings;
        DuplicationRatio r = duplication_ratio(pct[combo.thermal],
                                               pct[combo.rgb], &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        thermal_copies = r.thermal_copies;
        rgb_copies = r.rgb_copies;
      } else {
        thermal_copies = fixed_thermal;
        rgb_copies = fixed_rgb;
      }
    } else {
      rgb_copies = combo.rgb ? 1 : 0;
      thermal_copies = combo.thermal ? 1 : 0;
    }

    std::unique_ptr<CnnDayClassifier> rgb_cls, thermal_cls;
    if (combo.rgb)
      rgb_cls = std::make_unique<CnnDayClassifier>(
          combo.rgb, nets[combo.rgb].get(), parse_model(combo.rgb), pre,
          stochastic);
    if (combo.thermal)
      thermal_cls = std::make_unique<CnnDayClassifier>(
          combo.thermal, nets[combo.thermal].get(), parse_model(combo.thermal),
          pre, stochastic);

    DayLabelTable table =
        sample_day_labels(split.test, rgb_cls.get(), thermal_cls.get(),
                          rgb_copies, thermal_copies,
                          mix_seed(o.seed, 0xD0 + c));

    for (int window = 1; window <= cfg.days; ++window) {
      RollingResult r = rolling_accuracy(table, window);
      table2 << combo.name << ',' << window << ',' << r.windows << ','
             << r.correct << ',' << format_fixed(r.accuracy, 4) << "\n";
      RollingResult b = binary_rolling_accuracy(table, window);
      binary << combo.name << ',' << window << ',' << b.windows << ','
             << b.correct << ',' << format_fixed(b.accuracy, 4) << "\n";
    }
    for (const PerDayRow& row : per_day_accuracy(table)) {
      per_day << combo.name << ',' << row.day;
      for (double a : row.class_accuracy) per_day << ',' << format_fixed(a, 4);
      per_day << ',' << format_fixed(row.mean, 4) << "\n";
    }

    RollingResult first = rolling_accuracy(table, 1);
    RollingResult last = rolling_accuracy(table, cfg.days);
    std::cout << combo.name << " (rgb x" << rgb_copies << ", thermal x"
              << thermal_copies << "): N=1 "
              << format_fixed(first.accuracy, 4) << ", N=" << cfg.days << " "
              << format_fixed(last.accuracy, 4) << "\n";
  }
  table2.close();
  binary.close();
  per_day.close();

  render_reports(dir);
}

// --- baseline ---------------------------------------------------------------

struct BaselineCmd {
  std::string data;
  std::string out = "baseline";
  int plants = 30;
  int days = 17;
  std::vector<int> test = {5, 10, 15, 20};
  int radius = kDefaultErosionRadius;
  int window = 3;
  bool exclude_final_day = false;
  std::string ambient_csv;
  bool noise_sweep = false;
  uint64_t seed = 1;
  int jobs = 1;
};

std::vector<double> load_ambient_csv(const fs::path& path, int days) {
  CsvTable t = read_csv(path);
  size_t d = column(t, "day", path);
  size_t a = column(t, "ambient_c", path);
  std::vector<double> out(days, 0.0);
  std::vector<bool> seen(days, false);
  for (const auto& row : t.rows) {
    int day = static_cast<int>(cell_num(row, d, path));
    if (day < 1 || day > days) continue;  // extra days are harmless
    out[day - 1] = cell_num(row, a, path);
    seen[day - 1] = true;
  }
  for (int i = 0; i < days; ++i)
    if (!seen[i])
      throw std::runtime_error(path.string() + ": no ambient for day " +
                               std::to_string(i + 1));
  return out;
}

void write_ladder_rows(std::ofstream& out, const std::string& prefix,
                       const BaselineLadder& ladder) {
  out << prefix << "single_plant_mean,"
      << format_fixed(ladder.single_plant_mean, 4) << ','
      << ladder.single_windows << "\n";
  out << prefix << "single_plant_minus_contour,"
      << format_fixed(ladder.single_plant_minus_contour, 4) << ','
      << ladder.single_windows << "\n";
  out << prefix << "vote_plant_mean," << format_fixed(ladder.vote_plant_mean, 4)
      << ',' << ladder.vote_windows << "\n";
}

void run_baseline(const BaselineCmd& o) {
  DatasetConfig cfg{o.plants, o.days, o.test};
  DatasetIndex index = load_dataset_index(o.data, cfg);
  print_warnings(index);
  DatasetSplit split = split_train_test(index, cfg.test_indices);
  if (split.test.plants().empty())
    throw std::runtime_error("test split has no plants on disk");

  fs::path dir = out_path(o.out);
  fs::create_directories(dir);

  std::vector<double> ambient;
  BaselineOptions opts;
  opts.erosion_radius = o.radius;
  opts.vote_window = o.window;
  opts.exclude_final_day = o.exclude_final_day;
  if (!o.ambient_csv.empty()) {
    ambient = load_ambient_csv(o.ambient_csv, cfg.days);
    opts.ambient = &ambient;
  }

  {
    auto centroids =
        open_csv(dir / "centroids.csv", o.seed, "kind,treatment,day,celsius");
    for (FeatureKind kind :
         {FeatureKind::PlantMean, FeatureKind::PlantMinusContour}) {
      CentroidTable table =
          fit_centroids(split.train, kind, o.radius, opts.ambient);
      for (const auto& [key, value] : table.means)
        centroids << feature_kind_name(kind) << ','
                  << treatment_letter(key.first) << ',' << key.second << ','
                  << format_fixed(value, 4) << "\n";
    }
  }

  BaselineLadder ladder = evaluate_baseline(split.train, split.test, opts);
  {
    auto out = open_csv(dir / "ladder.csv", o.seed, "metric,accuracy,windows");
    write_ladder_rows(out, opts.ambient ? "corrected_" : "", ladder);
  }
  std::cout << "single-day plant mean:        "
            << format_fixed(ladder.single_plant_mean, 4) << "\n"
            << "single-day mean minus rim:    "
            << format_fixed(ladder.single_plant_minus_contour, 4) << "\n"
            << o.window << "-day vote on plant mean:   "
            << format_fixed(ladder.vote_plant_mean, 4) << "\n";

  if (o.noise_sweep) {
    auto sweep = open_csv(dir / "noise_sweep.csv", o.seed,
                          "metric,sigma,accuracy");
    for (double sigma : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      SimulatorConfig sim;
      sim.plants_per_treatment = 10;
      sim.days = 10;
      sim.canvas_width = 96;
      sim.canvas_height = 72;
      sim.sensor_noise_sigma_c = sigma;
      sim.leaf_temp_sigma_c = sigma;
      sim.emit_rgb = false;
      sim.seed = mix_seed(o.seed, static_cast<uint64_t>(std::llround(sigma * 10)));
      char label[32];
      std::snprintf(label, sizeof(label), "sigma_%.1f", sigma);
      fs::path sweep_root = dir / "sweep" / label;
      simulate_to_directory(sim, sweep_root, o.jobs);

      DatasetConfig scfg = dataset_config(sim);
      scfg.test_indices = {5, 10};
      DatasetIndex sindex = load_dataset_index(sweep_root, scfg);
      DatasetSplit ssplit = split_train_test(sindex, scfg.test_indices);
      BaselineOptions sopts;
      sopts.vote_window = o.window;
      BaselineLadder sl = evaluate_baseline(ssplit.train, ssplit.test, sopts);
      sweep << "single_plant_mean," << format_fixed(sigma, 1) << ','
            << format_fixed(sl.single_plant_mean, 4) << "\n"
            << "single_plant_minus_contour," << format_fixed(sigma, 1) << ','
            << format_fixed(sl.single_plant_minus_contour, 4) << "\n"
            << "vote_plant_mean," << format_fixed(sigma, 1) << ','
            << format_fixed(sl.vote_plant_mean, 4) << "\n";
      std::cout << label << ": single "
                << format_fixed(sl.single_plant_mean, 4) << ", vote "
                << format_fixed(sl.vote_plant_mean, 4) << "\n";
    }
  }

  render_reports(dir);
}

// --- report -----------------------------------------------------------------

struct ReportCmd {
  std::string in;
};

void run_report(const ReportCmd& o) {
  fs::path dir = out_path(o.in);
  if (!fs::is_directory(dir))
    throw std::runtime_error(dir.string() + " is not a directory");
  if (render_reports(dir) == 0)
    throw std::runtime_error("no report CSVs found under " + dir.string());
}

// --- wiring -----------------------------------------------------------------

void add_dataset_flags(CLI::App* sub, std::string& data, int& plants,
                       int& days, std::vector<int>& test) {
  sub->add_option("--data", data, "Dataset root directory")
      ->required();
  sub->add_option("--plants", plants, "Plants per treatment")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--days", days, "Days in the experiment")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--test", test, "Held-out plant indices (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
}

// Config files are read by the top-level app (CLI11 only processes the root
// config option), so subcommands let the flag fall through to it.
void configure(CLI::App* sub) { sub->fallthrough(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Drought-stress classification from RGB and thermal plant imagery.\n"
      "Relative output paths land under $RGBT_OUT_ROOT when it is set."};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read options from an INI file holding a [subcommand] "
                 "section, e.g. [simulate]");
  app.allow_config_extras(false);

  SimulateCmd sim;
  auto* s = app.add_subcommand("simulate",
                               "Generate a synthetic greenhouse dataset");
  configure(s);
  s->add_option("--out", sim.out, "Dataset output directory")
      ->capture_default_str();
  s->add_option("--seed", sim.seed, "Generator seed")->capture_default_str();
  s->add_option("--plants", sim.plants, "Plants per treatment")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--days", sim.days, "Days in the experiment")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--width", sim.width, "Canvas width")->capture_default_str();
  s->add_option("--height", sim.height, "Canvas height")
      ->capture_default_str();
  s->add_option("--noise", sim.noise,
                "Sets both noise sigmas (Celsius) in one go");
  s->add_option("--sensor-noise", sim.sensor_noise,
                "Per-pixel sensor noise sigma (default 1.5)");
  s->add_option("--leaf-noise", sim.leaf_noise,
                "Per-plant-day leaf temperature sigma (default 0.8)");
  s->add_option("--ambient-low", sim.ambient_low, "Ambient range low end")
      ->capture_default_str();
  s->add_option("--ambient-high", sim.ambient_high, "Ambient range high end")
      ->capture_default_str();
  s->add_option("--offsets", sim.offsets,
                "Treatment temperature offsets A,B,C,D (Celsius)")
      ->delimiter(',');
  s->add_option("--intervals", sim.intervals,
                "Days between new leaves per treatment A,B,C,D")
      ->delimiter(',');
  s->add_option("--growth", sim.growth,
                "Relative mature leaf size per treatment A,B,C,D")
      ->delimiter(',');
  s->add_option("--initial-leaves", sim.initial_leaves,
                "Leaves present on day 1")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--margin", sim.margin, "Annotation margin in pixels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_flag("--anomaly", sim.anomaly,
              "Reproduce the day-13 irrigation fault on treatment D");
  s->add_flag("--thermal-only", sim.thermal_only, "Skip RGB rasters");
  s->add_option("--jobs", sim.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->callback([&] { run_simulate(sim); });

  IngestCmd ing;
  auto* g = app.add_subcommand("ingest",
                               "Catalog a dataset tree and report problems");
  configure(g);
  add_dataset_flags(g, ing.data, ing.plants, ing.days, ing.test);
  g->add_option("--dump-masks", ing.dump_masks,
                "Write mask/interior/band rasters for every annotation");
  g->callback([&] { run_ingest(ing); });

  TrainCmd tr;
  auto* t = app.add_subcommand("train", "Train one classifier");
  configure(t);
  add_dataset_flags(t, tr.data, tr.plants, tr.days, tr.test);
  t->add_option("--model", tr.model,
                "single-rgb, single-thermal, triplet-rgb or triplet-thermal")
      ->capture_default_str();
  t->add_option("--out", tr.out, "Checkpoint/loss output directory")
      ->capture_default_str();
  t->add_option("--scale", tr.scale, "Input scale: native or quarter")
      ->capture_default_str();
  t->add_option("--seed", tr.seed, "Training seed")->capture_default_str();
  t->add_option("--epochs", tr.flags.epochs,
                "Epochs (default: 100 rgb, 400 thermal)")
      ->check(CLI::PositiveNumber);
  t->add_option("--batch", tr.flags.batch,
                "Batch size (default: 24 rgb, 32 thermal)")
      ->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.flags.lr,
                "Learning rate (default: 1e-3 adam, 1e-2 sgd)")
      ->check(CLI::PositiveNumber);
  t->add_option("--optimizer", tr.flags.optimizer,
                "adam or sgd (default: adam rgb, sgd thermal)");
  t->add_flag("--augment,!--no-augment", tr.augment,
              "Geometric augmentation (default on)");
  t->add_option("--jobs", tr.jobs, "Worker threads for input building")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  t->callback([&] { run_train(tr); });

  EvaluateCmd ev;
  auto* e = app.add_subcommand(
      "evaluate", "Train all four models and score every fusion combo");
  configure(e);
  add_dataset_flags(e, ev.data, ev.plants, ev.days, ev.test);
  e->add_option("--out", ev.out, "Report output directory")
      ->capture_default_str();
  e->add_option("--scale", ev.scale, "Input scale: native or quarter")
      ->capture_default_str();
  e->add_option("--ratio", ev.ratio,
                "Label duplication: auto or <thermal>:<rgb> copies")
      ->capture_default_str();
  e->add_option("--inference", ev.inference,
                "Label sampling: stochastic (dropout live) or deterministic")
      ->capture_default_str();
  e->add_option("--holdout", ev.holdout,
                "Validation plants per treatment for auto ratios")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  e->add_option("--seed", ev.seed, "Run seed")->capture_default_str();
  e->add_option("--rgb-epochs", ev.rgb_flags.epochs, "RGB epochs (default 100)")
      ->check(CLI::PositiveNumber);
  e->add_option("--thermal-epochs", ev.thermal_flags.epochs,
                "Thermal epochs (default 400)")
      ->check(CLI::PositiveNumber);
  e->add_option("--rgb-batch", ev.rgb_flags.batch, "RGB batch (default 24)")
      ->check(CLI::PositiveNumber);
  e->add_option("--thermal-batch", ev.thermal_flags.batch,
                "Thermal batch (default 32)")
      ->check(CLI::PositiveNumber);
  e->add_option("--rgb-lr", ev.rgb_flags.lr, "RGB learning rate (default 1e-3)")
      ->check(CLI::PositiveNumber);
  e->add_option("--thermal-lr", ev.thermal_flags.lr,
                "Thermal learning rate (default 1e-2)")
      ->check(CLI::PositiveNumber);
  e->add_option("--rgb-optimizer", ev.rgb_flags.optimizer,
                "RGB optimizer (default adam)");
  e->add_option("--thermal-optimizer", ev.thermal_flags.optimizer,
                "Thermal optimizer (default sgd)");
  e->add_flag("--augment,!--no-augment", ev.augment,
              "Geometric augmentation (default on)");
  e->add_option("--jobs", ev.jobs, "Worker threads for input building")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  e->add_option("--save-models", ev.save_models,
                "Directory to save trained checkpoints");
  e->add_option("--load-models", ev.load_models,
                "Directory with checkpoints to reuse instead of training");
  e->callback([&] { run_evaluate(ev); });

  BaselineCmd ba;
  auto* b = app.add_subcommand(
      "baseline", "Nearest-centroid temperature baseline and ladder");
  configure(b);
  add_dataset_flags(b, ba.data, ba.plants, ba.days, ba.test);
  b->add_option("--out", ba.out, "Report output directory")
      ->capture_default_str();
  b->add_option("--radius", ba.radius, "Erosion radius in pixels")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  b->add_option("--window", ba.window, "Voting window in days")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  b->add_flag("--exclude-final-day", ba.exclude_final_day,
              "Drop the last day (plants back on normal irrigation)");
  b->add_option("--ambient-csv", ba.ambient_csv,
                "ambient.csv for ambient-corrected features");
  b->add_flag("--noise-sweep", ba.noise_sweep,
              "Also evaluate self-simulated datasets at several noise levels");
  b->add_option("--seed", ba.seed, "Seed for the noise sweep")
      ->capture_default_str();
  b->add_option("--jobs", ba.jobs, "Worker threads for the sweep simulations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  b->callback([&] { run_baseline(ba); });

  ReportCmd re;
  auto* r = app.add_subcommand("report",
                               "Re-render plots from a results directory");
  configure(r);
  r->add_option("--in", re.in, "Directory holding result CSVs")->required();
  r->callback([&] { run_report(re); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
