#pragma once

#include <filesystem>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "rgbt/augment.hpp"
#include "rgbt/common.hpp"
#include "rgbt/tensor.hpp"

namespace rgbt {

// How a forward pass treats dropout and caching:
//   Train            dropout active, activations cached for backward
//   TrainDeterministic  caches, dropout as identity (gradient checking)
//   Infer            dropout as identity, no caches
//   InferStochastic  dropout active at inference, no caches
enum class Pass { Train, TrainDeterministic, Infer, InferStochastic };

struct LayerConfig {
  enum class Kind { Conv2D, ReLU, MaxPool2D, Flatten, Dense, Dropout, Softmax };
  Kind kind = Kind::ReLU;
  int units = 0;         // Dense output width
  int out_channels = 0;  // Conv2D output maps
  double rate = 0.0;     // Dropout

  static LayerConfig conv2d(int out_channels);
  static LayerConfig relu();
  static LayerConfig maxpool2();
  static LayerConfig flatten();
  static LayerConfig dense(int units);
  static LayerConfig dropout(double rate);
  static LayerConfig softmax();
};

// Architecture description. The convolution kernel is fixed at 3x3, stride 1,
// same padding; pooling is 2x2, stride 2.
struct NetworkSpec {
  std::string name;
  int input_h = 0;
  int input_w = 0;
  int input_c = 0;
  std::vector<LayerConfig> layers;

  // walks the layer list, rejecting unsupported combinations, and returns
  // the class count (width of the final softmax)
  int validate() const;
  int classes() const { return validate(); }
  std::string describe() const;
  uint64_t hash() const;
};

// Both classifier families share one topology and differ in where the wide
// convolution sits: channel counts rise for the RGB net and fall for the
// thermal net.
NetworkSpec rgb_network_spec(int input_h, int input_w, int input_c = 3,
                             int conv1 = 32, int conv2 = 64, int hidden = 64,
                             double dropout_rate = 0.5, int classes = 4);
NetworkSpec thermal_network_spec(int input_h, int input_w, int input_c = 1,
                                 int conv1 = 64, int conv2 = 32,
                                 int hidden = 64, double dropout_rate = 0.5,
                                 int classes = 4);

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& in, Pass pass, Rng* rng) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Tensor*> parameters() { return {}; }
  virtual std::vector<Tensor*> gradients() { return {}; }
  virtual std::string describe() const = 0;
};

std::unique_ptr<Layer> make_layer(const LayerConfig& cfg, int in_channels);

class Network {
 public:
  explicit Network(const NetworkSpec& spec);

  const NetworkSpec& spec() const { return spec_; }
  int classes() const { return classes_; }

  void init_weights(Rng& rng);

  // batch is [N, H, W, C]; returns class probabilities [N, classes]
  Tensor forward(const Tensor& batch, Pass pass, Rng* rng = nullptr);

  struct LossResult {
    double loss = 0.0;
    Tensor probs;
  };

  // Mean cross-entropy over the batch. Accumulates parameter gradients
  // (call zero_gradients() first). Throws if any activation goes NaN/Inf,
  // naming the offending layer.
  LossResult loss_and_gradients(const Tensor& batch,
                                const std::vector<int>& labels, Rng* rng,
                                bool deterministic_dropout = false);

  std::vector<Tensor*> parameters();
  std::vector<Tensor*> gradients();
  void zero_gradients();
  int64_t parameter_count();

  int layer_count() const { return static_cast<int>(layers_.size()); }
  Layer& layer(int i) { return *layers_[i]; }

 private:
  NetworkSpec spec_;
  int classes_ = 0;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// --- optimizers -------------------------------------------------------------

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(const std::vector<Tensor*>& params,
                    const std::vector<Tensor*>& grads) = 0;
  virtual std::string describe() const = 0;
};

std::unique_ptr<Optimizer> make_optimizer(const std::string& name, double lr);

// --- training ---------------------------------------------------------------

struct TrainConfig {
  int epochs = 0;  // must be >= 1
  int batch_size = 24;
  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  bool augment = false;
  AugmentPolicy policy = AugmentPolicy::none();
  uint64_t seed = 1;
  std::filesystem::path loss_csv;  // per-epoch loss log, empty to skip
  std::ostream* log = nullptr;     // progress lines, optional
};

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Seeded end to end: the same seed, data and config reproduce the final
// weights bit for bit.
std::vector<EpochStats> train(Network& net, const std::vector<Tensor>& images,
                              const std::vector<int>& labels,
                              const TrainConfig& cfg);

// --- verification -----------------------------------------------------------

struct GradientCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int64_t checked = 0;
};

// Central finite differences over every parameter, dropout in deterministic
// mode. Refuses networks above 10^4 parameters; this is a correctness probe,
// not a production path. Call it at a generic point: zero biases leave dead
// relu plateaus exactly on the kink, where the central difference averages
// the two one-sided derivatives and no subgradient can match it. The default
// step stays below the typical gap to the nearest relu boundary (tens of
// thousands of pre-activations leave gaps of order 1e-5) yet far above
// rounding noise.
GradientCheckResult gradient_check(Network& net, const Tensor& batch,
                                   const std::vector<int>& labels,
                                   double epsilon = 1e-6);

// --- checkpoints ------------------------------------------------------------

// Versioned binary format: magic, architecture hash, shape table, then all
// parameters as little-endian 32-bit floats.
void save_checkpoint(const std::filesystem::path& path, Network& net);
void load_checkpoint(const std::filesystem::path& path, Network& net);

}  // namespace rgbt
