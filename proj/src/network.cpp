#include "rgbt/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rgbt {

LayerConfig LayerConfig::conv2d(int out_channels) {
  return {Kind::Conv2D, 0, out_channels, 0.0};
}
LayerConfig LayerConfig::relu() { return {Kind::ReLU, 0, 0, 0.0}; }
LayerConfig LayerConfig::maxpool2() { return {Kind::MaxPool2D, 0, 0, 0.0}; }
LayerConfig LayerConfig::flatten() { return {Kind::Flatten, 0, 0, 0.0}; }
LayerConfig LayerConfig::dense(int units) {
  return {Kind::Dense, units, 0, 0.0};
}
LayerConfig LayerConfig::dropout(double rate) {
  return {Kind::Dropout, 0, 0, rate};
}
LayerConfig LayerConfig::softmax() { return {Kind::Softmax, 0, 0, 0.0}; }

int NetworkSpec::validate() const {
  if (input_h < 1 || input_w < 1 || input_c < 1)
    throw std::invalid_argument("network spec: bad input dimensions");
  if (layers.empty())
    throw std::invalid_argument("network spec: no layers");

  int h = input_h, w = input_w, c = input_c;
  bool flat = false;
  int features = 0;
  bool saw_dense = false;
  using Kind = LayerConfig::Kind;
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerConfig& l = layers[i];
    bool last = i + 1 == layers.size();
    if (l.kind == Kind::Softmax && !last)
      throw std::invalid_argument("network spec: softmax must be last");
    switch (l.kind) {
      case Kind::Conv2D:
        if (flat)
          throw std::invalid_argument(
              "network spec: convolution after flatten");
        if (l.out_channels < 1)
          throw std::invalid_argument("network spec: conv needs channels");
        c = l.out_channels;
        break;
      case Kind::MaxPool2D:
        if (flat)
          throw std::invalid_argument("network spec: pooling after flatten");
        if (h < 2 || w < 2)
          throw std::invalid_argument("network spec: pooling below 2x2");
        h /= 2;
        w /= 2;
        break;
      case Kind::ReLU:
        break;
      case Kind::Flatten:
        if (flat)
          throw std::invalid_argument("network spec: repeated flatten");
        flat = true;
        features = h * w * c;
        break;
      case Kind::Dense:
        if (!flat)
          throw std::invalid_argument("network spec: dense before flatten");
        if (l.units < 1)
          throw std::invalid_argument("network spec: dense needs units");
        features = l.units;
        saw_dense = true;
        break;
      case Kind::Dropout:
        if (!flat)
          throw std::invalid_argument("network spec: dropout before flatten");
        if (l.rate < 0.0 || l.rate >= 1.0)
          throw std::invalid_argument("network spec: dropout rate not in [0,1)");
        break;
      case Kind::Softmax:
        if (!flat || !saw_dense)
          throw std::invalid_argument(
              "network spec: softmax needs a dense layer before it");
        break;
    }
  }
  if (layers.back().kind != Kind::Softmax)
    throw std::invalid_argument("network spec: must end with softmax");
  if (features < 2)
    throw std::invalid_argument("network spec: fewer than 2 classes");
  return features;
}

std::string NetworkSpec::describe() const {
  std::string s = name + "|input=" + std::to_string(input_h) + "x" +
                  std::to_string(input_w) + "x" + std::to_string(input_c);
  using Kind = LayerConfig::Kind;
  for (const LayerConfig& l : layers) {
    switch (l.kind) {
      case Kind::Conv2D:
        s += "|conv3x3:" + std::to_string(l.out_channels);
        break;
      case Kind::ReLU:
        s += "|relu";
        break;
      case Kind::MaxPool2D:
        s += "|pool2";
        break;
      case Kind::Flatten:
        s += "|flatten";
        break;
      case Kind::Dense:
        s += "|dense:" + std::to_string(l.units);
        break;
      case Kind::Dropout: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "|dropout:%.4f", l.rate);
        s += buf;
        break;
      }
      case Kind::Softmax:
        s += "|softmax";
        break;
    }
  }
  return s;
}

uint64_t NetworkSpec::hash() const {
  // FNV-1a over the canonical description
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : describe()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

NetworkSpec conv_pair_spec(std::string name, int h, int w, int c_in, int conv1,
                           int conv2, int hidden, double dropout_rate,
                           int classes) {
  NetworkSpec spec;
  spec.name = std::move(name);
  spec.input_h = h;
  spec.input_w = w;
  spec.input_c = c_in;
  spec.layers = {
      LayerConfig::conv2d(conv1),  LayerConfig::relu(),
      LayerConfig::maxpool2(),     LayerConfig::conv2d(conv2),
      LayerConfig::relu(),         LayerConfig::maxpool2(),
      LayerConfig::flatten(),      LayerConfig::dense(hidden),
      LayerConfig::relu(),         LayerConfig::dropout(dropout_rate),
      LayerConfig::dense(classes), LayerConfig::softmax(),
  };
  spec.validate();
  return spec;
}

}  // namespace

NetworkSpec rgb_network_spec(int input_h, int input_w, int input_c, int conv1,
                             int conv2, int hidden, double dropout_rate,
                             int classes) {
  return conv_pair_spec("rgb", input_h, input_w, input_c, conv1, conv2, hidden,
                        dropout_rate, classes);
}

NetworkSpec thermal_network_spec(int input_h, int input_w, int input_c,
                                 int conv1, int conv2, int hidden,
                                 double dropout_rate, int classes) {
  return conv_pair_spec("thermal", input_h, input_w, input_c, conv1, conv2,
                        hidden, dropout_rate, classes);
}

// --- layers -----------------------------------------------------------------

namespace {

void require_rank(const Tensor& t, int rank, const char* who) {
  if (t.rank() != rank)
    throw std::invalid_argument(std::string(who) + ": unexpected tensor rank");
}

bool caching(Pass pass) {
  return pass == Pass::Train || pass == Pass::TrainDeterministic;
}

bool dropout_active(Pass pass) {
  return pass == Pass::Train || pass == Pass::InferStochastic;
}

class Conv2DLayer : public Layer {
 public:
  Conv2DLayer(int in_c, int out_c)
      : in_c_(in_c),
        out_c_(out_c),
        weights_(Tensor::zeros({out_c, 3, 3, in_c})),
        bias_(Tensor::zeros({out_c})),
        grad_weights_(Tensor::zeros({out_c, 3, 3, in_c})),
        grad_bias_(Tensor::zeros({out_c})) {}

  Tensor forward(const Tensor& in, Pass pass, Rng*) override {
    require_rank(in, 4, "conv");
    if (in.dim(3) != in_c_)
      throw std::invalid_argument("conv: channel mismatch");
    int n = in.dim(0), h = in.dim(1), w = in.dim(2);
    if (caching(pass)) input_ = in;
    Tensor out = Tensor::zeros({n, h, w, out_c_});
    int k = 9 * in_c_;
    std::vector<double> col(static_cast<size_t>(h) * w * k);
    const double* wp = weights_.data.data();
    for (int img = 0; img < n; ++img) {
      im2col(in, img, col.data());
      double* op = out.data.data() + static_cast<size_t>(img) * h * w * out_c_;
      for (int i = 0; i < h * w; ++i) {
        const double* crow = col.data() + static_cast<size_t>(i) * k;
        double* orow = op + static_cast<size_t>(i) * out_c_;
        for (int o = 0; o < out_c_; ++o) {
          const double* wrow = wp + static_cast<size_t>(o) * k;
          double acc = bias_(o);
          for (int j = 0; j < k; ++j) acc += crow[j] * wrow[j];
          orow[o] = acc;
        }
      }
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    int n = input_.dim(0), h = input_.dim(1), w = input_.dim(2);
    int k = 9 * in_c_;
    Tensor grad_in = Tensor::zeros(input_.shape);
    std::vector<double> col(static_cast<size_t>(h) * w * k);
    std::vector<double> dcol(k);
    const double* wp = weights_.data.data();
    double* dwp = grad_weights_.data.data();
    for (int img = 0; img < n; ++img) {
      im2col(input_, img, col.data());
      const double* gp =
          grad_out.data.data() + static_cast<size_t>(img) * h * w * out_c_;
      for (int i = 0; i < h * w; ++i) {
        const double* grow = gp + static_cast<size_t>(i) * out_c_;
        const double* crow = col.data() + static_cast<size_t>(i) * k;
        std::fill(dcol.begin(), dcol.end(), 0.0);
        for (int o = 0; o < out_c_; ++o) {
          double g = grow[o];
          if (g == 0.0) continue;
          grad_bias_(o) += g;
          double* dwrow = dwp + static_cast<size_t>(o) * k;
          const double* wrow = wp + static_cast<size_t>(o) * k;
          for (int j = 0; j < k; ++j) {
            dwrow[j] += g * crow[j];
            dcol[j] += g * wrow[j];
          }
        }
        col2im_add(grad_in, img, i / w, i % w, dcol.data());
      }
    }
    return grad_in;
  }

  std::vector<Tensor*> parameters() override { return {&weights_, &bias_}; }
  std::vector<Tensor*> gradients() override {
    return {&grad_weights_, &grad_bias_};
  }
  std::string describe() const override {
    return "conv3x3:" + std::to_string(out_c_);
  }

  Tensor& weights() { return weights_; }
  Tensor& bias() { return bias_; }

 private:
  // gathers the 3x3 neighbourhood (zero padded) for every output pixel
  void im2col(const Tensor& in, int img, double* col) const {
    int h = in.dim(1), w = in.dim(2);
    const double* base =
        in.data.data() + static_cast<size_t>(img) * h * w * in_c_;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double* row =
            col + (static_cast<size_t>(y) * w + x) * 9 * in_c_;
        for (int ky = 0; ky < 3; ++ky) {
          int sy = y + ky - 1;
          for (int kx = 0; kx < 3; ++kx) {
            int sx = x + kx - 1;
            double* dst = row + static_cast<size_t>(ky * 3 + kx) * in_c_;
            if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
              std::fill(dst, dst + in_c_, 0.0);
            } else {
              const double* src =
                  base + (static_cast<size_t>(sy) * w + sx) * in_c_;
              std::copy(src, src + in_c_, dst);
            }
          }
        }
      }
    }
  }

  void col2im_add(Tensor& grad_in, int img, int y, int x,
                  const double* dcol) const {
    int h = grad_in.dim(1), w = grad_in.dim(2);
    double* base =
        grad_in.data.data() + static_cast<size_t>(img) * h * w * in_c_;
    for (int ky = 0; ky < 3; ++ky) {
      int sy = y + ky - 1;
      if (sy < 0 || sy >= h) continue;
      for (int kx = 0; kx < 3; ++kx) {
        int sx = x + kx - 1;
        if (sx < 0 || sx >= w) continue;
        double* dst = base + (static_cast<size_t>(sy) * w + sx) * in_c_;
        const double* src = dcol + static_cast<size_t>(ky * 3 + kx) * in_c_;
        for (int c = 0; c < in_c_; ++c) dst[c] += src[c];
      }
    }
  }

  int in_c_, out_c_;
  Tensor weights_, bias_, grad_weights_, grad_bias_;
  Tensor input_;
};

class ReluLayer : public Layer {
 public:
  Tensor forward(const Tensor& in, Pass pass, Rng*) override {
    Tensor out = in;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    if (caching(pass)) output_ = out;
    return out;
  }
  Tensor backward(const Tensor& grad_out) override {
    Tensor grad_in = grad_out;
    for (size_t i = 0; i < grad_in.data.size(); ++i)
      if (output_.data[i] <= 0.0) grad_in.data[i] = 0.0;
    return grad_in;
  }
  std::string describe() const override { return "relu"; }

 private:
  Tensor output_;
};

class MaxPool2Layer : public Layer {
 public:
  Tensor forward(const Tensor& in, Pass pass, Rng*) override {
    require_rank(in, 4, "maxpool");
    int n = in.dim(0), h = in.dim(1), w = in.dim(2), c = in.dim(3);
    int oh = h / 2, ow = w / 2;
    if (oh < 1 || ow < 1)
      throw std::invalid_argument("maxpool: input below 2x2");
    Tensor out = Tensor::zeros({n, oh, ow, c});
    bool cache = caching(pass);
    if (cache) {
      input_shape_ = in.shape;
      argmax_.assign(out.data.size(), 0);
    }
    for (int img = 0; img < n; ++img) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          for (int k = 0; k < c; ++k) {
            double best = -1e300;
            int64_t best_idx = 0;
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                int sy = oy * 2 + dy, sx = ox * 2 + dx;
                int64_t idx =
                    ((static_cast<int64_t>(img) * h + sy) * w + sx) * c + k;
                double v = in.data[idx];
                // strict > keeps the first maximum on ties
                if (v > best) {
                  best = v;
                  best_idx = idx;
                }
              }
            }
            int64_t out_idx =
                ((static_cast<int64_t>(img) * oh + oy) * ow + ox) * c + k;
            out.data[out_idx] = best;
            if (cache) argmax_[out_idx] = best_idx;
          }
        }
      }
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor grad_in = Tensor::zeros(input_shape_);
    for (size_t i = 0; i < grad_out.data.size(); ++i)
      grad_in.data[argmax_[i]] += grad_out.data[i];
    return grad_in;
  }
  std::string describe() const override { return "pool2"; }

 private:
  std::vector<int> input_shape_;
  std::vector<int64_t> argmax_;
};

class FlattenLayer : public Layer {
 public:
  Tensor forward(const Tensor& in, Pass pass, Rng*) override {
    if (in.rank() < 2)
      throw std::invalid_argument("flatten: expected a batch tensor");
    if (caching(pass)) input_shape_ = in.shape;
    Tensor out = in;
    int n = in.dim(0);
    out.shape = {n, static_cast<int>(in.size() / n)};
    return out;
  }
  Tensor backward(const Tensor& grad_out) override {
    Tensor grad_in = grad_out;
    grad_in.shape = input_shape_;
    return grad_in;
  }
  std::string describe() const override { return "flatten"; }

 private:
  std::vector<int> input_shape_;
};

class DenseLayer : public Layer {
 public:
  DenseLayer(int in_f, int out_f)
      : in_f_(in_f),
        out_f_(out_f),
        weights_(Tensor::zeros({out_f, in_f})),
        bias_(Tensor::zeros({out_f})),
        grad_weights_(Tensor::zeros({out_f, in_f})),
        grad_bias_(Tensor::zeros({out_f})) {}

  Tensor forward(const Tensor& in, Pass pass, Rng*) override {
    require_rank(in, 2, "dense");
    if (in.dim(1) != in_f_)
      throw std::invalid_argument("dense: feature width mismatch");
    if (caching(pass)) input_ = in;
    int n = in.dim(0);
    Tensor out = Tensor::zeros({n, out_f_});
    for (int i = 0; i < n; ++i) {
      const double* xrow = in.data.data() + static_cast<size_t>(i) * in_f_;
      double* orow = out.data.data() + static_cast<size_t>(i) * out_f_;
      for (int o = 0; o < out_f_; ++o) {
        const double* wrow =
            weights_.data.data() + static_cast<size_t>(o) * in_f_;
        double acc = bias_(o);
        for (int j = 0; j < in_f_; ++j) acc += wrow[j] * xrow[j];
        orow[o] = acc;
      }
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    int n = input_.dim(0);
    Tensor grad_in = Tensor::zeros(input_.shape);
    for (int i = 0; i < n; ++i) {
      const double* grow =
          grad_out.data.data() + static_cast<size_t>(i) * out_f_;
      const double* xrow = input_.data.data() + static_cast<size_t>(i) * in_f_;
      double* dxrow = grad_in.data.data() + static_cast<size_t>(i) * in_f_;
      for (int o = 0; o < out_f_; ++o) {
        double g = grow[o];
        if (g == 0.0) continue;
        grad_bias_(o) += g;
        double* dwrow =
            grad_weights_.data.data() + static_cast<size_t>(o) * in_f_;
        const double* wrow =
            weights_.data.data() + static_cast<size_t>(o) * in_f_;
        for (int j = 0; j < in_f_; ++j) {
          dwrow[j] += g * xrow[j];
          dxrow[j] += g * wrow[j];
        }
      }
    }
    return grad_in;
  }

  std::vector<Tensor*> parameters() override { return {&weights_, &bias_}; }
  std::vector<Tensor*> gradients() override {
    return {&grad_weights_, &grad_bias_};
  }
  std::string describe() const override {
    return "dense:" + std::to_string(out_f_);
  }

 private:
  int in_f_, out_f_;
  Tensor weights_, bias_, grad_weights_, grad_bias_;
  Tensor input_;
};

class DropoutLayer : public Layer {
 public:
  explicit DropoutLayer(double rate) : rate_(rate) {}

  Tensor forward(const Tensor& in, Pass pass, Rng* rng) override {
    if (!dropout_active(pass) || rate_ == 0.0) {
      if (caching(pass)) mask_.assign(in.data.size(), 1.0);
      return in;
    }
    if (!rng)
      throw std::invalid_argument(
          "dropout: stochastic pass requires a random stream");
    // inverted scaling keeps the expected activation unchanged
    double keep = 1.0 - rate_;
    double scale = 1.0 / keep;
    Tensor out = in;
    mask_.assign(in.data.size(), 0.0);
    for (size_t i = 0; i < out.data.size(); ++i) {
      if (rng->uniform() < keep) {
        mask_[i] = scale;
        out.data[i] *= scale;
      } else {
        out.data[i] = 0.0;
      }
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor grad_in = grad_out;
    for (size_t i = 0; i < grad_in.data.size(); ++i)
      grad_in.data[i] *= mask_[i];
    return grad_in;
  }
  std::string describe() const override {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "dropout:%.4f", rate_);
    return buf;
  }

 private:
  double rate_;
  std::vector<double> mask_;
};

class SoftmaxLayer : public Layer {
 public:
  Tensor forward(const Tensor& in, Pass pass, Rng*) override {
    require_rank(in, 2, "softmax");
    Tensor out = in;
    int n = in.dim(0), f = in.dim(1);
    for (int i = 0; i < n; ++i) {
      double* row = out.data.data() + static_cast<size_t>(i) * f;
      double mx = row[0];
      for (int j = 1; j < f; ++j) mx = std::max(mx, row[j]);
      double sum = 0.0;
      for (int j = 0; j < f; ++j) {
        row[j] = std::exp(row[j] - mx);
        sum += row[j];
      }
      for (int j = 0; j < f; ++j) row[j] /= sum;
    }
    if (caching(pass)) output_ = out;
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    int n = output_.dim(0), f = output_.dim(1);
    Tensor grad_in = Tensor::zeros(output_.shape);
    for (int i = 0; i < n; ++i) {
      const double* p = output_.data.data() + static_cast<size_t>(i) * f;
      const double* g = grad_out.data.data() + static_cast<size_t>(i) * f;
      double dot = 0.0;
      for (int j = 0; j < f; ++j) dot += g[j] * p[j];
      double* d = grad_in.data.data() + static_cast<size_t>(i) * f;
      for (int j = 0; j < f; ++j) d[j] = p[j] * (g[j] - dot);
    }
    return grad_in;
  }
  std::string describe() const override { return "softmax"; }

 private:
  Tensor output_;
};

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerConfig& cfg, int in_channels) {
  using Kind = LayerConfig::Kind;
  switch (cfg.kind) {
    case Kind::Conv2D:
      return std::make_unique<Conv2DLayer>(in_channels, cfg.out_channels);
    case Kind::ReLU:
      return std::make_unique<ReluLayer>();
    case Kind::MaxPool2D:
      return std::make_unique<MaxPool2Layer>();
    case Kind::Flatten:
      return std::make_unique<FlattenLayer>();
    case Kind::Dense:
      return std::make_unique<DenseLayer>(in_channels, cfg.units);
    case Kind::Dropout:
      return std::make_unique<DropoutLayer>(cfg.rate);
    case Kind::Softmax:
      return std::make_unique<SoftmaxLayer>();
  }
  throw std::logic_error("make_layer: unknown layer kind");
}

// --- network ----------------------------------------------------------------

Network::Network(const NetworkSpec& spec) : spec_(spec) {
  classes_ = spec_.validate();
  int h = spec_.input_h, w = spec_.input_w, c = spec_.input_c;
  bool flat = false;
  int features = 0;
  using Kind = LayerConfig::Kind;
  for (const LayerConfig& l : spec_.layers) {
    switch (l.kind) {
      case Kind::Conv2D:
        layers_.push_back(make_layer(l, c));
        c = l.out_channels;
        break;
      case Kind::MaxPool2D:
        layers_.push_back(make_layer(l, c));
        h /= 2;
        w /= 2;
        break;
      case Kind::Flatten:
        layers_.push_back(make_layer(l, c));
        flat = true;
        features = h * w * c;
        break;
      case Kind::Dense:
        layers_.push_back(make_layer(l, features));
        features = l.units;
        break;
      default:
        layers_.push_back(make_layer(l, flat ? features : c));
        break;
    }
  }
}

void Network::init_weights(Rng& rng) {
  for (auto& layer : layers_) {
    auto params = layer->parameters();
    if (params.empty()) continue;
    // params come in (weights, bias) pairs; He scaling on the weights
    Tensor* w = params[0];
    int64_t fan_in = w->size() / w->dim(0);
    double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : w->data) v = rng.normal() * std_dev;
    for (size_t i = 1; i < params.size(); ++i) params[i]->fill(0.0);
  }
}

namespace {

void check_finite(const Tensor& t, int layer_index, const std::string& name) {
  for (double v : t.data) {
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite activation after layer " +
                               std::to_string(layer_index) + " (" + name +
                               ")");
  }
}

}  // namespace

Tensor Network::forward(const Tensor& batch, Pass pass, Rng* rng) {
  if (batch.rank() != 4 || batch.dim(1) != spec_.input_h ||
      batch.dim(2) != spec_.input_w || batch.dim(3) != spec_.input_c)
    throw std::invalid_argument("forward: batch does not match spec input " +
                                std::to_string(spec_.input_h) + "x" +
                                std::to_string(spec_.input_w) + "x" +
                                std::to_string(spec_.input_c));
  Tensor x = batch;
  for (size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x, pass, rng);
    check_finite(x, static_cast<int>(i), layers_[i]->describe());
  }
  return x;
}

Network::LossResult Network::loss_and_gradients(const Tensor& batch,
                                                const std::vector<int>& labels,
                                                Rng* rng,
                                                bool deterministic_dropout) {
  int n = batch.dim(0);
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("loss_and_gradients: label count mismatch");
  for (int y : labels)
    if (y < 0 || y >= classes_)
      throw std::invalid_argument("loss_and_gradients: label out of range");

  Pass pass = deterministic_dropout ? Pass::TrainDeterministic : Pass::Train;
  LossResult result;
  result.probs = forward(batch, pass, rng);

  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    double p = result.probs(i, labels[i]);
    loss -= std::log(std::max(p, 1e-12));
  }
  result.loss = loss / n;

  // fused softmax + cross-entropy gradient, seeded below the softmax layer
  Tensor g = result.probs;
  for (int i = 0; i < n; ++i) {
    double* row = g.data.data() + static_cast<size_t>(i) * classes_;
    row[labels[i]] -= 1.0;
    for (int j = 0; j < classes_; ++j) row[j] /= n;
  }
  for (int i = static_cast<int>(layers_.size()) - 2; i >= 0; --i)
    g = layers_[i]->backward(g);
  return result;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (Tensor* t : l->parameters()) out.push_back(t);
  return out;
}

std::vector<Tensor*> Network::gradients() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (Tensor* t : l->gradients()) out.push_back(t);
  return out;
}

void Network::zero_gradients() {
  for (Tensor* g : gradients()) g->fill(0.0);
}

int64_t Network::parameter_count() {
  int64_t n = 0;
  for (Tensor* p : parameters()) n += p->size();
  return n;
}

// --- optimizers -------------------------------------------------------------

namespace {

class SgdOptimizer : public Optimizer {
 public:
  explicit SgdOptimizer(double lr) : lr_(lr) {}
  void step(const std::vector<Tensor*>& params,
            const std::vector<Tensor*>& grads) override {
    for (size_t t = 0; t < params.size(); ++t)
      for (size_t i = 0; i < params[t]->data.size(); ++i)
        params[t]->data[i] -= lr_ * grads[t]->data[i];
  }
  std::string describe() const override { return "sgd"; }

 private:
  double lr_;
};

class AdamOptimizer : public Optimizer {
 public:
  explicit AdamOptimizer(double lr) : lr_(lr) {}
  void step(const std::vector<Tensor*>& params,
            const std::vector<Tensor*>& grads) override {
    if (m_.empty()) {
      for (Tensor* p : params) {
        m_.push_back(std::vector<double>(p->data.size(), 0.0));
        v_.push_back(std::vector<double>(p->data.size(), 0.0));
      }
    }
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t t = 0; t < params.size(); ++t) {
      double* p = params[t]->data.data();
      const double* g = grads[t]->data.data();
      double* m = m_[t].data();
      double* v = v_[t].data();
      for (size_t i = 0; i < params[t]->data.size(); ++i) {
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }
  std::string describe() const override { return "adam"; }

 private:
  double lr_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(const std::string& name, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("optimizer: learning rate <= 0");
  if (name == "sgd") return std::make_unique<SgdOptimizer>(lr);
  if (name == "adam") return std::make_unique<AdamOptimizer>(lr);
  throw std::invalid_argument("unknown optimizer: " + name);
}

// --- training ---------------------------------------------------------------

std::vector<EpochStats> train(Network& net, const std::vector<Tensor>& images,
                              const std::vector<int>& labels,
                              const TrainConfig& cfg) {
  if (cfg.epochs < 1)
    throw std::invalid_argument("train: epochs must be at least 1");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("train: batch size must be at least 1");
  if (images.empty()) throw std::invalid_argument("train: no images");
  if (images.size() != labels.size())
    throw std::invalid_argument("train: image/label count mismatch");
  std::vector<int> expect = {net.spec().input_h, net.spec().input_w,
                             net.spec().input_c};
  for (const Tensor& img : images)
    if (img.shape != expect)
      throw std::invalid_argument("train: image shape does not match network");
  for (int y : labels)
    if (y < 0 || y >= net.classes())
      throw std::invalid_argument("train: label out of range");

  Rng rng(cfg.seed);
  auto optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate);
  auto params = net.parameters();
  auto grads = net.gradients();

  std::vector<size_t> order(images.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<EpochStats> history;
  history.reserve(cfg.epochs);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates with the pinned stream, not std::shuffle, so the
    // permutation is identical on every standard library
    for (size_t i = order.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    int64_t correct = 0;
    size_t cursor = 0;
    while (cursor < order.size()) {
      size_t take = std::min<size_t>(cfg.batch_size, order.size() - cursor);
      std::vector<Tensor> jittered;
      std::vector<const Tensor*> views(take);
      std::vector<int> batch_labels(take);
      if (cfg.augment) jittered.reserve(take);
      for (size_t b = 0; b < take; ++b) {
        size_t idx = order[cursor + b];
        if (cfg.augment) {
          jittered.push_back(augment(images[idx], cfg.policy, rng));
          views[b] = &jittered.back();
        } else {
          views[b] = &images[idx];
        }
        batch_labels[b] = labels[idx];
      }
      Tensor batch = stack(views);

      net.zero_gradients();
      Network::LossResult res;
      try {
        res = net.loss_and_gradients(batch, batch_labels, &rng);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error("training failed at epoch " +
                                 std::to_string(epoch) + ": " + e.what());
      }
      optimizer->step(params, grads);

      loss_sum += res.loss * static_cast<double>(take);
      for (size_t b = 0; b < take; ++b) {
        int best = 0;
        for (int j = 1; j < net.classes(); ++j)
          if (res.probs(static_cast<int>(b), j) >
              res.probs(static_cast<int>(b), best))
            best = j;
        if (best == batch_labels[b]) ++correct;
      }
      cursor += take;
    }

    EpochStats stats;
    stats.loss = loss_sum / static_cast<double>(order.size());
    stats.accuracy =
        static_cast<double>(correct) / static_cast<double>(order.size());
    if (!std::isfinite(stats.loss))
      throw std::runtime_error("training diverged at epoch " +
                               std::to_string(epoch));
    history.push_back(stats);
    if (cfg.log)
      (*cfg.log) << "epoch " << epoch << "/" << cfg.epochs
                 << "  loss=" << format_fixed(stats.loss, 6)
                 << "  acc=" << format_fixed(stats.accuracy, 4) << "\n";
  }

  if (!cfg.loss_csv.empty()) {
    std::ofstream out(cfg.loss_csv);
    if (!out)
      throw std::runtime_error("cannot write loss log: " +
                               cfg.loss_csv.string());
    out << "epoch,loss,accuracy\n";
    for (size_t e = 0; e < history.size(); ++e)
      out << (e + 1) << "," << format_fixed(history[e].loss, 6) << ","
          << format_fixed(history[e].accuracy, 6) << "\n";
  }
  return history;
}

// --- verification -----------------------------------------------------------

GradientCheckResult gradient_check(Network& net, const Tensor& batch,
                                   const std::vector<int>& labels,
                                   double epsilon) {
  if (net.parameter_count() > 10000)
    throw std::invalid_argument(
        "gradient_check: network too large for finite differences");
  if (epsilon <= 0.0) throw std::invalid_argument("gradient_check: bad epsilon");

  net.zero_gradients();
  net.loss_and_gradients(batch, labels, nullptr, /*deterministic_dropout=*/true);

  auto params = net.parameters();
  auto grads = net.gradients();

  auto loss_at = [&]() {
    Tensor probs = net.forward(batch, Pass::Infer, nullptr);
    double loss = 0.0;
    for (int i = 0; i < batch.dim(0); ++i)
      loss -= std::log(std::max(probs(i, labels[i]), 1e-12));
    return loss / batch.dim(0);
  };

  GradientCheckResult result;
  for (size_t t = 0; t < params.size(); ++t) {
    for (size_t i = 0; i < params[t]->data.size(); ++i) {
      double saved = params[t]->data[i];
      params[t]->data[i] = saved + epsilon;
      double hi = loss_at();
      params[t]->data[i] = saved - epsilon;
      double lo = loss_at();
      params[t]->data[i] = saved;

      double numeric = (hi - lo) / (2.0 * epsilon);
      double analytic = grads[t]->data[i];
      double abs_err = std::abs(numeric - analytic);
      // the 1e-3 floor compares near-zero components absolutely: central
      // differences on a deep net only resolve gradients down to ~1e-8
      double rel_err =
          abs_err / std::max(1e-3, std::abs(numeric) + std::abs(analytic));
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      result.max_rel_error = std::max(result.max_rel_error, rel_err);
      ++result.checked;
    }
  }
  return result;
}

// --- checkpoints ------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[8] = {'R', 'G', 'B', 'T', 'N', 'E', 'T', '1'};
constexpr uint32_t kCheckpointVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

uint32_t get_u32(const uint8_t* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Network& net) {
  auto params = net.parameters();
  std::vector<uint8_t> buf;
  buf.insert(buf.end(), kCheckpointMagic, kCheckpointMagic + 8);
  put_u32(buf, kCheckpointVersion);
  put_u64(buf, net.spec().hash());
  put_u32(buf, static_cast<uint32_t>(params.size()));
  for (Tensor* p : params) {
    put_u32(buf, static_cast<uint32_t>(p->rank()));
    for (int d : p->shape) put_u32(buf, static_cast<uint32_t>(d));
  }
  for (Tensor* p : params) {
    for (double v : p->data) {
      float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(buf, bits);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write checkpoint: " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("short write: " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, Network& net) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (pos + n > buf.size())
      throw std::runtime_error("truncated checkpoint: " + path.string());
  };

  need(8);
  if (std::memcmp(buf.data(), kCheckpointMagic, 8) != 0)
    throw std::runtime_error("not a weight checkpoint: " + path.string());
  pos += 8;

  need(4);
  uint32_t version = get_u32(buf.data() + pos);
  pos += 4;
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + ": " + path.string());

  need(8);
  uint64_t hash = get_u64(buf.data() + pos);
  pos += 8;
  if (hash != net.spec().hash())
    throw std::runtime_error(
        "checkpoint was written for a different architecture: " +
        path.string());

  auto params = net.parameters();
  need(4);
  uint32_t count = get_u32(buf.data() + pos);
  pos += 4;
  if (count != params.size())
    throw std::runtime_error("checkpoint tensor count mismatch: " +
                             path.string());
  for (Tensor* p : params) {
    need(4);
    uint32_t rank = get_u32(buf.data() + pos);
    pos += 4;
    if (rank != static_cast<uint32_t>(p->rank()))
      throw std::runtime_error("checkpoint shape mismatch: " + path.string());
    for (int d : p->shape) {
      need(4);
      if (get_u32(buf.data() + pos) != static_cast<uint32_t>(d))
        throw std::runtime_error("checkpoint shape mismatch: " + path.string());
      pos += 4;
    }
  }
  for (Tensor* p : params) {
    for (double& v : p->data) {
      need(4);
      uint32_t bits = get_u32(buf.data() + pos);
      pos += 4;
      float f;
      std::memcpy(&f, &bits, 4);
      v = f;
    }
  }
  if (pos != buf.size())
    throw std::runtime_error("trailing bytes in checkpoint: " + path.string());
}

}  // namespace rgbt
