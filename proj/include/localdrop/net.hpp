#pragma once

#include <random>
#include <string>
#include <vector>

#include "localdrop/drop.hpp"
#include "localdrop/matrix.hpp"

namespace localdrop::net {

// Batched feature tensor: n examples, each c channels of h x w. Dense
// activations use c = h = 1 and put the units in w. Per-example data is
// contiguous, so a (n,1,1,k) tensor doubles as an n x k matrix.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> a;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        a(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

  std::size_t per_example() const { return static_cast<std::size_t>(c) * h * w; }
  double& at(int b, int ch, int i, int j) {
    return a[((static_cast<std::size_t>(b) * c + ch) * h + i) * w + j];
  }
  double at(int b, int ch, int i, int j) const {
    return a[((static_cast<std::size_t>(b) * c + ch) * h + i) * w + j];
  }
  bool empty() const { return a.empty(); }
};

linalg::Matrix as_matrix(const Tensor& t);  // n x (c*h*w), shared layout
Tensor from_matrix(const linalg::Matrix& m);  // n x k -> (n,1,1,k)

enum class LayerKind { dense, conv, maxpool, relu, flatten };

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  int in_units = 0, out_units = 0;          // dense
  int in_ch = 0, out_ch = 0, kh = 0, kw = 0;  // conv
  int pool = 0;                              // maxpool window; stride = window
  bool drop_attached = false;  // keep-rate state applies to this layer's input

  static LayerSpec dense(int in, int out, bool drop = false);
  static LayerSpec conv(int in_ch, int out_ch, int kh, int kw, bool drop = false);
  static LayerSpec maxpool(int window);
  static LayerSpec relu();
  static LayerSpec flatten();
};

struct Shape {
  int c = 1, h = 1, w = 1;
  int flat() const { return c * h * w; }
  bool operator==(const Shape&) const = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  int num_classes = 0;
  Shape input;

  // Walks the shapes through every layer; throws std::invalid_argument naming
  // the first offending layer. Returns per-layer output shapes with the input
  // shape at index 0.
  std::vector<Shape> activation_shapes() const;
  void validate() const { activation_shapes(); }
  std::vector<int> weight_layers() const;  // spec indices of dense/conv layers
};

// Weights of one dense or conv layer. Conv keeps the §-style block grid: one
// p x q kernel per (input channel m, output channel r), at blocks[m*out_ch+r].
// Dense is the 1x1 grid holding a single in x out matrix.
struct LayerWeights {
  int in_ch = 1, out_ch = 1;
  std::vector<linalg::Matrix> blocks;

  const linalg::Matrix& block(int m, int r) const { return blocks[static_cast<std::size_t>(m) * out_ch + r]; }
  linalg::Matrix& block(int m, int r) { return blocks[static_cast<std::size_t>(m) * out_ch + r]; }
};

using Weights = std::vector<LayerWeights>;  // one entry per weight layer

// He-style init, N(0, sqrt(2/fan_in)), drawn in layer/block/row-major order.
Weights init_weights(const NetworkSpec& spec, std::mt19937_64& rng);

// Keep-rate state per weight layer, describing that layer's input. Entries
// for layers without drop_attached stay Kind::none.
using KeepStates = std::vector<drop::KeepRateState>;
KeepStates init_keep_states(const NetworkSpec& spec, double theta_init,
                            double dropblock_b);

struct ActivationCache {
  bool expected_mode = false;
  Tensor input;
  std::vector<Tensor> layer_out;   // per spec layer
  std::vector<Tensor> scaled_in;   // per weight layer: input after mask/theta
  std::vector<Tensor> scales;      // per weight layer: the scale tensor used
  std::vector<drop::KeepRateState> sites;       // per weight layer
  std::vector<std::vector<int>> pool_argmax;    // per spec layer (maxpool only)
};

struct Gradients {
  std::vector<LayerWeights> w;                 // per weight layer
  std::vector<std::vector<double>> site_theta;  // per weight layer; dense sites
  std::vector<double> site_d;                   // per weight layer; block sites
};

// Per-example 0/1 mask tensors for every drop-attached weight layer, shaped
// like that layer's input. Non-drop layers get an empty tensor. Sampling
// order is fixed (weight layer, then example), so a given rng state yields
// one well-defined mask set.
std::vector<Tensor> sample_mask_tensors(const NetworkSpec& spec,
                                        const KeepStates& keep, int batch_n,
                                        std::mt19937_64& rng);

// Forward with explicit masks (training mode). masks[wl] must match weight
// layer wl's input shape for drop-attached layers and be empty otherwise.
linalg::Matrix forward_stochastic(const NetworkSpec& spec, const Weights& weights,
                                  const std::vector<Tensor>& masks, const Tensor& x,
                                  ActivationCache& cache);

// Forward with masks replaced by their expectations (mask-scaling). Exact
// only through one masked layer; deeper stacks use it as the standard
// inference approximation.
linalg::Matrix forward_expected(const NetworkSpec& spec, const Weights& weights,
                                const KeepStates& keep, const Tensor& x,
                                ActivationCache& cache);

linalg::Matrix one_hot(const std::vector<int>& labels, int k);

// Batch-averaged softmax cross-entropy with max-subtraction; probabilities
// floored at 1e-300 before the log.
double loss(const linalg::Matrix& logits, const linalg::Matrix& y_onehot);

// Fraction of rows whose argmax differs from the label, in [0,1].
double error_rate(const linalg::Matrix& logits, const std::vector<int>& labels);

// Exact gradients of the batch-averaged loss for the forward pass that built
// `cache`. Keep-rate gradients are filled only for expected-mode caches.
Gradients backward(const NetworkSpec& spec, const Weights& weights,
                   const ActivationCache& cache, const linalg::Matrix& y_onehot);

}  // namespace localdrop::net
