#pragma once

// Fully connected bias-free network with tanh(gain * x) units, manual
// backpropagation and Adam.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace logic_cells {

enum class FinalLayerMode { TanhAsHidden, LinearSoftmax };
enum class LossKind { MSE, CrossEntropy };

std::string to_string(FinalLayerMode mode);
std::string to_string(LossKind loss);
FinalLayerMode parse_final_layer_mode(const std::string& text);
LossKind parse_loss_kind(const std::string& text);

struct NetworkConfig {
  std::vector<int> layer_sizes;  // input first, output last
  double activation_gain = 4.0;
  FinalLayerMode final_layer_mode = FinalLayerMode::TanhAsHidden;
  LossKind loss = LossKind::MSE;

  // Throws ConfigError.
  void validate() const;
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int num_weight_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }

  bool operator==(const NetworkConfig&) const = default;
};

struct Network {
  NetworkConfig config;
  // weights[k] maps layer k to layer k+1: shape (sizes[k+1] x sizes[k]).
  std::vector<Eigen::MatrixXd> weights;

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Network initialized(const NetworkConfig& config, std::uint64_t seed);
  static Network zeros(const NetworkConfig& config);

  // Throws ShapeError / NumericalError when invariants are broken.
  void check() const;
  int num_hidden_layers() const { return config.num_weight_layers() - 1; }
};

// layers[0] is the input, layers[k] the activity of layer k. For
// LinearSoftmax the last entry holds probabilities and `logits` the
// pre-softmax values; otherwise `logits` is empty.
struct Activations {
  std::vector<Eigen::VectorXd> layers;
  Eigen::VectorXd logits;

  const Eigen::VectorXd& output() const { return layers.back(); }
};

// Column-major batch version: each column is one sample.
struct BatchActivations {
  std::vector<Eigen::MatrixXd> layers;
  Eigen::MatrixXd logits;
};

Activations forward(const Network& net, const Eigen::VectorXd& input);
BatchActivations forward_batch(const Network& net, const Eigen::MatrixXd& inputs);

// Activity of one layer for a batch; layer 0 is the input itself.
Eigen::MatrixXd layer_activity(const Network& net, const Eigen::MatrixXd& inputs, int layer);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// Sum of squared coordinate differences.
double loss_mse(const Eigen::VectorXd& output, const Eigen::VectorXd& target);

inline constexpr double kProbabilityFloor = 1e-12;

struct CrossEntropyValue {
  double value = 0.0;
  bool clamped = false;  // p[true_class] was below kProbabilityFloor
};

// -log p[true_class]; probabilities must lie on the simplex (1e-9).
CrossEntropyValue loss_cross_entropy(const Eigen::VectorXd& probabilities, int true_class);

// Loss of one sample under the network's configured loss. For cross-entropy
// `target` is a probability vector (one-hot for hard labels).
double sample_loss(const Network& net, const Activations& acts, const Eigen::VectorXd& target);

using Gradients = std::vector<Eigen::MatrixXd>;

// Gradient of sample_loss with respect to every weight matrix.
Gradients backward(const Network& net, const Activations& acts, const Eigen::VectorXd& target);

// Gradient of the batch-mean loss; also returns that mean loss.
Gradients backward_batch(const Network& net, const BatchActivations& acts,
                         const Eigen::MatrixXd& targets, double* mean_loss = nullptr);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 200;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainState {
  std::vector<Eigen::MatrixXd> first_moment;
  std::vector<Eigen::MatrixXd> second_moment;
  std::int64_t step = 0;

  static TrainState for_network(const Network& net);
};

void adam_step(Network& net, TrainState& state, const Gradients& grads, const TrainConfig& config);

// Inputs and targets stored column-wise; labels are class indices (or -1).
struct Dataset {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  std::vector<int> labels;

  int size() const { return static_cast<int>(inputs.cols()); }
};

struct TrainResult {
  Network net;
  std::vector<double> loss_curve;  // mean loss per epoch
};

// Deterministic given `config.seed`; the network is initialized from that seed.
// Throws NumericalError if the loss becomes non-finite.
TrainResult train(const NetworkConfig& net_config, const Dataset& data, const TrainConfig& config,
                  const std::function<void(int, double)>& on_epoch = {});

// Continues from an existing network.
TrainResult train_from(Network net, const Dataset& data, const TrainConfig& config,
                       const std::function<void(int, double)>& on_epoch = {});

double mean_loss(const Network& net, const Dataset& data);

// Weight dump with stable key order: {config, seed, weights, loss_curve}.
std::string network_to_json(const Network& net, std::uint64_t seed,
                            const std::vector<double>& loss_curve);

struct NetworkDump {
  Network net;
  std::uint64_t seed = 0;
  std::vector<double> loss_curve;
};

NetworkDump network_from_json(const std::string& text);

}  // namespace logic_cells
