#include "logic_cells/mlp.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "logic_cells/error.hpp"
#include "logic_cells/rng.hpp"

namespace logic_cells {

std::string to_string(FinalLayerMode mode) {
  return mode == FinalLayerMode::TanhAsHidden ? "tanh" : "linear_softmax";
}

std::string to_string(LossKind loss) { return loss == LossKind::MSE ? "mse" : "cross_entropy"; }

FinalLayerMode parse_final_layer_mode(const std::string& text) {
  if (text == "tanh") return FinalLayerMode::TanhAsHidden;
  if (text == "linear_softmax") return FinalLayerMode::LinearSoftmax;
  throw ConfigError("unknown final layer mode '" + text + "'");
}

LossKind parse_loss_kind(const std::string& text) {
  if (text == "mse") return LossKind::MSE;
  if (text == "cross_entropy") return LossKind::CrossEntropy;
  throw ConfigError("unknown loss '" + text + "'");
}

void NetworkConfig::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("network needs at least 2 layers");
  for (int n : layer_sizes) {
    if (n < 1) throw ConfigError("layer sizes must be >= 1");
  }
  if (!(activation_gain > 0.0) || !std::isfinite(activation_gain)) {
    throw ConfigError("activation gain must be positive");
  }
  if (loss == LossKind::CrossEntropy && final_layer_mode != FinalLayerMode::LinearSoftmax) {
    throw ConfigError("cross-entropy loss requires a linear softmax final layer");
  }
}

Network Network::initialized(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Network net{config, {}};
  Rng rng(seed);
  for (int k = 0; k < config.num_weight_layers(); ++k) {
    const int fan_in = config.layer_sizes[k];
    const int fan_out = config.layer_sizes[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    // Row-major fill order keeps the stream layout independent of Eigen storage.
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    net.weights.push_back(std::move(w));
  }
  return net;
}

Network Network::zeros(const NetworkConfig& config) {
  config.validate();
  Network net{config, {}};
  for (int k = 0; k < config.num_weight_layers(); ++k) {
    net.weights.push_back(Eigen::MatrixXd::Zero(config.layer_sizes[k + 1], config.layer_sizes[k]));
  }
  return net;
}

void Network::check() const {
  config.validate();
  if (static_cast<int>(weights.size()) != config.num_weight_layers()) {
    throw ShapeError("weight matrix count does not match layer sizes");
  }
  for (int k = 0; k < config.num_weight_layers(); ++k) {
    if (weights[k].rows() != config.layer_sizes[k + 1] || weights[k].cols() != config.layer_sizes[k]) {
      throw ShapeError("weight matrix " + std::to_string(k) + " has inconsistent shape");
    }
    if (!weights[k].allFinite()) throw NumericalError("weight matrix " + std::to_string(k) + " is not finite");
  }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp();
  return e / e.sum();
}

namespace {

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) out.col(j) = softmax(logits.col(j));
  return out;
}

bool is_linear_layer(const Network& net, int k) {
  return k == net.config.num_weight_layers() - 1 &&
         net.config.final_layer_mode == FinalLayerMode::LinearSoftmax;
}

}  // namespace

Activations forward(const Network& net, const Eigen::VectorXd& input) {
  if (input.size() != net.config.input_size()) {
    throw ShapeError("input has " + std::to_string(input.size()) + " components, expected " +
                     std::to_string(net.config.input_size()));
  }
  const double gain = net.config.activation_gain;
  Activations acts;
  acts.layers.reserve(net.weights.size() + 1);
  acts.layers.push_back(input);
  for (int k = 0; k < net.config.num_weight_layers(); ++k) {
    Eigen::VectorXd z = net.weights[k] * acts.layers.back();
    if (is_linear_layer(net, k)) {
      acts.logits = z;
      acts.layers.push_back(softmax(z));
    } else {
      acts.layers.push_back((gain * z.array()).tanh().matrix());
    }
  }
  return acts;
}

BatchActivations forward_batch(const Network& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.config.input_size()) throw ShapeError("batch input has wrong row count");
  const double gain = net.config.activation_gain;
  BatchActivations acts;
  acts.layers.reserve(net.weights.size() + 1);
  acts.layers.push_back(inputs);
  for (int k = 0; k < net.config.num_weight_layers(); ++k) {
    Eigen::MatrixXd z = net.weights[k] * acts.layers.back();
    if (is_linear_layer(net, k)) {
      acts.layers.push_back(softmax_columns(z));
      acts.logits = std::move(z);
    } else {
      acts.layers.push_back((gain * z.array()).tanh().matrix());
    }
  }
  return acts;
}

Eigen::MatrixXd layer_activity(const Network& net, const Eigen::MatrixXd& inputs, int layer) {
  if (layer < 0 || layer > net.config.num_weight_layers()) throw DomainError("layer out of range");
  if (inputs.rows() != net.config.input_size()) throw ShapeError("batch input has wrong row count");
  const double gain = net.config.activation_gain;
  Eigen::MatrixXd a = inputs;
  for (int k = 0; k < layer; ++k) {
    Eigen::MatrixXd z = net.weights[k] * a;
    a = is_linear_layer(net, k) ? softmax_columns(z) : Eigen::MatrixXd((gain * z.array()).tanh());
  }
  return a;
}

double loss_mse(const Eigen::VectorXd& output, const Eigen::VectorXd& target) {
  if (output.size() != target.size()) throw ShapeError("loss_mse: length mismatch");
  return (output - target).squaredNorm();
}

CrossEntropyValue loss_cross_entropy(const Eigen::VectorXd& probabilities, int true_class) {
  if (true_class < 0 || true_class >= probabilities.size()) throw DomainError("class index out of range");
  if ((probabilities.array() < 0.0).any() || std::abs(probabilities.sum() - 1.0) > 1e-9) {
    throw DomainError("probabilities are not on the simplex");
  }
  const double p = probabilities[true_class];
  if (p < kProbabilityFloor) return {-std::log(kProbabilityFloor), true};
  return {-std::log(p), false};
}

double sample_loss(const Network& net, const Activations& acts, const Eigen::VectorXd& target) {
  const Eigen::VectorXd& out = acts.output();
  if (out.size() != target.size()) throw ShapeError("target length mismatch");
  if (net.config.loss == LossKind::MSE) return loss_mse(out, target);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (target[i] != 0.0) loss -= target[i] * std::log(std::max(out[i], kProbabilityFloor));
  }
  return loss;
}

namespace {

// Gradient with respect to the final pre-activation, one column per sample.
Eigen::MatrixXd output_delta(const Network& net, const Eigen::MatrixXd& out, const Eigen::MatrixXd& targets) {
  const double gain = net.config.activation_gain;
  if (net.config.final_layer_mode == FinalLayerMode::TanhAsHidden) {
    // MSE is the only loss allowed with a tanh output.
    return (2.0 * (out - targets)).cwiseProduct((gain * (1.0 - out.array().square())).matrix());
  }
  if (net.config.loss == LossKind::CrossEntropy) {
    // Targets are probability vectors summing to 1.
    return out - targets;
  }
  // MSE on softmax probabilities: J^T g with J = diag(p) - p p^T.
  const Eigen::MatrixXd g = 2.0 * (out - targets);
  Eigen::MatrixXd delta(out.rows(), out.cols());
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double dot = out.col(j).dot(g.col(j));
    delta.col(j) = out.col(j).cwiseProduct((g.col(j).array() - dot).matrix());
  }
  return delta;
}

Gradients backprop(const Network& net, const std::vector<Eigen::MatrixXd>& layers, Eigen::MatrixXd delta,
                   double scale) {
  const double gain = net.config.activation_gain;
  const int depth = net.config.num_weight_layers();
  Gradients grads(depth);
  for (int k = depth - 1; k >= 0; --k) {
    grads[k] = scale * (delta * layers[k].transpose());
    if (k > 0) {
      const Eigen::MatrixXd& a = layers[k];
      delta = (net.weights[k].transpose() * delta).cwiseProduct((gain * (1.0 - a.array().square())).matrix());
    }
  }
  return grads;
}

}  // namespace

Gradients backward(const Network& net, const Activations& acts, const Eigen::VectorXd& target) {
  if (static_cast<int>(acts.layers.size()) != net.config.num_weight_layers() + 1) {
    throw ShapeError("activations do not match network depth");
  }
  if (target.size() != net.config.output_size()) throw ShapeError("target length mismatch");
  std::vector<Eigen::MatrixXd> layers(acts.layers.begin(), acts.layers.end());
  Eigen::MatrixXd delta = output_delta(net, layers.back(), Eigen::MatrixXd(target));
  return backprop(net, layers, std::move(delta), 1.0);
}

Gradients backward_batch(const Network& net, const BatchActivations& acts, const Eigen::MatrixXd& targets,
                         double* mean_loss) {
  if (static_cast<int>(acts.layers.size()) != net.config.num_weight_layers() + 1) {
    throw ShapeError("activations do not match network depth");
  }
  const Eigen::MatrixXd& out = acts.layers.back();
  if (targets.rows() != out.rows() || targets.cols() != out.cols()) throw ShapeError("target batch mismatch");
  const double n = static_cast<double>(out.cols());
  if (mean_loss != nullptr) {
    if (net.config.loss == LossKind::MSE) {
      *mean_loss = (out - targets).squaredNorm() / n;
    } else {
      double total = 0.0;
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
          if (targets(i, j) != 0.0) total -= targets(i, j) * std::log(std::max(out(i, j), kProbabilityFloor));
        }
      }
      *mean_loss = total / n;
    }
  }
  return backprop(net, acts.layers, output_delta(net, out, targets), 1.0 / n);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
}

TrainState TrainState::for_network(const Network& net) {
  TrainState state;
  for (const auto& w : net.weights) {
    state.first_moment.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    state.second_moment.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  return state;
}

void adam_step(Network& net, TrainState& state, const Gradients& grads, const TrainConfig& config) {
  if (grads.size() != net.weights.size() || state.first_moment.size() != net.weights.size()) {
    throw ShapeError("adam_step: gradient/state count mismatch");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    if (grads[k].rows() != net.weights[k].rows() || grads[k].cols() != net.weights[k].cols()) {
      throw ShapeError("adam_step: gradient shape mismatch");
    }
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    m = config.beta1 * m + (1.0 - config.beta1) * grads[k];
    v = config.beta2 * v + (1.0 - config.beta2) * grads[k].cwiseAbs2();
    const Eigen::ArrayXXd m_hat = m.array() / correction1;
    const Eigen::ArrayXXd v_hat = v.array() / correction2;
    net.weights[k].array() -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
  }
}

TrainResult train(const NetworkConfig& net_config, const Dataset& data, const TrainConfig& config,
                  const std::function<void(int, double)>& on_epoch) {
  return train_from(Network::initialized(net_config, mix_seed(config.seed, 0)), data, config, on_epoch);
}

TrainResult train_from(Network net, const Dataset& data, const TrainConfig& config,
                       const std::function<void(int, double)>& on_epoch) {
  config.validate();
  net.check();
  if (data.size() == 0) throw DomainError("training dataset is empty");
  if (data.inputs.rows() != net.config.input_size() || data.targets.rows() != net.config.output_size() ||
      data.targets.cols() != data.inputs.cols()) {
    throw ShapeError("dataset does not match network shape");
  }
  Rng shuffler(mix_seed(config.seed, 1));
  TrainState state = TrainState::for_network(net);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result{std::move(net), {}};
  Network& model = result.net;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffler.shuffle(std::span<int>(order));
    double epoch_loss = 0.0;
    for (int start = 0; start < data.size(); start += config.batch_size) {
      const int count = std::min(config.batch_size, data.size() - start);
      Eigen::MatrixXd x(data.inputs.rows(), count);
      Eigen::MatrixXd y(data.targets.rows(), count);
      for (int j = 0; j < count; ++j) {
        x.col(j) = data.inputs.col(order[start + j]);
        y.col(j) = data.targets.col(order[start + j]);
      }
      double batch_loss = 0.0;
      const Gradients grads = backward_batch(model, forward_batch(model, x), y, &batch_loss);
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch offset " << start << " (step " << state.step
            << ")";
        throw NumericalError(msg.str());
      }
      epoch_loss += batch_loss * count;
      adam_step(model, state, grads, config);
    }
    epoch_loss /= data.size();
    result.loss_curve.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  for (const auto& w : model.weights) {
    if (!w.allFinite()) throw NumericalError("training produced non-finite weights");
  }
  return result;
}

double mean_loss(const Network& net, const Dataset& data) {
  double loss = 0.0;
  backward_batch(net, forward_batch(net, data.inputs), data.targets, &loss);
  return loss;
}

std::string network_to_json(const Network& net, std::uint64_t seed, const std::vector<double>& loss_curve) {
  nlohmann::ordered_json doc;
  doc["config"]["layer_sizes"] = net.config.layer_sizes;
  doc["config"]["activation_gain"] = net.config.activation_gain;
  doc["config"]["final_layer_mode"] = to_string(net.config.final_layer_mode);
  doc["config"]["loss"] = to_string(net.config.loss);
  doc["seed"] = seed;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& w : net.weights) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::vector<double> row(w.cols());
      for (Eigen::Index c = 0; c < w.cols(); ++c) row[c] = w(r, c);
      rows.push_back(row);
    }
    layers.push_back(std::move(rows));
  }
  doc["weights"] = std::move(layers);
  doc["loss_curve"] = loss_curve;
  return doc.dump(1) + "\n";
}

NetworkDump network_from_json(const std::string& text) {
  NetworkDump dump;
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto& cfg = doc.at("config");
    dump.net.config.layer_sizes = cfg.at("layer_sizes").get<std::vector<int>>();
    dump.net.config.activation_gain = cfg.at("activation_gain").get<double>();
    dump.net.config.final_layer_mode = parse_final_layer_mode(cfg.at("final_layer_mode").get<std::string>());
    dump.net.config.loss = parse_loss_kind(cfg.at("loss").get<std::string>());
    dump.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& layer : doc.at("weights")) {
      const auto rows = layer.get<std::vector<std::vector<double>>>();
      const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
      const Eigen::Index n_cols = n_rows == 0 ? 0 : static_cast<Eigen::Index>(rows.front().size());
      Eigen::MatrixXd w(n_rows, n_cols);
      for (Eigen::Index r = 0; r < n_rows; ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != n_cols) throw ShapeError("ragged weight matrix");
        for (Eigen::Index c = 0; c < n_cols; ++c) w(r, c) = rows[r][c];
      }
      dump.net.weights.push_back(std::move(w));
    }
    dump.loss_curve = doc.value("loss_curve", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed weight dump: ") + e.what());
  }
  dump.net.check();
  return dump;
}

}  // namespace logic_cells
