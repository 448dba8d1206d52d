// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "suturekit/errors.hpp"
#include "suturekit/random.hpp"

namespace suturekit {

Scaler Scaler::identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Scaler Scaler::fit(const Eigen::MatrixXd& data) {
  if (data.cols() < 1) throw Error(ErrorCode::kInvalidArgument, "cannot fit a scaler to no samples");
  Scaler s;
  s.mean = data.rowwise().mean();
  s.std = ((data.colwise() - s.mean).array().square().rowwise().sum() / static_cast<double>(data.cols()))
              .sqrt();
  for (Eigen::Index i = 0; i < s.std.size(); ++i) {
    if (!(s.std(i) > 1e-12)) s.std(i) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Scaler::scale(const Eigen::MatrixXd& data) const {
  return (data.colwise() - mean).array().colwise() / std.array();
}

Eigen::MatrixXd Scaler::unscale(const Eigen::MatrixXd& data) const {
  return (data.array().colwise() * std.array()).matrix().colwise() + mean;
}

MlpModel::MlpModel(const std::vector<int>& sizes, std::uint64_t seed) : sizes_(sizes) {
  if (sizes.size() < 2) throw Error(ErrorCode::kInvalidArgument, "network needs at least two sizes");
  for (int n : sizes) {
    if (n < 1) throw Error(ErrorCode::kInvalidArgument, "layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    const double stddev = std::sqrt(2.0 / sizes[l]);
    layer.weights.resize(sizes[l + 1], sizes[l]);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = stddev * normal(rng);
    }
    layer.bias = Eigen::VectorXd::Zero(sizes[l + 1]);
    layers_.push_back(std::move(layer));
  }
  input_scaler_ = Scaler::identity(sizes.front());
  output_scaler_ = Scaler::identity(sizes.back());
}

Eigen::MatrixXd MlpModel::forwardScaled(const Eigen::MatrixXd& scaled_inputs) const {
  Eigen::MatrixXd a = scaled_inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weights * a;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& inputs) const {
  return output_scaler_.unscale(forwardScaled(input_scaler_.scale(inputs)));
}

Eigen::VectorXd MlpModel::forward(const Eigen::VectorXd& input) const {
  return forward(Eigen::MatrixXd(input)).col(0);
}

int MlpModel::parameterCount() const {
  int n = 0;
  for (const DenseLayer& layer : layers_) n += static_cast<int>(layer.weights.size() + layer.bias.size());
  return n;
}

Eigen::VectorXd MlpModel::parameters() const {
  Eigen::VectorXd p(parameterCount());
  Eigen::Index k = 0;
  for (const DenseLayer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) p(k++) = layer.weights(r, c);
    }
    p.segment(k, layer.bias.size()) = layer.bias;
    k += layer.bias.size();
  }
  return p;
}

void MlpModel::setParameters(const Eigen::VectorXd& params) {
  if (params.size() != parameterCount()) {
    throw Error(ErrorCode::kInvalidArgument, "parameter vector has the wrong length");
  }
  Eigen::Index k = 0;
  for (DenseLayer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = params(k++);
    }
    layer.bias = params.segment(k, layer.bias.size());
    k += layer.bias.size();
  }
}

namespace {

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
};

// Mean squared error over all entries; fills per-layer gradients.
double backprop(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x,
                const Eigen::MatrixXd& y, Gradients* grads) {
  const std::size_t n_layers = layers.size();
  std::vector<Eigen::MatrixXd> acts;  // acts[l] is the input to layer l
  acts.reserve(n_layers + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = layers[l].weights * acts.back();
    z.colwise() += layers[l].bias;
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  const Eigen::MatrixXd diff = acts.back() - y;
  const double count = static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() / count;
  if (!grads) return loss;

  grads->weights.resize(n_layers);
  grads->bias.resize(n_layers);
  Eigen::MatrixXd delta = (2.0 / count) * diff;
  for (std::size_t l = n_layers; l-- > 0;) {
    grads->weights[l].noalias() = delta * acts[l].transpose();
    grads->bias[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = layers[l].weights.transpose() * delta;
      delta = (acts[l].array() > 0.0).select(back, 0.0);
    }
  }
  return loss;
}

}  // namespace

double MlpModel::lossAndGradient(const Eigen::MatrixXd& scaled_inputs,
                                 const Eigen::MatrixXd& scaled_targets,
                                 Eigen::VectorXd* gradient) const {
  if (!gradient) return backprop(layers_, scaled_inputs, scaled_targets, nullptr);
  Gradients g;
  const double loss = backprop(layers_, scaled_inputs, scaled_targets, &g);
  gradient->resize(parameterCount());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    for (Eigen::Index r = 0; r < g.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < g.weights[l].cols(); ++c) (*gradient)(k++) = g.weights[l](r, c);
    }
    gradient->segment(k, g.bias[l].size()) = g.bias[l];
    k += g.bias[l].size();
  }
  return loss;
}

namespace {

nlohmann::json vectorJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd jsonVector(const nlohmann::json& j, Eigen::Index expected, const char* what) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    throw Error(ErrorCode::kInvalidArgument, std::string("model file: wrong length for ") + what);
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), expected);
}

}  // namespace

nlohmann::json MlpModel::toJson() const {
  nlohmann::json j;
  j["architecture"] = sizes_;
  j["hidden_activation"] = "relu";
  j["input_scaler"] = {{"mean", vectorJson(input_scaler_.mean)}, {"std", vectorJson(input_scaler_.std)}};
  j["output_scaler"] = {{"mean", vectorJson(output_scaler_.mean)},
                        {"std", vectorJson(output_scaler_.std)}};
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& layer : layers_) {
    Eigen::VectorXd w(layer.weights.size());
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) w(k++) = layer.weights(r, c);
    }
    layers.push_back({{"weights", vectorJson(w)}, {"bias", vectorJson(layer.bias)}});
  }
  j["layers"] = std::move(layers);
  return j;
}

MlpModel MlpModel::fromJson(const nlohmann::json& j) {
  try {
    MlpModel m(j.at("architecture").get<std::vector<int>>(), 0);
    const int in = m.sizes_.front(), out = m.sizes_.back();
    m.input_scaler_.mean = jsonVector(j.at("input_scaler").at("mean"), in, "input mean");
    m.input_scaler_.std = jsonVector(j.at("input_scaler").at("std"), in, "input std");
    m.output_scaler_.mean = jsonVector(j.at("output_scaler").at("mean"), out, "output mean");
    m.output_scaler_.std = jsonVector(j.at("output_scaler").at("std"), out, "output std");
    const auto& layers = j.at("layers");
    if (layers.size() != m.layers_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "model file: layer count does not match architecture");
    }
    for (std::size_t l = 0; l < m.layers_.size(); ++l) {
      DenseLayer& layer = m.layers_[l];
      const Eigen::VectorXd w = jsonVector(layers[l].at("weights"), layer.weights.size(), "weights");
      Eigen::Index k = 0;
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = w(k++);
      }
      layer.bias = jsonVector(layers[l].at("bias"), layer.bias.size(), "bias");
    }
    const Eigen::VectorXd p = m.parameters();
    if (!p.allFinite() || !m.input_scaler_.std.allFinite() || !(m.input_scaler_.std.array() > 0).all() ||
        !(m.output_scaler_.std.array() > 0).all()) {
      throw Error(ErrorCode::kInvalidArgument, "model file: non-finite parameters or scalers");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("model file: ") + e.what());
  }
}

TrainResult trainMlp(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                     const TrainConfig& config, std::uint64_t seed) {
  if (inputs.cols() != targets.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "inputs and targets differ in sample count");
  }
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0) ||
      !(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training configuration");
  }
  const Eigen::Index total = inputs.cols();
  const auto n_val = static_cast<Eigen::Index>(std::floor(config.validation_fraction * total));
  const Eigen::Index n_train = total - n_val;
  if (n_train < config.batch_size) {
    throw Error(ErrorCode::kInvalidArgument, "fewer training samples than the batch size");
  }

  std::vector<int> sizes{static_cast<int>(inputs.rows())};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(static_cast<int>(targets.rows()));

  TrainResult result;
  MlpModel& model = result.model;
  model = MlpModel(sizes, deriveSeed(seed, 0));
  model.inputScaler() = Scaler::fit(inputs.leftCols(n_train));
  model.outputScaler() = Scaler::fit(targets.leftCols(n_train));
  const Eigen::MatrixXd x_train = model.inputScaler().scale(inputs.leftCols(n_train));
  const Eigen::MatrixXd y_train = model.outputScaler().scale(targets.leftCols(n_train));
  const Eigen::MatrixXd x_val = model.inputScaler().scale(inputs.rightCols(n_val));
  const Eigen::MatrixXd y_val = model.outputScaler().scale(targets.rightCols(n_val));

  auto& layers = model.layers();
  Gradients m, v;
  for (const DenseLayer& layer : layers) {
    m.weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    m.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  v = m;

  std::mt19937_64 rng(deriveSeed(seed, 1));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::Index batches = n_train / config.batch_size;  // drop the ragged tail
  Eigen::MatrixXd xb(x_train.rows(), config.batch_size), yb(y_train.rows(), config.batch_size);
  Gradients g;
  double b1t = 1.0, b2t = 1.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double progress = config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 0.0;
    const double lr = config.learning_rate *
                      (config.final_lr_ratio + (1.0 - config.final_lr_ratio) * 0.5 *
                                                   (1.0 + std::cos(std::numbers::pi * progress)));
    double epoch_loss = 0.0;
    for (Eigen::Index b = 0; b < batches; ++b) {
      for (Eigen::Index k = 0; k < config.batch_size; ++k) {
        const Eigen::Index idx = order[static_cast<std::size_t>(b * config.batch_size + k)];
        xb.col(k) = x_train.col(idx);
        yb.col(k) = y_train.col(idx);
      }
      const double loss = backprop(layers, xb, yb, &g);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << epoch + 1 << ", batch " << b + 1;
        throw Error(ErrorCode::kNonFiniteLoss, msg.str());
      }
      epoch_loss += loss;
      b1t *= config.beta1;
      b2t *= config.beta2;
      const double step = lr * std::sqrt(1.0 - b2t) / (1.0 - b1t);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        m.weights[l] = config.beta1 * m.weights[l] + (1.0 - config.beta1) * g.weights[l];
        v.weights[l] = config.beta2 * v.weights[l] + (1.0 - config.beta2) * g.weights[l].cwiseAbs2();
        layers[l].weights.array() -=
            step * m.weights[l].array() / (v.weights[l].array().sqrt() + config.epsilon);
        m.bias[l] = config.beta1 * m.bias[l] + (1.0 - config.beta1) * g.bias[l];
        v.bias[l] = config.beta2 * v.bias[l] + (1.0 - config.beta2) * g.bias[l].cwiseAbs2();
        layers[l].bias.array() -= step * m.bias[l].array() / (v.bias[l].array().sqrt() + config.epsilon);
      }
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(batches));
    if (n_val > 0) result.validation_loss.push_back(backprop(layers, x_val, y_val, nullptr));
  }
  return result;
}

}  // namespace suturekit
