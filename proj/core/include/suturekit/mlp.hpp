// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace suturekit {

/// Per-dimension z-score standardization.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static Scaler identity(int dim);
  /// Columns are samples. A dimension with std <= 1e-12 gets std = 1.
  static Scaler fit(const Eigen::MatrixXd& data);

  Eigen::MatrixXd scale(const Eigen::MatrixXd& data) const;
  Eigen::MatrixXd unscale(const Eigen::MatrixXd& data) const;
  int dim() const { return static_cast<int>(mean.size()); }
};

struct DenseLayer {
  Eigen::MatrixXd weights;  ///< out x in
  Eigen::VectorXd bias;
};

/// Fully connected network: rectifier on hidden layers, affine output, with
/// input and output scalers applied outside the layers.
class MlpModel {
 public:
  MlpModel() = default;
  /// He-normal weights, zero biases, identity scalers. Throws
  /// kInvalidArgument for fewer than two sizes or a non-positive size.
  MlpModel(const std::vector<int>& sizes, std::uint64_t seed);

  const std::vector<int>& sizes() const { return sizes_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  Scaler& inputScaler() { return input_scaler_; }
  Scaler& outputScaler() { return output_scaler_; }
  const Scaler& inputScaler() const { return input_scaler_; }
  const Scaler& outputScaler() const { return output_scaler_; }

  /// Columns are samples, raw units in and out.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  /// Network output in scaled space for scaled inputs.
  Eigen::MatrixXd forwardScaled(const Eigen::MatrixXd& scaled_inputs) const;

  /// Weights row-major per layer followed by that layer's bias.
  Eigen::VectorXd parameters() const;
  void setParameters(const Eigen::VectorXd& params);
  int parameterCount() const;

  /// Mean over samples and outputs of the squared error in scaled space, and
  /// its gradient in parameters() order.
  double lossAndGradient(const Eigen::MatrixXd& scaled_inputs, const Eigen::MatrixXd& scaled_targets,
                         Eigen::VectorXd* gradient) const;

  nlohmann::json toJson() const;
  /// Throws kInvalidArgument on malformed or inconsistent content.
  static MlpModel fromJson(const nlohmann::json& j);

 private:
  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
  Scaler input_scaler_;
  Scaler output_scaler_;
};

struct TrainConfig {
  std::vector<int> hidden{400, 300, 200};
  int epochs = 200;
  int batch_size = 256;
  double learning_rate = 3e-3;
  /// Learning rate at the last epoch relative to the first (cosine schedule).
  double final_lr_ratio = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.1;
};

struct TrainResult {
  MlpModel model;
  std::vector<double> train_loss;       ///< mean batch loss per epoch
  std::vector<double> validation_loss;  ///< per epoch, empty without a split
};

/// Columns of `inputs`/`targets` are samples. The last validation_fraction
/// of the columns is held out; scalers are fit on the rest. Shuffling and
/// initialization derive from `seed`. Throws kNonFiniteLoss or
/// kInvalidArgument (fewer training samples than the batch size).
TrainResult trainMlp(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                     const TrainConfig& config, std::uint64_t seed);

}  // namespace suturekit
