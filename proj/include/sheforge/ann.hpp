#pragma once

#include "sheforge/harmonics.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sheforge {

struct AngleTable;

/// Fully connected network: tanh hidden layers, linear output layer.
/// weights[l] is row-major (layer_sizes[l+1] x layer_sizes[l]).
struct MlpModel {
  std::vector<int> layer_sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::string activation = "tanh";

  // input: x = (m - input_offset) / input_scale
  double input_offset = 0.0;
  double input_scale = 1.0;
  // output k: angle = output_offset[k] + output_scale[k] * y_k
  std::vector<double> output_offset;
  std::vector<double> output_scale;

  double train_lo = 0.0;
  double train_hi = 0.0;
  std::uint64_t seed = 0;

  int layers() const { return static_cast<int>(weights.size()); }
  int inputs() const { return layer_sizes.front(); }
  int outputs() const { return layer_sizes.back(); }

  friend bool operator==(const MlpModel &, const MlpModel &) = default;
};

struct TrainingSample {
  double m = 0.0;
  std::vector<double> angles; // radians
};

struct TrainingDataset {
  std::vector<TrainingSample> rows;
  int outputs() const { return rows.empty() ? 0 : static_cast<int>(rows.front().angles.size()); }
};

inline constexpr int kDefaultHidden = 16;
inline constexpr int kDefaultEpochs = 12000;
inline constexpr double kDefaultLearningRate = 0.5;

/// Which rows of a sweep become training data. A sweep can break into
/// several continuation branches separated by m ranges where no solution
/// exists; a network fitted across such a gap would report angles inside it.
enum class Branch {
  upper,   // contiguous clean run reaching the highest m (default)
  longest, // contiguous clean run with the most rows
  all,     // every clean row
};
Branch parse_branch(const std::string &text);

// Clean (unflagged) rows of an angle table, restricted to one branch.
TrainingDataset dataset_from_table(const AngleTable &table, Branch branch = Branch::upper);
void validate_dataset(const TrainingDataset &data);

/// Glorot-uniform weights, zero biases; identical for identical seeds.
MlpModel init_mlp(std::span<const int> layer_sizes, std::uint64_t seed);

/// init_mlp plus normalization fitted to the dataset: m and each angle
/// mapped onto [-1, 1] over their ranges in the data.
MlpModel prepare_model(std::span<const int> layer_sizes, const TrainingDataset &data,
                       std::uint64_t seed);

std::vector<double> forward(const MlpModel &model, std::span<const double> input);

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_history; // epochs + 1 entries
};

/// Full-batch gradient descent on the mean squared error of normalized
/// targets, averaged over samples and outputs.
TrainResult train(MlpModel model, const TrainingDataset &data, int epochs, double learning_rate);

// Mean squared error of the model on the dataset in normalized units.
double normalized_mse(const MlpModel &model, const TrainingDataset &data);
// Mean squared angle error in units of pi/2, independent of normalization.
double angle_mse(const MlpModel &model, const TrainingDataset &data);

/// Gradients of the loss on one sample (normalized input and target), in
/// the order weights[0], biases[0], weights[1], ...
std::vector<double> backprop_gradient(const MlpModel &model, std::span<const double> input,
                                      std::span<const double> target);

/// Worst relative error between backprop and central finite differences
/// over every weight and bias, for the loss on one sample.
double gradient_check(const MlpModel &model, std::span<const double> input,
                      std::span<const double> target, double epsilon);

/// Denormalized, sorted, clamped network output at m. Throws
/// ExtrapolationError outside the recorded training range.
SwitchingAngleSet predict_angles(const MlpModel &model, double m);

std::string model_to_json(const MlpModel &model);
MlpModel model_from_json(const std::string &text);

} // namespace sheforge
