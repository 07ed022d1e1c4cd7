#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exstream/dataset.hpp"
#include "exstream/random.hpp"

namespace exstream {

enum class Activation { kReLU, kELU };

Activation parse_activation(std::string_view name);
std::string to_string(Activation activation);

struct MLPConfig {
  std::vector<std::size_t> layer_sizes;  // hidden widths; empty means a single linear layer
  Activation activation = Activation::kReLU;
  double dropout_keep = 1.0;
  double weight_decay = 0.0;
  double learning_rate = 0.01;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;

  // Offline optima reported for the three ResNet-50 embedding benchmarks.
  static MLPConfig icub1();
  static MLPConfig core50();
  static MLPConfig cub200();
};

// Throws ConfigError on zero widths, keep outside (0, 1], lr < 0, batch 0, wd < 0.
void validate(const MLPConfig& config);

enum class Mode { kTrain, kEval };

struct Minibatch {
  Eigen::MatrixXd inputs;  // m x d
  std::vector<int> labels;
};

// Affine map followed (for hidden layers) by batch norm.
struct LayerParams {
  Eigen::MatrixXd weights;  // fan_in x fan_out
  Eigen::VectorXd bias;
  Eigen::VectorXd bn_scale;  // empty on the output layer
  Eigen::VectorXd bn_shift;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Trainable tensors. Also used to hold gradients with the same layout.
struct Parameters {
  std::vector<LayerParams> layers;

  // Flat views over every tensor, in a fixed order.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

struct RunningStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;

  friend bool operator==(const RunningStats&, const RunningStats&) = default;
};

// Fully connected classifier: [affine -> batch norm -> activation -> dropout]*
// -> affine -> softmax, trained with cross-entropy and SGD plus L2 weight decay.
//
// Batch norm uses batch statistics in train mode when the batch has at least two
// rows and the running statistics otherwise (eval mode, or single-sample
// updates). Running statistics follow an exponential average with momentum 0.9.
class MLPClassifier {
 public:
  MLPClassifier(const MLPConfig& config, std::size_t input_dim, int num_classes);

  // Class probabilities, one row per input row. Train mode draws dropout masks
  // but leaves the running statistics untouched.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, Mode mode);

  // One SGD step on the batch; returns the loss before the update.
  double train_minibatch(const Minibatch& batch);

  // Mean cross-entropy and its gradient without changing any state.
  // Requires dropout_keep == 1 or mode == kEval so the result is deterministic.
  double loss_and_gradients(const Minibatch& batch, Mode mode, Parameters& gradients) const;
  double loss(const Minibatch& batch, Mode mode) const;

  // w <- w * (1 - lr * wd) - lr * g for weight matrices; other tensors w <- w - lr * g.
  void apply_gradients(const Parameters& gradients);

  const MLPConfig& config() const { return config_; }
  std::size_t input_dim() const { return input_dim_; }
  int num_classes() const { return num_classes_; }
  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }
  const std::vector<RunningStats>& running_stats() const { return running_; }

  // Exact binary round trip of configuration, parameters, statistics and RNG state.
  void save(const std::filesystem::path& path) const;
  static MLPClassifier load(const std::filesystem::path& path);

  friend bool operator==(const MLPClassifier& a, const MLPClassifier& b);

 private:
  struct LayerCache;
  struct Cache;

  Eigen::MatrixXd run(const Eigen::MatrixXd& inputs, Mode mode, Cache* cache,
                      const std::vector<Eigen::ArrayXXd>* masks) const;
  double backward(const Minibatch& batch, const Cache& cache, const Eigen::MatrixXd& probs,
                  Parameters& gradients) const;
  std::vector<Eigen::ArrayXXd> draw_masks(Eigen::Index rows);

  MLPConfig config_;
  std::size_t input_dim_;
  int num_classes_;
  Parameters params_;
  std::vector<RunningStats> running_;
  Rng rng_;
};

struct Evaluation {
  std::vector<std::size_t> correct;  // per class
  std::vector<std::size_t> total;    // per class

  double accuracy() const;
  // Accuracy restricted to the classes flagged in `classes`.
  double accuracy_over(const std::vector<bool>& classes) const;
};

Eigen::MatrixXd to_matrix(std::span<const LabeledSample> samples);

// Eval-mode predictions; argmax ties go to the lowest class index.
Evaluation evaluate(MLPClassifier& model, std::span<const LabeledSample> samples);

// Fraction of samples predicted correctly. Throws UsageError on an empty set.
double evaluate_accuracy(MLPClassifier& model, std::span<const LabeledSample> samples);

struct OfflineFit {
  Evaluation evaluation;
  double accuracy = 0.0;
  std::vector<double> epoch_losses;
};

// Multi-epoch mini-batch SGD over the whole train split, reshuffled each epoch
// from the model seed; returns test-set accuracy.
OfflineFit fit_offline(MLPClassifier& model, const Dataset& dataset, std::size_t epochs);

}  // namespace exstream
