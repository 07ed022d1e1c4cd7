#include "exstream/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "exstream/errors.hpp"

namespace exstream {

namespace {

constexpr double kBatchNormEps = 1e-5;
constexpr double kRunningMomentum = 0.9;

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kReLU;
  if (name == "elu") return Activation::kELU;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected relu or elu)");
}

std::string to_string(Activation activation) {
  return activation == Activation::kReLU ? "relu" : "elu";
}

MLPConfig MLPConfig::icub1() {
  return {{300, 150, 100}, Activation::kReLU, 0.5, 0.005, 0.0001, 256, 0};
}

MLPConfig MLPConfig::core50() {
  return {{400, 100, 50}, Activation::kReLU, 0.5, 0.0, 0.002, 256, 0};
}

MLPConfig MLPConfig::cub200() {
  return {{350, 300}, Activation::kELU, 0.75, 0.0, 0.002, 100, 0};
}

void validate(const MLPConfig& config) {
  for (std::size_t w : config.layer_sizes) {
    if (w < 1) throw ConfigError("mlp: layer widths must be >= 1");
  }
  if (!(config.dropout_keep > 0.0 && config.dropout_keep <= 1.0)) {
    throw ConfigError("mlp: dropout_keep must lie in (0, 1]");
  }
  if (!(config.learning_rate >= 0.0)) throw ConfigError("mlp: learning_rate must be >= 0");
  if (!(config.weight_decay >= 0.0)) throw ConfigError("mlp: weight_decay must be >= 0");
  if (config.batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
}

std::vector<std::span<double>> Parameters::tensors() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    if (l.bn_scale.size() > 0) {
      out.emplace_back(l.bn_scale.data(), static_cast<std::size_t>(l.bn_scale.size()));
      out.emplace_back(l.bn_shift.data(), static_cast<std::size_t>(l.bn_shift.size()));
    }
  }
  return out;
}

std::vector<std::span<const double>> Parameters::tensors() const {
  std::vector<std::span<const double>> out;
  for (auto s : const_cast<Parameters*>(this)->tensors()) out.emplace_back(s.data(), s.size());
  return out;
}

struct MLPClassifier::LayerCache {
  Eigen::MatrixXd input;
  Eigen::ArrayXXd xhat;
  Eigen::RowVectorXd inv_std;
  Eigen::RowVectorXd batch_mean;
  Eigen::RowVectorXd batch_var;
  bool batch_stats = false;
  Eigen::ArrayXXd normalized;  // after scale/shift, before activation
  Eigen::ArrayXXd mask;        // empty when dropout is off
};

struct MLPClassifier::Cache {
  std::vector<LayerCache> hidden;
  Eigen::MatrixXd last_input;
};

MLPClassifier::MLPClassifier(const MLPConfig& config, std::size_t input_dim, int num_classes)
    : config_(config), input_dim_(input_dim), num_classes_(num_classes), rng_(config.seed) {
  validate(config);
  if (input_dim < 1 || num_classes < 1) throw UsageError("mlp: input_dim and classes must be >= 1");

  std::vector<std::size_t> widths{input_dim};
  widths.insert(widths.end(), config.layer_sizes.begin(), config.layer_sizes.end());
  widths.push_back(static_cast<std::size_t>(num_classes));

  // He-style fan-in scaling.
  Rng init_rng(derive_seed(config.seed, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(widths[l]);
    const auto fan_out = static_cast<Eigen::Index>(widths[l + 1]);
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    LayerParams p;
    p.weights.resize(fan_in, fan_out);
    for (Eigen::Index c = 0; c < fan_out; ++c) {
      for (Eigen::Index r = 0; r < fan_in; ++r) p.weights(r, c) = scale * gauss(init_rng);
    }
    p.bias = Eigen::VectorXd::Zero(fan_out);
    const bool hidden = l + 2 < widths.size();
    if (hidden) {
      p.bn_scale = Eigen::VectorXd::Ones(fan_out);
      p.bn_shift = Eigen::VectorXd::Zero(fan_out);
      running_.push_back({Eigen::VectorXd::Zero(fan_out), Eigen::VectorXd::Ones(fan_out)});
    }
    params_.layers.push_back(std::move(p));
  }
}

std::vector<Eigen::ArrayXXd> MLPClassifier::draw_masks(Eigen::Index rows) {
  std::vector<Eigen::ArrayXXd> masks;
  if (config_.dropout_keep >= 1.0) return masks;
  std::bernoulli_distribution keep(config_.dropout_keep);
  const double scale = 1.0 / config_.dropout_keep;
  for (std::size_t l = 0; l + 1 < params_.layers.size(); ++l) {
    Eigen::ArrayXXd m(rows, params_.layers[l].weights.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = keep(rng_) ? scale : 0.0;
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

Eigen::MatrixXd MLPClassifier::run(const Eigen::MatrixXd& inputs, Mode mode, Cache* cache,
                                   const std::vector<Eigen::ArrayXXd>* masks) const {
  if (static_cast<std::size_t>(inputs.cols()) != input_dim_) {
    throw UsageError("mlp: input width " + std::to_string(inputs.cols()) + " != " +
                     std::to_string(input_dim_));
  }
  if (!inputs.allFinite()) throw NumericError("mlp: non-finite input");
  const Eigen::Index m = inputs.rows();
  const bool batch_stats = mode == Mode::kTrain && m >= 2;
  if (cache != nullptr) cache->hidden.clear();

  Eigen::MatrixXd h = inputs;
  const std::size_t hidden_layers = params_.layers.size() - 1;
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    const auto& p = params_.layers[l];
    LayerCache lc;
    Eigen::MatrixXd z = h * p.weights;
    z.rowwise() += p.bias.transpose();

    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd var;
    if (batch_stats) {
      mean = z.colwise().mean();
      var = (z.rowwise() - mean).array().square().colwise().mean().matrix();
    } else {
      mean = running_[l].mean.transpose();
      var = running_[l].var.transpose();
    }
    const Eigen::RowVectorXd inv_std = (var.array() + kBatchNormEps).rsqrt().matrix();
    Eigen::ArrayXXd xhat = (z.rowwise() - mean).array().rowwise() * inv_std.array();
    Eigen::ArrayXXd y = (xhat.rowwise() * p.bn_scale.transpose().array()).rowwise() +
                        p.bn_shift.transpose().array();

    Eigen::ArrayXXd a;
    if (config_.activation == Activation::kReLU) {
      a = y.max(0.0);
    } else {
      a = (y > 0.0).select(y, y.exp() - 1.0);
    }
    if (masks != nullptr && !masks->empty()) a *= (*masks)[l];
    if (!a.allFinite()) throw NumericError("mlp: non-finite activation at layer " + std::to_string(l));

    if (cache != nullptr) {
      lc.input = std::move(h);
      lc.xhat = std::move(xhat);
      lc.inv_std = inv_std;
      lc.batch_mean = mean;
      lc.batch_var = var;
      lc.batch_stats = batch_stats;
      lc.normalized = std::move(y);
      if (masks != nullptr && !masks->empty()) lc.mask = (*masks)[l];
      cache->hidden.push_back(std::move(lc));
    }
    h = a.matrix();
  }

  const auto& out = params_.layers.back();
  Eigen::MatrixXd logits = h * out.weights;
  logits.rowwise() += out.bias.transpose();
  if (!logits.allFinite()) {
    throw NumericError("mlp: non-finite activation at layer " + std::to_string(hidden_layers));
  }
  if (cache != nullptr) cache->last_input = std::move(h);

  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  Eigen::ArrayXXd e = (logits.colwise() - row_max).array().exp();
  const Eigen::ArrayXd sums = e.rowwise().sum();
  e.colwise() /= sums;
  return e.matrix();
}

Eigen::MatrixXd MLPClassifier::forward(const Eigen::MatrixXd& inputs, Mode mode) {
  if (mode == Mode::kTrain) {
    const auto masks = draw_masks(inputs.rows());
    return run(inputs, mode, nullptr, &masks);
  }
  return run(inputs, mode, nullptr, nullptr);
}

namespace {

void check_batch(const Minibatch& batch, int num_classes) {
  if (batch.inputs.rows() < 1 ||
      static_cast<std::size_t>(batch.inputs.rows()) != batch.labels.size()) {
    throw UsageError("minibatch: need m >= 1 rows with one label each");
  }
  for (int y : batch.labels) {
    if (y < 0 || y >= num_classes) throw UsageError("minibatch: label out of range");
  }
}

double cross_entropy(const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total -= std::log(std::max(probs(static_cast<Eigen::Index>(i), labels[i]), 1e-300));
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace

double MLPClassifier::backward(const Minibatch& batch, const Cache& cache,
                               const Eigen::MatrixXd& probs, Parameters& gradients) const {
  const Eigen::Index m = batch.inputs.rows();
  const double loss = cross_entropy(probs, batch.labels);

  gradients.layers.resize(params_.layers.size());
  Eigen::MatrixXd delta = probs;
  for (Eigen::Index i = 0; i < m; ++i) delta(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
  delta /= static_cast<double>(m);

  auto& g_out = gradients.layers.back();
  const auto& p_out = params_.layers.back();
  g_out.weights = cache.last_input.transpose() * delta;
  g_out.bias = delta.colwise().sum().transpose();
  g_out.bn_scale.resize(0);
  g_out.bn_shift.resize(0);
  Eigen::MatrixXd upstream = delta * p_out.weights.transpose();

  for (std::size_t l = cache.hidden.size(); l-- > 0;) {
    const auto& lc = cache.hidden[l];
    const auto& p = params_.layers[l];
    auto& g = gradients.layers[l];

    Eigen::ArrayXXd da = upstream.array();
    if (lc.mask.size() > 0) da *= lc.mask;
    Eigen::ArrayXXd dy;
    if (config_.activation == Activation::kReLU) {
      dy = (lc.normalized > 0.0).select(da, 0.0);
    } else {
      dy = (lc.normalized > 0.0).select(da, da * lc.normalized.exp());
    }
    g.bn_scale = (dy * lc.xhat).colwise().sum().transpose().matrix();
    g.bn_shift = dy.colwise().sum().transpose().matrix();

    const Eigen::ArrayXXd dxhat = dy.rowwise() * p.bn_scale.transpose().array();
    Eigen::ArrayXXd dz;
    if (lc.batch_stats) {
      const double md = static_cast<double>(m);
      const Eigen::ArrayXXd sum_dxhat = dxhat.colwise().sum();
      const Eigen::ArrayXXd sum_dxhat_xhat = (dxhat * lc.xhat).colwise().sum();
      dz = ((md * dxhat).rowwise() - sum_dxhat.row(0)) -
           (lc.xhat.rowwise() * sum_dxhat_xhat.row(0));
      dz = dz.rowwise() * (lc.inv_std.array() / md);
    } else {
      dz = dxhat.rowwise() * lc.inv_std.array();
    }
    g.weights = lc.input.transpose() * dz.matrix();
    g.bias = dz.colwise().sum().transpose().matrix();
    if (l > 0) upstream = dz.matrix() * p.weights.transpose();
  }
  return loss;
}

double MLPClassifier::loss_and_gradients(const Minibatch& batch, Mode mode,
                                         Parameters& gradients) const {
  check_batch(batch, num_classes_);
  Cache cache;
  const Eigen::MatrixXd probs = run(batch.inputs, mode, &cache, nullptr);
  return backward(batch, cache, probs, gradients);
}

double MLPClassifier::loss(const Minibatch& batch, Mode mode) const {
  check_batch(batch, num_classes_);
  return cross_entropy(run(batch.inputs, mode, nullptr, nullptr), batch.labels);
}

void MLPClassifier::apply_gradients(const Parameters& gradients) {
  const double lr = config_.learning_rate;
  const double shrink = 1.0 - lr * config_.weight_decay;
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    auto& p = params_.layers[l];
    const auto& g = gradients.layers[l];
    p.weights = p.weights * shrink - lr * g.weights;
    p.bias -= lr * g.bias;
    if (p.bn_scale.size() > 0) {
      p.bn_scale -= lr * g.bn_scale;
      p.bn_shift -= lr * g.bn_shift;
    }
  }
}

double MLPClassifier::train_minibatch(const Minibatch& batch) {
  check_batch(batch, num_classes_);
  const auto masks = draw_masks(batch.inputs.rows());
  Cache cache;
  const Eigen::MatrixXd probs = run(batch.inputs, Mode::kTrain, &cache, &masks);
  Parameters gradients;
  const double loss = backward(batch, cache, probs, gradients);
  if (!std::isfinite(loss)) throw NumericError("mlp: non-finite training loss");

  const Eigen::Index m = batch.inputs.rows();
  for (std::size_t l = 0; l < cache.hidden.size(); ++l) {
    const auto& lc = cache.hidden[l];
    if (!lc.batch_stats) continue;
    const double unbiased = static_cast<double>(m) / static_cast<double>(m - 1);
    running_[l].mean = kRunningMomentum * running_[l].mean +
                       (1.0 - kRunningMomentum) * lc.batch_mean.transpose();
    running_[l].var = kRunningMomentum * running_[l].var +
                      (1.0 - kRunningMomentum) * unbiased * lc.batch_var.transpose();
  }
  apply_gradients(gradients);
  return loss;
}

// Checkpoint layout: magic, version, config, shapes, raw tensors, RNG state text.
namespace {

constexpr char kCheckpointMagic[4] = {'M', 'L', 'P', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("checkpoint truncated");
  return v;
}

void write_doubles(std::ostream& out, const double* data, Eigen::Index n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, Eigen::Index n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw FormatError("checkpoint truncated");
}

}  // namespace

void MLPClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic, 4);
  write_pod(out, kCheckpointVersion);
  write_pod<std::uint64_t>(out, config_.layer_sizes.size());
  for (auto w : config_.layer_sizes) write_pod<std::uint64_t>(out, w);
  write_pod<std::int32_t>(out, static_cast<std::int32_t>(config_.activation));
  write_pod(out, config_.dropout_keep);
  write_pod(out, config_.weight_decay);
  write_pod(out, config_.learning_rate);
  write_pod<std::uint64_t>(out, config_.batch_size);
  write_pod<std::uint64_t>(out, config_.seed);
  write_pod<std::uint64_t>(out, input_dim_);
  write_pod<std::int32_t>(out, num_classes_);
  for (auto t : params_.tensors()) write_doubles(out, t.data(), static_cast<Eigen::Index>(t.size()));
  for (const auto& r : running_) {
    write_doubles(out, r.mean.data(), r.mean.size());
    write_doubles(out, r.var.data(), r.var.size());
  }
  std::ostringstream rng_text;
  rng_text << rng_;
  const std::string s = rng_text.str();
  write_pod<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

MLPClassifier MLPClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError(path.string() + ": not a checkpoint");
  }
  if (read_pod<std::uint32_t>(in) != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version");
  }
  MLPConfig config;
  const auto depth = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < depth; ++i) config.layer_sizes.push_back(read_pod<std::uint64_t>(in));
  config.activation = static_cast<Activation>(read_pod<std::int32_t>(in));
  config.dropout_keep = read_pod<double>(in);
  config.weight_decay = read_pod<double>(in);
  config.learning_rate = read_pod<double>(in);
  config.batch_size = read_pod<std::uint64_t>(in);
  config.seed = read_pod<std::uint64_t>(in);
  const auto input_dim = read_pod<std::uint64_t>(in);
  const auto classes = read_pod<std::int32_t>(in);

  MLPClassifier model(config, input_dim, classes);
  for (auto t : model.params_.tensors()) read_doubles(in, t.data(), static_cast<Eigen::Index>(t.size()));
  for (auto& r : model.running_) {
    read_doubles(in, r.mean.data(), r.mean.size());
    read_doubles(in, r.var.data(), r.var.size());
  }
  std::string s(read_pod<std::uint64_t>(in), '\0');
  in.read(s.data(), static_cast<std::streamsize>(s.size()));
  if (!in) throw FormatError("checkpoint truncated");
  std::istringstream rng_text(s);
  rng_text >> model.rng_;
  return model;
}

bool operator==(const MLPClassifier& a, const MLPClassifier& b) {
  return a.input_dim_ == b.input_dim_ && a.num_classes_ == b.num_classes_ &&
         a.config_.layer_sizes == b.config_.layer_sizes && a.params_ == b.params_ &&
         a.running_ == b.running_ && a.rng_ == b.rng_;
}

double Evaluation::accuracy() const {
  return accuracy_over(std::vector<bool>(correct.size(), true));
}

double Evaluation::accuracy_over(const std::vector<bool>& classes) const {
  std::size_t hit = 0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < correct.size(); ++c) {
    if (c < classes.size() && classes[c]) {
      hit += correct[c];
      n += total[c];
    }
  }
  if (n == 0) throw UsageError("accuracy over an empty test subset");
  return static_cast<double>(hit) / static_cast<double>(n);
}

Eigen::MatrixXd to_matrix(std::span<const LabeledSample> samples) {
  const std::size_t dim = samples.empty() ? 0 : samples[0].features.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = samples[i].features[j];
    }
  }
  return m;
}

Evaluation evaluate(MLPClassifier& model, std::span<const LabeledSample> samples) {
  if (samples.empty()) throw UsageError("evaluate: empty test set");
  const auto k = static_cast<std::size_t>(model.num_classes());
  Evaluation ev{std::vector<std::size_t>(k, 0), std::vector<std::size_t>(k, 0)};
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    const auto chunk = samples.subspan(start, std::min(kChunk, samples.size() - start));
    const Eigen::MatrixXd probs = model.forward(to_matrix(chunk), Mode::kEval);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < probs.cols(); ++c) {
        if (probs(row, c) > probs(row, best)) best = c;
      }
      const auto label = static_cast<std::size_t>(chunk[i].class_label);
      ++ev.total[label];
      if (best == chunk[i].class_label) ++ev.correct[label];
    }
  }
  return ev;
}

double evaluate_accuracy(MLPClassifier& model, std::span<const LabeledSample> samples) {
  return evaluate(model, samples).accuracy();
}

OfflineFit fit_offline(MLPClassifier& model, const Dataset& dataset, std::size_t epochs) {
  if (epochs < 1) throw UsageError("fit_offline: epochs must be >= 1");
  if (dataset.train.empty()) throw UsageError("fit_offline: empty train set");
  Rng shuffle_rng(derive_seed(model.config().seed, 1));
  std::vector<std::size_t> order(dataset.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::min(model.config().batch_size, order.size());

  OfflineFit fit;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t m = std::min(batch, order.size() - start);
      Minibatch mb;
      mb.inputs.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(dataset.dim));
      mb.labels.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        const auto& s = dataset.train[order[start + i]];
        for (std::size_t j = 0; j < dataset.dim; ++j) {
          mb.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.features[j];
        }
        mb.labels[i] = s.class_label;
      }
      total += model.train_minibatch(mb);
      ++steps;
    }
    fit.epoch_losses.push_back(total / static_cast<double>(steps));
  }
  fit.evaluation = evaluate(model, dataset.test);
  fit.accuracy = fit.evaluation.accuracy();
  return fit;
}

}  // namespace exstream
