#include "exstream/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "exstream/errors.hpp"

namespace exstream {

EvalScope parse_eval_scope(std::string_view name) {
  if (name == "seen") return EvalScope::kSeenClasses;
  if (name == "all") return EvalScope::kAllClasses;
  throw ConfigError("unknown eval_scope '" + std::string(name) + "' (expected seen or all)");
}

std::string to_string(EvalScope scope) {
  return scope == EvalScope::kSeenClasses ? "seen" : "all";
}

void validate(const RunConfig& config) {
  if (config.eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (config.strategy && is_bounded(*config.strategy) && config.buffer_size < 1) {
    throw ConfigError("buffer_size must be >= 1 for bounded strategies");
  }
  validate(config.mlp);
}

std::string method_name(const RunConfig& config) {
  return config.strategy ? to_string(*config.strategy) : "no_buffer";
}

namespace {

std::vector<int> seen_list(const std::vector<bool>& seen) {
  std::vector<int> out;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (seen[c]) out.push_back(static_cast<int>(c));
  }
  return out;
}

std::vector<bool> mask_of(const std::vector<int>& classes, std::size_t k) {
  std::vector<bool> mask(k, false);
  for (int c : classes) mask[static_cast<std::size_t>(c)] = true;
  return mask;
}

bool is_event(std::uint64_t t, std::size_t n, std::size_t eval_every) {
  return t % eval_every == 0 || t == n;
}

Minibatch single(const LabeledSample& s) {
  Minibatch mb;
  mb.inputs.resize(1, static_cast<Eigen::Index>(s.features.size()));
  for (std::size_t j = 0; j < s.features.size(); ++j) {
    mb.inputs(0, static_cast<Eigen::Index>(j)) = s.features[j];
  }
  mb.labels = {s.class_label};
  return mb;
}

double score(const Evaluation& ev, const std::vector<bool>& seen, EvalScope scope) {
  return scope == EvalScope::kSeenClasses ? ev.accuracy_over(seen) : ev.accuracy();
}

RunResult run_loop(const Dataset& dataset, const RunConfig& config, bool use_buffer) {
  validate(config);
  if (dataset.test.empty()) throw UsageError("run: empty test set");
  const auto start = std::chrono::steady_clock::now();

  const auto order = order_stream(dataset, config.ordering);
  const auto k = static_cast<std::size_t>(dataset.num_classes);
  MLPClassifier model(config.mlp, dataset.dim, dataset.num_classes);
  Rng rehearsal_rng(derive_seed(config.mlp.seed, 2));
  std::optional<BufferManager> manager;
  if (use_buffer) {
    manager.emplace(*config.strategy, config.buffer_size, dataset.num_classes,
                    config.buffer_params, config.buffer_seed);
  }

  RunResult result;
  std::vector<bool> seen(k, false);
  std::vector<bool> tested(k, false);
  for (const auto& s : dataset.test) tested[static_cast<std::size_t>(s.class_label)] = true;
  std::uint64_t presentations = 0;

  for (std::size_t step = 0; step < order.size(); ++step) {
    const auto& sample = dataset.train[order[step]];
    const std::uint64_t t = step + 1;
    seen[static_cast<std::size_t>(sample.class_label)] = true;

    if (manager) {
      manager->insert(sample, t);
      presentations += rehearsal_update(model, *manager, rehearsal_rng, &result.gradient_steps);
    } else {
      model.train_minibatch(single(sample));
      ++presentations;
      ++result.gradient_steps;
    }

    if (!is_event(t, order.size(), config.eval_every)) continue;
    std::vector<bool> scored(k, false);
    for (std::size_t c = 0; c < k; ++c) scored[c] = seen[c] && tested[c];
    AccuracyEvent event;
    event.t = t;
    event.seen_classes = seen_list(seen);
    event.presentations = presentations;
    const auto ev = evaluate(model, dataset.test);
    if (config.eval_scope == EvalScope::kSeenClasses &&
        std::none_of(scored.begin(), scored.end(), [](bool b) { return b; })) {
      event.alpha = 0.0;
    } else {
      event.alpha = score(ev, scored, config.eval_scope);
    }
    result.curve.events.push_back(std::move(event));
  }

  result.memory_cost = manager ? manager->memory_cost() : 0.0;
  if (manager && config.capture_buffer) result.final_buffer = manager->contents();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

AccuracyCurve event_schedule(const Dataset& dataset, const RunConfig& config) {
  validate(config);
  const auto order = order_stream(dataset, config.ordering);
  std::vector<bool> seen(static_cast<std::size_t>(dataset.num_classes), false);
  AccuracyCurve schedule;
  for (std::size_t step = 0; step < order.size(); ++step) {
    const std::uint64_t t = step + 1;
    seen[static_cast<std::size_t>(dataset.train[order[step]].class_label)] = true;
    if (is_event(t, order.size(), config.eval_every)) {
      schedule.events.push_back({t, 0.0, seen_list(seen), 0});
    }
  }
  return schedule;
}

std::size_t rehearsal_update(MLPClassifier& model, const BufferManager& manager, Rng& rng,
                             std::uint64_t* gradient_steps) {
  auto contents = manager.contents();
  if (contents.empty()) return 0;
  std::shuffle(contents.begin(), contents.end(), rng);

  const std::size_t batch = std::min(model.config().batch_size, contents.size());
  const auto dim = static_cast<Eigen::Index>(contents.front().features.size());
  for (std::size_t start = 0; start < contents.size(); start += batch) {
    const std::size_t m = std::min(batch, contents.size() - start);
    Minibatch mb;
    mb.inputs.resize(static_cast<Eigen::Index>(m), dim);
    mb.labels.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& item = contents[start + i];
      for (Eigen::Index j = 0; j < dim; ++j) {
        mb.inputs(static_cast<Eigen::Index>(i), j) = item.features[static_cast<std::size_t>(j)];
      }
      mb.labels[i] = item.class_label;
    }
    model.train_minibatch(mb);
    if (gradient_steps != nullptr) ++*gradient_steps;
  }
  return contents.size();
}

RunResult run_streaming(const Dataset& dataset, const RunConfig& config) {
  return run_loop(dataset, config, config.strategy.has_value());
}

RunResult run_no_buffer(const Dataset& dataset, const RunConfig& config) {
  return run_loop(dataset, config, false);
}

OfflineBaseline train_offline_baseline(const Dataset& dataset, const MLPConfig& mlp,
                                       std::size_t epochs) {
  MLPClassifier model(mlp, dataset.dim, dataset.num_classes);
  const auto fit = fit_offline(model, dataset, epochs);
  OfflineBaseline baseline;
  baseline.dataset = dataset.name;
  baseline.seed = mlp.seed;
  baseline.epochs = epochs;
  baseline.accuracy = fit.accuracy;
  baseline.evaluation = fit.evaluation;
  return baseline;
}

AccuracyCurve offline_curve(const OfflineBaseline& baseline, const AccuracyCurve& schedule,
                            EvalScope scope) {
  const std::size_t k = baseline.evaluation.total.size();
  AccuracyCurve curve;
  curve.events.reserve(schedule.size());
  for (const auto& e : schedule.events) {
    AccuracyEvent out{e.t, 0.0, e.seen_classes, 0};
    if (!baseline.external_curve.empty()) {
      const auto it = baseline.external_curve.find(e.t);
      if (it == baseline.external_curve.end()) {
        throw AlignmentError("offline curve has no event at t=" + std::to_string(e.t));
      }
      out.alpha = it->second;
    } else if (scope == EvalScope::kAllClasses) {
      out.alpha = baseline.evaluation.accuracy();
    } else {
      auto mask = mask_of(e.seen_classes, k);
      for (std::size_t c = 0; c < k; ++c) mask[c] = mask[c] && baseline.evaluation.total[c] > 0;
      out.alpha = std::any_of(mask.begin(), mask.end(), [](bool b) { return b; })
                      ? baseline.evaluation.accuracy_over(mask)
                      : 0.0;
    }
    curve.events.push_back(std::move(out));
  }
  return curve;
}

OfflineRun run_offline_baseline(const Dataset& dataset, const RunConfig& config,
                                std::size_t epochs) {
  OfflineRun run;
  run.baseline = train_offline_baseline(dataset, config.mlp, epochs);
  run.curve = offline_curve(run.baseline, event_schedule(dataset, config), config.eval_scope);
  return run;
}

}  // namespace exstream
