#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exstream/buffer_manager.hpp"
#include "exstream/dataset.hpp"
#include "exstream/mlp.hpp"
#include "exstream/ordering.hpp"

namespace exstream {

// Which test samples a test event scores.
enum class EvalScope {
  // Only test samples of classes already seen in the stream (the offline
  // reference is scored on the same subset).
  kSeenClasses,
  // The whole test split at every event.
  kAllClasses,
};

EvalScope parse_eval_scope(std::string_view name);
std::string to_string(EvalScope scope);

struct RunConfig {
  // std::nullopt selects the no-buffer baseline (one step on the current sample).
  std::optional<Strategy> strategy = Strategy::kExStream;
  std::size_t buffer_size = 16;
  StreamOrdering ordering;
  MLPConfig mlp;
  BufferParams buffer_params;
  std::uint64_t buffer_seed = 0;
  std::size_t eval_every = 1;
  EvalScope eval_scope = EvalScope::kSeenClasses;
  // Keep the final buffer contents in RunResult (debugging).
  bool capture_buffer = false;
};

// Throws ConfigError when eval_every or a bounded buffer size is zero.
void validate(const RunConfig& config);

// Method label used in logs: a strategy name or "no_buffer".
std::string method_name(const RunConfig& config);

struct AccuracyEvent {
  std::uint64_t t = 0;  // samples seen
  double alpha = 0.0;
  std::vector<int> seen_classes;  // ascending
  std::uint64_t presentations = 0;  // cumulative prototype presentations to the learner

  friend bool operator==(const AccuracyEvent&, const AccuracyEvent&) = default;
};

struct AccuracyCurve {
  std::vector<AccuracyEvent> events;

  std::size_t size() const { return events.size(); }
  friend bool operator==(const AccuracyCurve&, const AccuracyCurve&) = default;
};

struct RunResult {
  AccuracyCurve curve;
  double memory_cost = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t gradient_steps = 0;
  std::vector<LabeledVector> final_buffer;  // only with capture_buffer
};

// Test-event times and seen-class sets of a run, with alpha left at zero.
AccuracyCurve event_schedule(const Dataset& dataset, const RunConfig& config);

// Shuffles the buffer contents and makes one pass of mini-batch SGD over them
// with batch size min(mlp batch size, #prototypes). Returns the number of
// prototypes presented (0 leaves the model untouched).
std::size_t rehearsal_update(MLPClassifier& model, const BufferManager& manager, Rng& rng,
                             std::uint64_t* gradient_steps = nullptr);

// Single pass over the ordered stream: buffer insert, rehearsal update, and a
// test event every `eval_every` samples plus one at the final sample.
RunResult run_streaming(const Dataset& dataset, const RunConfig& config);

// run_streaming with the update replaced by one gradient step on the current sample.
RunResult run_no_buffer(const Dataset& dataset, const RunConfig& config);

struct OfflineBaseline {
  std::string dataset;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  double accuracy = 0.0;
  Evaluation evaluation;
  // Optional externally supplied offline accuracy per event time t (e.g. a
  // model retrained on the first t samples). When non-empty it replaces the
  // fixed model's score and must cover every event time.
  std::map<std::uint64_t, double> external_curve;
};

OfflineBaseline train_offline_baseline(const Dataset& dataset, const MLPConfig& mlp,
                                       std::size_t epochs);

// The fixed offline model scored at each event of `schedule` under `scope`, or
// the external curve looked up by t (AlignmentError on a missing t).
AccuracyCurve offline_curve(const OfflineBaseline& baseline, const AccuracyCurve& schedule,
                            EvalScope scope);

struct OfflineRun {
  OfflineBaseline baseline;
  AccuracyCurve curve;  // aligned with the streaming run of the same config
};

OfflineRun run_offline_baseline(const Dataset& dataset, const RunConfig& config,
                                std::size_t epochs);

}  // namespace exstream
