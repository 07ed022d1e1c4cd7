#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "exstream/buffer_manager.hpp"
#include "exstream/mlp.hpp"
#include "exstream/ordering.hpp"
#include "exstream/protocol.hpp"
#include "exstream/synth.hpp"
#include "json.hpp"

namespace exstream {

struct DatasetRef {
  std::string name;  // defaults to the manifest stem
  std::filesystem::path features;
  std::filesystem::path manifest;
  bool normalize = true;
};

// JSON experiment description shared by the baseline and run commands.
//
//   {
//     "dataset": {"name": "icub1", "features": "f.bin", "manifest": "m.csv", "normalize": true},
//     "methods": ["exstream", "full", "no_buffer"],
//     "buffer_sizes": [2, 4, 8],
//     "orderings": ["iid", "class_iid"],
//     "seeds": [0, 1, 2],
//     "eval_every": 1,
//     "eval_scope": "seen",
//     "offline_epochs": 50,
//     "mlp": {"preset": "icub1", "learning_rate": 0.001},
//     "clustream": {"horizon": 1000, "boundary_factor": 2, "init_multiplier": 2},
//     "hpstream": {"decay_rate": 0.5, "spread_radius_factor": 2, "speed": 200, "projected_dims": 1024}
//   }
//
// Every key is optional. Relative paths resolve against the config file's directory.
// Unknown keys are rejected.
struct ExperimentConfig {
  DatasetRef dataset;
  std::vector<std::string> methods;
  std::vector<std::size_t> buffer_sizes;  // empty: chosen from the class count
  std::vector<OrderingKind> orderings;
  std::vector<std::uint64_t> seeds;
  std::size_t eval_every = 1;
  EvalScope eval_scope = EvalScope::kSeenClasses;
  std::size_t offline_epochs = 50;
  MLPConfig mlp;
  BufferParams buffer_params;
};

// Reads a JSON file; syntax errors become ConfigError carrying line and column.
nlohmann::json load_json_file(const std::filesystem::path& path);

ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

SynthSpec parse_synth_spec(const nlohmann::json& doc);
SynthSpec load_synth_spec(const std::filesystem::path& path);

// 2^1..2^8, or 2^1..2^4 for datasets with 100 or more classes.
std::vector<std::size_t> default_buffer_sizes(int num_classes);

// One cell of the sweep's cartesian product.
struct SweepRun {
  std::string run_id;
  std::string method;
  std::size_t buffer_size = 0;  // 0 for the unbounded and no-buffer methods
  OrderingKind ordering = OrderingKind::kIid;
  std::uint64_t seed = 0;
  RunConfig config;
};

// methods x orderings x buffer sizes x seeds, in that nesting order. full and
// no_buffer ignore buffer sizes and appear once per (ordering, seed).
std::vector<SweepRun> expand_sweep(const ExperimentConfig& config, const std::string& dataset_name,
                                   int num_classes);

}  // namespace exstream
