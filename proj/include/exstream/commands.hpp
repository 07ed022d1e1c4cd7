#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exstream/dataset.hpp"
#include "exstream/experiment_config.hpp"
#include "exstream/protocol.hpp"
#include "exstream/results_log.hpp"

namespace exstream {

// Flags shared by the subcommands; set flags override config-file values.
struct CommandOptions {
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> baseline;
  std::optional<std::filesystem::path> results;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> eval_every;
  std::optional<std::size_t> epochs;
  std::optional<bool> normalize;
  std::size_t jobs = 1;
  bool dump_buffers = false;
  std::filesystem::path out;
};

// Config file (if any) with flag overrides applied.
ExperimentConfig resolve_config(const CommandOptions& options);
Dataset load_dataset(const DatasetRef& ref);

// Writes <out>/features.bin and <out>/manifest.csv from a synth spec file
// (defaults when no config is given).
void cmd_synth(const CommandOptions& options);

// Trains the offline model and writes its accuracy record to `out`.
OfflineBaseline cmd_baseline(const CommandOptions& options);

struct RunSummary {
  std::size_t executed = 0;
  std::size_t skipped = 0;
};

// Executes the sweep, appending JSONL records to `out`. Completed run ids
// already in `out` are skipped; partial runs are discarded and rerun.
RunSummary cmd_run(const CommandOptions& options);

struct OmegaRow {
  std::string dataset;
  std::string ordering;
  std::string method;
  std::size_t buffer_size = 0;
  double omega = 0.0;      // mean over seeds
  double omega_std = 0.0;  // sample std-dev over seeds
  std::size_t num_seeds = 0;
};

struct MuRow {
  std::string dataset;
  std::string ordering;
  std::string method;
  double mu = 0.0;
  double mu_std = 0.0;  // std-dev of per-seed mu_total
  std::size_t num_seeds = 0;
};

struct Report {
  std::vector<OmegaRow> omegas;
  std::vector<MuRow> mus;
};

Report build_report(const std::vector<LoggedRun>& runs, const OfflineBaseline& baseline);

// Writes <out>/omega_table.csv and <out>/omega_series.csv.
Report cmd_report(const CommandOptions& options);

}  // namespace exstream
