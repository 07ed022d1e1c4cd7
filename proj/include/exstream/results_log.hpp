#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "exstream/experiment_config.hpp"
#include "exstream/protocol.hpp"

namespace exstream {

// Identity fields shared by every record of a run.
struct RunKey {
  std::string run_id;
  std::string dataset;
  std::string method;
  std::size_t buffer_size = 0;
  std::string ordering;
  std::uint64_t seed = 0;
};

// A run as read back from the results log.
struct LoggedRun {
  RunKey key;
  EvalScope eval_scope = EvalScope::kSeenClasses;
  AccuracyCurve curve;
  bool complete = false;  // terminal record present
  double wall_clock_s = 0.0;
  double memory_cost = 0.0;
};

// JSON lines for one finished run: one "event" record per test event, a
// "buffer" record when the final buffer was captured, then a "summary" record
// with wall-clock time and memory cost.
std::vector<std::string> format_run_records(const SweepRun& run, const std::string& dataset,
                                            const RunResult& result);

// Runs in order of first appearance. Throws DataError on malformed lines.
std::vector<LoggedRun> read_results(const std::filesystem::path& path);

// Drops records of incomplete runs so the log can be resumed; returns the ids
// of runs that already have a summary record.
std::vector<std::string> compact_results(const std::filesystem::path& path);

nlohmann::json to_json(const OfflineBaseline& baseline);
OfflineBaseline baseline_from_json(const nlohmann::json& doc);
void write_baseline(const std::filesystem::path& path, const OfflineBaseline& baseline);
OfflineBaseline read_baseline(const std::filesystem::path& path);

}  // namespace exstream
