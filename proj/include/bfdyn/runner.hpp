#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <fstream>
#include <map>

#include <json.hpp>

#include "bfdyn/config.hpp"

namespace bfdyn {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitNumerical = 3,
};

struct RunOptions {
  std::filesystem::path out;  // empty: use the config's `out`
  int workers = 1;
  std::ostream* log = nullptr;  // human-readable progress, optional
};

/// Scientific records go to records.jsonl, wall-clock data to timing.jsonl,
/// so reruns of one config produce byte-identical records.jsonl files.
class RecordSink {
 public:
  RecordSink(const std::filesystem::path& dir, const ExperimentConfig& cfg);

  void write(nlohmann::json record);
  void timing(const std::string& what, double seconds);
  /// Two-column text file in the output directory.
  void plot(const std::string& name, const std::string& header,
            const std::vector<std::pair<double, double>>& rows);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string hash_;
  nlohmann::json tolerances_;
  std::ofstream records_;
  std::ofstream timing_;
  std::mutex mutex_;
};

/// Writes per-cell record batches in cell order, as soon as every earlier
/// cell has finished.
class OrderedAppender {
 public:
  explicit OrderedAppender(RecordSink& sink) : sink_(sink) {}
  void complete(std::size_t index, std::vector<nlohmann::json> records);
  /// Marks a cell as failed so later cells are not held back by it.
  void skip(std::size_t index);

 private:
  void drain();
  RecordSink& sink_;
  std::mutex mutex_;
  std::size_t next_ = 0;
  std::map<std::size_t, std::vector<nlohmann::json>> pending_;
  std::map<std::size_t, bool> skipped_;
};

/// Runs task(i) for i < count on `workers` threads. Every task runs even if
/// others throw; the exception of the lowest failing index is rethrown.
void run_pool(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

int cmd_check(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_evolve(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_converge(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& opts);

void print_identity_inventory(std::ostream& out);

/// Maps exceptions to exit codes (input problems 2, propagation failures 3).
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace bfdyn
