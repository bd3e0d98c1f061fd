#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmzero/backend.hpp"
#include "mmzero/config.hpp"
#include "mmzero/data_filter.hpp"
#include "mmzero/prompt_template.hpp"

namespace mmzero {

inline constexpr int kSchemaVersion = 1;

struct TrainingRecord {
  std::string group_id;
  std::string prompt;
  std::optional<std::string> image_base64;
  std::string response;
  double reward = 0.0;
  double advantage = 0.0;
  nlohmann::json breakdown;  // null when absent
};

struct TrainingBatch {
  Role role = Role::proposer;
  int iteration = 1;
  int step = 1;
  std::vector<TrainingRecord> records;
};

nlohmann::json record_to_json(const TrainingBatch& batch, const TrainingRecord& r);
TrainingRecord record_from_json(const nlohmann::json& j);

struct MetricsRecord {
  int iteration = 1;
  int step = 1;
  Role role = Role::proposer;
  std::optional<double> render_success_rate;  // ok renders / coder samples
  std::optional<double> solvability_rate;     // mean solvability over rendered images
  double mean_reward = 0.0;
  std::size_t records = 0;
  std::size_t skipped_groups = 0;
  std::optional<FilterReport> filter_report;
};

void to_json(nlohmann::json& j, const MetricsRecord& m);

class QuotaExceeded : public Error {
 public:
  using Error::Error;
};

class AckTimeout : public Error {
 public:
  using Error::Error;
};

// Supplies one backend per role. refresh() runs at every phase boundary.
class BackendProvider {
 public:
  virtual ~BackendProvider() = default;
  virtual InferenceBackend& backend(Role role) = 0;
  virtual void refresh() {}
};

// Builds backends from endpoint configuration. With a reload callback the
// endpoint table is re-read on refresh().
class EndpointBackendProvider : public BackendProvider {
 public:
  using Reload = std::function<std::map<Role, BackendEndpoint>()>;

  explicit EndpointBackendProvider(std::map<Role, BackendEndpoint> endpoints, Reload reload = {});
  InferenceBackend& backend(Role role) override;
  void refresh() override;

 private:
  std::map<Role, BackendEndpoint> endpoints_;
  Reload reload_;
  std::map<Role, std::shared_ptr<InferenceBackend>> cache_;
};

// Same backend instances for every phase.
class FixedBackendProvider : public BackendProvider {
 public:
  explicit FixedBackendProvider(std::map<Role, std::shared_ptr<InferenceBackend>> backends)
      : backends_(std::move(backends)) {}
  InferenceBackend& backend(Role role) override;

 private:
  std::map<Role, std::shared_ptr<InferenceBackend>> backends_;
};

struct DatasetRef {
  std::filesystem::path path;
  std::size_t records = 0;
  FilterReport report;
};

struct IterationReport {
  int iteration = 1;
  std::vector<std::string> phases_run;
  std::vector<std::string> phases_skipped;
  std::vector<MetricsRecord> metrics;
};

void to_json(nlohmann::json& j, const IterationReport& r);

// Layout under the run directory:
//   iter-<k>/<role>/batch-<step>.jsonl, batch-<step>.ready, ack-<step>, metrics-<step>.json
//   iter-<k>/datasets/{coder,solver}.jsonl and {coder,solver}.filter.json
//   iter-<k>/<phase>.done
class Orchestrator {
 public:
  Orchestrator(LoopConfig cfg, std::filesystem::path run_dir, BackendProvider& backends);

  const LoopConfig& config() const { return cfg_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }
  std::filesystem::path iteration_dir(int iteration) const;

  TrainingBatch proposer_step(int iteration, int step);
  DatasetRef generate_coder_dataset(int iteration);
  TrainingBatch coder_step(int iteration, int step, const std::filesystem::path& dataset);
  DatasetRef generate_solver_dataset(int iteration);
  TrainingBatch solver_step(int iteration, int step, const std::filesystem::path& dataset);

  // Runs the five phases of one iteration, skipping phases with a done marker
  // and steps whose batch is already persisted.
  IterationReport run_iteration(int iteration);
  std::vector<IterationReport> evolve();

  // Metrics of the most recent step.
  const MetricsRecord& last_metrics() const { return last_metrics_; }

 private:
  struct Sampled;
  struct Sample;
  Sampled sample_proposals(int iteration, const std::string& phase, int round, int prompts);
  std::vector<Proposal> sample_valid_proposals(int iteration, const std::string& phase, std::size_t target);
  std::vector<std::vector<std::string>> coder_rollouts(const std::vector<const Proposal*>& proposals, int n,
                                                       int iteration, const std::string& phase, int step);
  std::vector<std::vector<Sample>> render_rollouts(const std::vector<std::vector<std::string>>& texts, int iteration,
                                                   const std::string& phase, int step);
  void collect_votes(const std::vector<const Proposal*>& proposals, std::vector<std::vector<Sample>>& samples,
                     int iteration, const std::string& phase, int step);
  std::uint64_t request_seed(int iteration, const std::string& phase, int step, std::size_t index) const;
  void persist_batch(const TrainingBatch& batch, const MetricsRecord& metrics);
  void await_acks(int iteration, Role role);
  std::filesystem::path role_dir(int iteration, Role role) const;

  LoopConfig cfg_;
  std::filesystem::path run_dir_;
  BackendProvider& backends_;
  TemplateSet templates_;
  MetricsRecord last_metrics_;
};

// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<nlohmann::json>& rows);

struct BenchmarkVerdict {
  std::string id;
  bool correct = false;
  std::optional<std::string> answer;
  std::string error;
};

struct BenchmarkReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::vector<BenchmarkVerdict> verdicts;
};

void to_json(nlohmann::json& j, const BenchmarkReport& r);

// Records are {id, image, question, gold}; `image` is a path relative to the
// benchmark file or base64 PNG data. The solver answers once per record at
// temperature 0. Per-record failures count as incorrect.
BenchmarkReport evaluate_benchmark(const LoopConfig& cfg, const std::filesystem::path& benchmark, bool use_judge,
                                   BackendProvider& backends);

}  // namespace mmzero
