#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmzero/backend.hpp"
#include "mmzero/grpo.hpp"
#include "mmzero/render.hpp"
#include "mmzero/rewards.hpp"

namespace mmzero {

enum class TrainerAck { none, ack };

struct LoopConfig {
  int steps_per_role = 20;
  int iterations = 3;
  int coder_dataset_size = 4000;
  int solver_dataset_size = 0;  // 0 means coder_dataset_size
  int proposer_batch = 18;      // prompts per proposer step
  int coder_batch = 64;         // dataset records per coder step
  int solver_batch = 64;        // dataset records per solver step
  std::vector<std::string> seed_topics;
  RenderLimits render_limits;
  RewardConfig reward;
  GrpoConfig grpo;
  double cluster_threshold = 0.7;  // average-linkage merge limit on BLEU distance
  std::map<Role, BackendEndpoint> endpoints;
  std::map<Role, SamplingParams> sampling;
  SamplingParams evidence = default_evidence_sampling();
  std::uint64_t rng_seed = 0;
  std::string templates_dir;  // empty keeps the built-in templates
  TrainerAck trainer_ack = TrainerAck::ack;
  std::chrono::seconds ack_timeout{86400};
  bool dump_renders = false;

  int effective_solver_dataset_size() const {
    return solver_dataset_size > 0 ? solver_dataset_size : coder_dataset_size;
  }
  const SamplingParams& sampling_for(Role r) const;
  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json& j, const LoopConfig& c);
// Keys absent from `j` keep the values already in `c`.
void from_json(const nlohmann::json& j, LoopConfig& c);

std::vector<std::string> default_seed_topics();

// "paper" holds the full-scale defaults; "desk" shrinks sizes so a full
// iteration finishes in minutes against scripted backends.
LoopConfig profile_config(std::string_view profile);

// Profile defaults overlaid with the JSON file (if any).
LoopConfig load_config(const std::optional<std::filesystem::path>& path, std::string_view profile);

}  // namespace mmzero
