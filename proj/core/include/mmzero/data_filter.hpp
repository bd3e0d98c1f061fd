#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmzero/proposal.hpp"

namespace mmzero {

struct CoderCandidate {
  Proposal proposal;
  double render_success_rate = 0.0;  // successes / rollouts
  std::size_t rollouts = 4;
};

struct SolverCandidate {
  Proposal proposal;
  std::string image_base64;
  double easy_accuracy = 0.0;  // against a_easy
  double hard_accuracy = 0.0;  // self-consistency against the majority answer
};

// Closed intervals; "exceeds" is strict.
inline constexpr double kCoderRateMin = 0.25;
inline constexpr double kCoderRateMax = 0.75;
inline constexpr double kSolverEasyMin = 0.5;  // exclusive
inline constexpr double kSolverHardMin = 0.27;
inline constexpr double kSolverHardMax = 0.75;

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped_by_reason;
};

void to_json(nlohmann::json& j, const FilterReport& r);
void from_json(const nlohmann::json& j, FilterReport& r);

std::vector<CoderCandidate> filter_coder(const std::vector<CoderCandidate>& candidates, FilterReport* report = nullptr);
std::vector<SolverCandidate> filter_solver(const std::vector<SolverCandidate>& candidates,
                                           FilterReport* report = nullptr);

nlohmann::json coder_candidate_to_json(const CoderCandidate& c);
CoderCandidate coder_candidate_from_json(const nlohmann::json& j);
nlohmann::json solver_candidate_to_json(const SolverCandidate& c);
SolverCandidate solver_candidate_from_json(const nlohmann::json& j);

}  // namespace mmzero
