#include "mmzero/data_filter.hpp"

namespace mmzero {

void to_json(nlohmann::json& j, const FilterReport& r) {
  j = nlohmann::json{{"input_count", r.input_count}, {"kept", r.kept}, {"dropped_by_reason", r.dropped_by_reason}};
}

void from_json(const nlohmann::json& j, FilterReport& r) {
  r.input_count = j.at("input_count").get<std::size_t>();
  r.kept = j.at("kept").get<std::size_t>();
  r.dropped_by_reason = j.at("dropped_by_reason").get<std::map<std::string, std::size_t>>();
}

std::vector<CoderCandidate> filter_coder(const std::vector<CoderCandidate>& candidates, FilterReport* report) {
  FilterReport local;
  std::vector<CoderCandidate> kept;
  for (const auto& c : candidates) {
    if (c.render_success_rate < kCoderRateMin) {
      ++local.dropped_by_reason["render_rate_too_low"];
    } else if (c.render_success_rate > kCoderRateMax) {
      ++local.dropped_by_reason["render_rate_too_high"];
    } else {
      kept.push_back(c);
    }
  }
  local.input_count = candidates.size();
  local.kept = kept.size();
  if (report) *report = std::move(local);
  return kept;
}

std::vector<SolverCandidate> filter_solver(const std::vector<SolverCandidate>& candidates, FilterReport* report) {
  FilterReport local;
  std::vector<SolverCandidate> kept;
  for (const auto& c : candidates) {
    if (!(c.easy_accuracy > kSolverEasyMin)) {
      ++local.dropped_by_reason["easy_accuracy_too_low"];
    } else if (c.hard_accuracy < kSolverHardMin) {
      ++local.dropped_by_reason["hard_accuracy_too_low"];
    } else if (c.hard_accuracy > kSolverHardMax) {
      ++local.dropped_by_reason["hard_accuracy_too_high"];
    } else {
      kept.push_back(c);
    }
  }
  local.input_count = candidates.size();
  local.kept = kept.size();
  if (report) *report = std::move(local);
  return kept;
}

nlohmann::json coder_candidate_to_json(const CoderCandidate& c) {
  return {{"proposal", proposal_to_json(c.proposal)},
          {"render_success_rate", c.render_success_rate},
          {"rollouts", c.rollouts}};
}

CoderCandidate coder_candidate_from_json(const nlohmann::json& j) {
  CoderCandidate c;
  c.proposal = proposal_from_json(j.at("proposal"));
  c.render_success_rate = j.at("render_success_rate").get<double>();
  c.rollouts = j.value("rollouts", std::size_t{4});
  return c;
}

nlohmann::json solver_candidate_to_json(const SolverCandidate& c) {
  return {{"proposal", proposal_to_json(c.proposal)},
          {"image", c.image_base64},
          {"easy_accuracy", c.easy_accuracy},
          {"hard_accuracy", c.hard_accuracy}};
}

SolverCandidate solver_candidate_from_json(const nlohmann::json& j) {
  SolverCandidate c;
  c.proposal = proposal_from_json(j.at("proposal"));
  c.image_base64 = j.at("image").get<std::string>();
  c.easy_accuracy = j.at("easy_accuracy").get<double>();
  c.hard_accuracy = j.at("hard_accuracy").get<double>();
  return c;
}

}  // namespace mmzero
