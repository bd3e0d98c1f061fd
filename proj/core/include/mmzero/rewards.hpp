#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmzero/answer.hpp"
#include "mmzero/error.hpp"
#include "mmzero/proposal.hpp"
#include "mmzero/render.hpp"

namespace mmzero {

struct RewardConfig {
  double tau_s = 0.5;       // solvability cap
  double delta_eh = 0.15;   // easy-hard threshold on mean difficulty
  double lambda_eh = 0.3;   // easy-hard penalty
  double phi = 0.5;         // content-type over-representation threshold
  double lambda_ct = 0.15;  // content-type penalty scale
  double w_c = 0.45;        // caption share weight
  double w_e = 0.20;        // easy-question share weight
  double w_h = 0.35;        // hard-question share weight
  double lambda_div = 0.5;  // diversity clip
  double alpha = 0.9;       // solver accuracy weight
  double err_render = 0.1;  // coder penalty for any failed render
  double err_syntax = 0.05; // extra coder penalty for a syntax error

  // Throws ConfigError when an invariant does not hold.
  void validate() const;
};

void to_json(nlohmann::json& j, const RewardConfig& c);
void from_json(const nlohmann::json& j, RewardConfig& c);

// Solver evidence for one Coder sample. Vote lists are empty unless the render
// succeeded.
struct ImageEvidence {
  RenderStatus status = RenderStatus::render_error;
  std::vector<Vote> easy_votes;
  std::vector<Vote> hard_votes;

  bool rendered() const { return status == RenderStatus::ok; }
};

double solvability(const ImageEvidence& e, std::string_view a_easy);
// min(c, 1 - c) where c is the hard-question self-consistency.
double difficulty(const ImageEvidence& e);
double difficulty_from_consistency(double c);

double easy_hard_penalty(std::span<const double> diffs, const RewardConfig& cfg);
double content_type_penalty(double f_t, const RewardConfig& cfg);
double diversity_adjustment(double s_cap, double s_eq, double s_hq, std::size_t m, const RewardConfig& cfg);

// Batch-level statistics for one proposal; shares and f_t are self-inclusive
// and computed over the format-valid proposals of the batch.
struct BatchContext {
  double f_t = 0.0;
  double s_cap = 0.0;
  double s_eq = 0.0;
  double s_hq = 0.0;
  std::size_t m = 1;
};

struct PerImageReward {
  bool exec = false;
  double solv = 0.0;
  double diff = 0.0;
};

struct ProposerRewardBreakdown {
  bool format_valid = false;
  std::vector<PerImageReward> per_image;
  double base = 0.0;
  double r_eh = 0.0;
  double r_ct = 0.0;
  double r_div = 0.0;
  double total = 0.0;
};

void to_json(nlohmann::json& j, const ProposerRewardBreakdown& b);

// Invalid format scores exactly -1; otherwise
// mean_i[exec_i * (min(solv_i, tau_s) + diff_i)] + r_eh + r_ct + r_div.
ProposerRewardBreakdown proposer_reward(const ProposalParse& proposal, std::span<const ImageEvidence> evidences,
                                        const BatchContext& batch, const RewardConfig& cfg);

struct CoderRewardBreakdown {
  double r_render = 0.0;
  double r_solv = 0.0;
  double r_diff = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

void to_json(nlohmann::json& j, const CoderRewardBreakdown& b);

// R_render + R_solv + R_diff - lambda_err. A syntax error pays both penalties.
CoderRewardBreakdown coder_reward(const ImageEvidence& e, std::string_view a_easy, const RewardConfig& cfg);

// alpha * [boxed answer == silver] + (1 - alpha) * [format ok].
double solver_reward(std::string_view response, const ExtractedAnswer& silver, const RewardConfig& cfg);

}  // namespace mmzero
