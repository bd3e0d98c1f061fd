#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmzero/error.hpp"

namespace mmzero {

struct GrpoConfig {
  double eps_norm = 1e-6;
  double clip_eps = 0.2;
  double kl_beta = 0.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const GrpoConfig& c);
void from_json(const nlohmann::json& j, GrpoConfig& c);

// (r_i - mean) / (population std + eps_norm). A single reward maps to 0.
std::vector<double> group_advantages(std::span<const double> rewards, const GrpoConfig& cfg);

struct RolloutGroup {
  std::string prompt_id;
  std::vector<double> rewards;
  std::vector<double> logprobs_old;  // sequence log-probabilities under the behaviour policy
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Largest |logprob_new - logprob_old| accepted before the ratio is rejected.
inline constexpr double kMaxLogRatio = 50.0;

// -(1/N) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) + beta * mean(kl_terms),
// with rho_i = exp(logprob_new_i - logprob_old_i). Empty kl_terms means no KL term.
double grpo_loss(const RolloutGroup& group, std::span<const double> logprobs_new, std::span<const double> kl_terms,
                 const GrpoConfig& cfg);

// d loss / d logprob_new_i for the surrogate part. Where the clipped branch is
// selected the entry is 0.
std::vector<double> grpo_loss_logprob_grad(const RolloutGroup& group, std::span<const double> logprobs_new,
                                           const GrpoConfig& cfg);

struct GradCheckReport {
  double max_rel_grad_error = 0.0;
  std::size_t parameters = 0;
  std::size_t groups = 0;
  std::size_t clip_active = 0;    // responses whose clipped branch was selected
  std::size_t clip_inactive = 0;
};

// Compares analytic GRPO gradients of a small categorical softmax policy
// (vocabulary <= 8, length <= 4, logits conditioned on position and previous
// symbol) against central finite differences with h = 1e-5. Runs one group at
// the behaviour policy and one perturbed far enough to activate clipping.
GradCheckReport toy_policy_check(std::uint64_t seed);

}  // namespace mmzero
