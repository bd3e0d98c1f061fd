#include "mmzero/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "mmzero/toy_policy.hpp"

namespace mmzero {

void GrpoConfig::validate() const {
  if (!(eps_norm > 0.0)) throw ConfigError("eps_norm must be > 0");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip_eps must be in (0, 1)");
  if (!(kl_beta >= 0.0)) throw ConfigError("kl_beta must be >= 0");
}

void to_json(nlohmann::json& j, const GrpoConfig& c) {
  j = nlohmann::json{{"eps_norm", c.eps_norm}, {"clip_eps", c.clip_eps}, {"kl_beta", c.kl_beta}};
}

void from_json(const nlohmann::json& j, GrpoConfig& c) {
  GrpoConfig d;
  c.eps_norm = j.value("eps_norm", d.eps_norm);
  c.clip_eps = j.value("clip_eps", d.clip_eps);
  c.kl_beta = j.value("kl_beta", d.kl_beta);
}

std::vector<double> group_advantages(std::span<const double> rewards, const GrpoConfig& cfg) {
  if (rewards.empty()) throw UsageError("group_advantages needs at least one reward");
  const auto n = static_cast<double>(rewards.size());
  if (std::adjacent_find(rewards.begin(), rewards.end(), std::not_equal_to<>()) == rewards.end()) {
    return std::vector<double>(rewards.size(), 0.0);
  }
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(ss / n);
  std::vector<double> adv(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / (std_dev + cfg.eps_norm);
  return adv;
}

namespace {

void check_lengths(const RolloutGroup& group, std::span<const double> logprobs_new) {
  if (group.rewards.size() != group.logprobs_old.size() || group.rewards.size() != logprobs_new.size()) {
    throw UsageError("grpo_loss: rewards and log-probability lists differ in length");
  }
  if (group.rewards.empty()) throw UsageError("grpo_loss: empty group");
}

double ratio_of(double lp_new, double lp_old) {
  const double log_ratio = lp_new - lp_old;
  if (!std::isfinite(log_ratio) || std::abs(log_ratio) > kMaxLogRatio) {
    throw NonFiniteError("policy ratio out of range (|log ratio| > 50)");
  }
  return std::exp(log_ratio);
}

}  // namespace

double grpo_loss(const RolloutGroup& group, std::span<const double> logprobs_new, std::span<const double> kl_terms,
                 const GrpoConfig& cfg) {
  check_lengths(group, logprobs_new);
  if (!kl_terms.empty() && kl_terms.size() != group.rewards.size()) throw UsageError("grpo_loss: kl_terms length mismatch");
  const auto adv = group_advantages(group.rewards, cfg);
  const auto n = static_cast<double>(adv.size());
  double surrogate = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const double rho = ratio_of(logprobs_new[i], group.logprobs_old[i]);
    const double clipped = std::clamp(rho, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    surrogate += std::min(rho * adv[i], clipped * adv[i]);
  }
  const double kl = std::accumulate(kl_terms.begin(), kl_terms.end(), 0.0) / n;
  return -surrogate / n + cfg.kl_beta * kl;
}

std::vector<double> grpo_loss_logprob_grad(const RolloutGroup& group, std::span<const double> logprobs_new,
                                           const GrpoConfig& cfg) {
  check_lengths(group, logprobs_new);
  const auto adv = group_advantages(group.rewards, cfg);
  const auto n = static_cast<double>(adv.size());
  std::vector<double> grad(adv.size(), 0.0);
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const double rho = ratio_of(logprobs_new[i], group.logprobs_old[i]);
    const double clipped = std::clamp(rho, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    // The unclipped term is selected when it is the smaller one or clipping is
    // inactive; its derivative w.r.t. the new log-prob is rho * A.
    const bool clipped_selected = clipped != rho && clipped * adv[i] < rho * adv[i];
    if (!clipped_selected) grad[i] = -rho * adv[i] / n;
  }
  return grad;
}

namespace {

struct ToyGroup {
  std::vector<toy::Sequence> sequences;
  RolloutGroup rollout;
};

double toy_loss(const toy::SoftmaxPolicy& policy, const toy::SoftmaxPolicy& old, const ToyGroup& g,
                const GrpoConfig& cfg) {
  std::vector<double> lp_new;
  std::vector<double> kl;
  for (const auto& s : g.sequences) {
    lp_new.push_back(policy.log_prob(s));
    kl.push_back(policy.kl_along(s, old));
  }
  return grpo_loss(g.rollout, lp_new, kl, cfg);
}

std::vector<double> toy_grad(const toy::SoftmaxPolicy& policy, const toy::SoftmaxPolicy& old, const ToyGroup& g,
                             const GrpoConfig& cfg) {
  std::vector<double> lp_new;
  for (const auto& s : g.sequences) lp_new.push_back(policy.log_prob(s));
  const auto dlp = grpo_loss_logprob_grad(g.rollout, lp_new, cfg);
  const auto n = static_cast<double>(g.sequences.size());
  std::vector<double> grad(policy.parameter_count(), 0.0);
  for (std::size_t i = 0; i < g.sequences.size(); ++i) {
    const auto glp = policy.grad_log_prob(g.sequences[i]);
    const auto gkl = policy.grad_kl_along(g.sequences[i], old);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += dlp[i] * glp[k] + cfg.kl_beta * gkl[k] / n;
  }
  return grad;
}

double max_rel_error(toy::SoftmaxPolicy policy, const toy::SoftmaxPolicy& old, const ToyGroup& g,
                     const GrpoConfig& cfg) {
  constexpr double kStep = 1e-5;
  constexpr double kFloor = 1e-6;
  const auto analytic = toy_grad(policy, old, g, cfg);
  double worst = 0.0;
  auto logits = policy.logits();
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double saved = logits[k];
    logits[k] = saved + kStep;
    const double up = toy_loss(policy, old, g, cfg);
    logits[k] = saved - kStep;
    const double down = toy_loss(policy, old, g, cfg);
    logits[k] = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), kFloor});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
  }
  return worst;
}

// True when every ratio sits clear of the clip boundaries, so the loss is
// smooth within the finite-difference stencil.
bool away_from_kinks(const std::vector<double>& ratios, const GrpoConfig& cfg) {
  return std::all_of(ratios.begin(), ratios.end(), [&](double r) {
    return std::abs(r - (1.0 - cfg.clip_eps)) > 1e-3 && std::abs(r - (1.0 + cfg.clip_eps)) > 1e-3;
  });
}

}  // namespace

GradCheckReport toy_policy_check(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int vocab = 2 + static_cast<int>(seed % 7);
  const int length = 1 + static_cast<int>((seed / 7) % 4);
  const std::size_t n = 4 + static_cast<std::size_t>(seed % 5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> reward_pick(0, 3);

  GrpoConfig cfg;
  cfg.kl_beta = 0.1;

  toy::SoftmaxPolicy old(vocab, length);
  for (auto& z : old.logits()) z = normal(rng);

  ToyGroup group;
  group.rollout.prompt_id = "toy";
  do {
    group.sequences.clear();
    group.rollout.rewards.clear();
    group.rollout.logprobs_old.clear();
    for (std::size_t i = 0; i < n; ++i) {
      auto s = old.sample(rng);
      group.rollout.logprobs_old.push_back(old.log_prob(s));
      group.rollout.rewards.push_back(static_cast<double>(reward_pick(rng)));
      group.sequences.push_back(std::move(s));
    }
  } while (std::all_of(group.rollout.rewards.begin(), group.rollout.rewards.end(),
                       [&](double r) { return r == group.rollout.rewards.front(); }));

  GradCheckReport report;
  report.parameters = old.parameter_count();

  // Clip-inactive regime: the policy equals the behaviour policy.
  report.max_rel_grad_error = max_rel_error(old, old, group, cfg);
  report.clip_inactive += n;
  ++report.groups;

  // Clip-active regime: perturb until some ratio leaves the trust region on the
  // side where the clipped branch is selected, keeping clear of the kinks.
  const auto adv = group_advantages(group.rollout.rewards, cfg);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    toy::SoftmaxPolicy moved = old;
    const double scale = 0.3 + 0.05 * (attempt % 20);
    for (auto& z : moved.logits()) z += scale * normal(rng);
    std::vector<double> ratios;
    std::size_t active = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = std::exp(moved.log_prob(group.sequences[i]) - group.rollout.logprobs_old[i]);
      ratios.push_back(rho);
      if ((rho > 1.0 + cfg.clip_eps && adv[i] > 0.0) || (rho < 1.0 - cfg.clip_eps && adv[i] < 0.0)) ++active;
    }
    if (active == 0 || active == n || !away_from_kinks(ratios, cfg)) continue;
    report.max_rel_grad_error = std::max(report.max_rel_grad_error, max_rel_error(moved, old, group, cfg));
    report.clip_active += active;
    report.clip_inactive += n - active;
    ++report.groups;
    break;
  }
  return report;
}

}  // namespace mmzero
