#include "mmzero/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmzero {

void RewardConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid reward config: ") + what);
  };
  require(tau_s > 0.0 && tau_s <= 1.0, "tau_s must be in (0, 1]");
  require(phi > 0.0 && phi < 1.0, "phi must be in (0, 1)");
  require(lambda_eh >= 0.0 && lambda_ct >= 0.0 && lambda_div >= 0.0, "penalties must be >= 0");
  require(err_render >= 0.0 && err_syntax >= 0.0, "coder penalties must be >= 0");
  require(w_c >= 0.0 && w_e >= 0.0 && w_h >= 0.0, "diversity weights must be >= 0");
  require(std::abs(w_c + w_e + w_h - 1.0) <= 1e-9, "diversity weights must sum to 1");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0, 1]");
  require(delta_eh >= 0.0, "delta_eh must be >= 0");
}

void to_json(nlohmann::json& j, const RewardConfig& c) {
  j = nlohmann::json{{"tau_s", c.tau_s},         {"delta_eh", c.delta_eh},     {"lambda_eh", c.lambda_eh},
                     {"phi", c.phi},             {"lambda_ct", c.lambda_ct},   {"w_c", c.w_c},
                     {"w_e", c.w_e},             {"w_h", c.w_h},               {"lambda_div", c.lambda_div},
                     {"alpha", c.alpha},         {"err_render", c.err_render}, {"err_syntax", c.err_syntax}};
}

void from_json(const nlohmann::json& j, RewardConfig& c) {
  RewardConfig d;
  c.tau_s = j.value("tau_s", d.tau_s);
  c.delta_eh = j.value("delta_eh", d.delta_eh);
  c.lambda_eh = j.value("lambda_eh", d.lambda_eh);
  c.phi = j.value("phi", d.phi);
  c.lambda_ct = j.value("lambda_ct", d.lambda_ct);
  c.w_c = j.value("w_c", d.w_c);
  c.w_e = j.value("w_e", d.w_e);
  c.w_h = j.value("w_h", d.w_h);
  c.lambda_div = j.value("lambda_div", d.lambda_div);
  c.alpha = j.value("alpha", d.alpha);
  c.err_render = j.value("err_render", d.err_render);
  c.err_syntax = j.value("err_syntax", d.err_syntax);
}

double solvability(const ImageEvidence& e, std::string_view a_easy) {
  if (!e.rendered()) throw NotRenderedError();
  if (e.easy_votes.empty()) throw UsageError("solvability needs at least one easy-question vote");
  const auto target = normalize(a_easy);
  const auto matches = std::count_if(e.easy_votes.begin(), e.easy_votes.end(),
                                     [&](const Vote& v) { return v && answers_equal(*v, target); });
  return static_cast<double>(matches) / static_cast<double>(e.easy_votes.size());
}

double difficulty_from_consistency(double c) { return std::min(c, 1.0 - c); }

double difficulty(const ImageEvidence& e) {
  if (!e.rendered()) throw NotRenderedError();
  return difficulty_from_consistency(majority_vote(e.hard_votes).consistency);
}

double easy_hard_penalty(std::span<const double> diffs, const RewardConfig& cfg) {
  if (diffs.empty()) return -cfg.lambda_eh;
  const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(diffs.size());
  return mean < cfg.delta_eh ? -cfg.lambda_eh : 0.0;
}

double content_type_penalty(double f_t, const RewardConfig& cfg) {
  if (f_t > cfg.phi) return -cfg.lambda_ct * (f_t - cfg.phi) / (1.0 - cfg.phi);
  return 0.0;
}

double diversity_adjustment(double s_cap, double s_eq, double s_hq, std::size_t m, const RewardConfig& cfg) {
  if (m == 0) throw UsageError("diversity_adjustment needs M >= 1");
  const double u = 1.0 / static_cast<double>(m);
  const double raw =
      (cfg.w_c * (s_cap - u) + cfg.w_e * (s_eq - u) + cfg.w_h * (s_hq - u)) * static_cast<double>(m) * cfg.lambda_div;
  // Adding 0.0 turns a -0.0 result into +0.0.
  return -std::clamp(raw, -cfg.lambda_div, cfg.lambda_div) + 0.0;
}

void to_json(nlohmann::json& j, const ProposerRewardBreakdown& b) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& p : b.per_image) images.push_back({{"exec", p.exec}, {"solv", p.solv}, {"diff", p.diff}});
  j = nlohmann::json{{"format_valid", b.format_valid},
                     {"per_image", std::move(images)},
                     {"base", b.base},
                     {"r_eh", b.r_eh},
                     {"r_ct", b.r_ct},
                     {"r_div", b.r_div},
                     {"total", b.total}};
}

ProposerRewardBreakdown proposer_reward(const ProposalParse& proposal, std::span<const ImageEvidence> evidences,
                                        const BatchContext& batch, const RewardConfig& cfg) {
  cfg.validate();
  ProposerRewardBreakdown out;
  const auto* p = std::get_if<Proposal>(&proposal);
  if (p == nullptr) {
    out.total = -1.0;
    return out;
  }
  if (evidences.empty()) throw UsageError("proposer_reward needs at least one coder sample");

  out.format_valid = true;
  std::vector<double> diffs;
  double sum = 0.0;
  for (const auto& e : evidences) {
    PerImageReward r;
    if (e.rendered()) {
      r.exec = true;
      r.solv = solvability(e, p->easy_answer);
      r.diff = difficulty(e);
      diffs.push_back(r.diff);
      sum += std::min(r.solv, cfg.tau_s) + r.diff;
    }
    out.per_image.push_back(r);
  }
  out.base = sum / static_cast<double>(evidences.size());
  out.r_eh = easy_hard_penalty(diffs, cfg);
  out.r_ct = content_type_penalty(batch.f_t, cfg);
  out.r_div = diversity_adjustment(batch.s_cap, batch.s_eq, batch.s_hq, batch.m, cfg);
  out.total = out.base + out.r_eh + out.r_ct + out.r_div;
  return out;
}

void to_json(nlohmann::json& j, const CoderRewardBreakdown& b) {
  j = nlohmann::json{{"r_render", b.r_render},
                     {"r_solv", b.r_solv},
                     {"r_diff", b.r_diff},
                     {"penalty", b.penalty},
                     {"total", b.total}};
}

CoderRewardBreakdown coder_reward(const ImageEvidence& e, std::string_view a_easy, const RewardConfig& cfg) {
  CoderRewardBreakdown out;
  if (e.rendered()) {
    out.r_render = 1.0;
    out.r_solv = solvability(e, a_easy);
    out.r_diff = difficulty(e);
  } else {
    out.penalty = cfg.err_render;
    if (e.status == RenderStatus::syntax_error) out.penalty += cfg.err_syntax;
  }
  out.total = out.r_render + out.r_solv + out.r_diff - out.penalty;
  return out;
}

double solver_reward(std::string_view response, const ExtractedAnswer& silver, const RewardConfig& cfg) {
  const auto answer = extract_boxed(response);
  const double acc = (answer && answers_equal(*answer, silver)) ? 1.0 : 0.0;
  const double fmt = check_solver_format(response) ? 1.0 : 0.0;
  const double r = cfg.alpha * acc + (1.0 - cfg.alpha) * fmt;
  return std::round(r * 1e12) / 1e12;  // snap to 1e-12
}

}  // namespace mmzero
