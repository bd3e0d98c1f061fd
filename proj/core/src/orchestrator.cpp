#include "mmzero/orchestrator.hpp"

#include <algorithm>
#include <numeric>
#include <fstream>
#include <functional>
#include <thread>

#include <spdlog/spdlog.h>

#include "mmzero/answer.hpp"
#include "mmzero/diversity.hpp"
#include "mmzero/image.hpp"
#include "mmzero/render.hpp"
#include "mmzero/rewards.hpp"
#include "text_util.hpp"

namespace mmzero {

namespace {

constexpr const char* kPhaseProposer = "proposer";
constexpr const char* kPhaseCoderData = "coder-data";
constexpr const char* kPhaseCoder = "coder";
constexpr const char* kPhaseSolverData = "solver-data";
constexpr const char* kPhaseSolver = "solver";

std::string step_name(int step) { return std::to_string(step); }

std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double mean_reward(const TrainingBatch& b) {
  std::vector<double> r;
  for (const auto& rec : b.records) r.push_back(rec.reward);
  return mean_of(r).value_or(0.0);
}

// Assigns group advantages to records that share a group id, in order.
void assign_advantages(std::vector<TrainingRecord>& records, std::size_t begin, const GrpoConfig& cfg) {
  std::vector<double> rewards;
  for (std::size_t i = begin; i < records.size(); ++i) rewards.push_back(records[i].reward);
  if (rewards.empty()) return;
  const auto adv = group_advantages(rewards, cfg);
  for (std::size_t i = begin; i < records.size(); ++i) records[i].advantage = adv[i - begin];
}

std::vector<double> shares_for(const std::vector<std::string>& texts, double threshold) {
  if (texts.empty()) return {};
  return cluster_shares(agglomerate(distance_matrix(texts), threshold));
}

std::vector<nlohmann::json> load_dataset(const std::filesystem::path& path) {
  auto rows = read_jsonl(path);
  if (rows.empty()) throw UsageError("dataset " + path.string() + " is empty");
  return rows;
}

}  // namespace

struct Orchestrator::Sampled {
  std::vector<std::string> prompts;    // one per prompt group
  std::vector<std::string> responses;  // prompts.size() * n, grouped by prompt
  std::vector<ProposalParse> parses;
  int n = 1;
};

struct Orchestrator::Sample {
  std::string text;
  RenderStatus status = RenderStatus::render_error;
  std::string image_base64;  // set when rendered
  ImageEvidence evidence;
};

nlohmann::json record_to_json(const TrainingBatch& batch, const TrainingRecord& r) {
  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"role", to_string(batch.role)},
                      {"iteration", batch.iteration},
                      {"step", batch.step},
                      {"group_id", r.group_id},
                      {"prompt", r.prompt},
                      {"response", r.response},
                      {"reward", r.reward},
                      {"advantage", r.advantage}};
  if (r.image_base64) j["image"] = *r.image_base64;
  if (!r.breakdown.is_null()) j["breakdown"] = r.breakdown;
  return j;
}

TrainingRecord record_from_json(const nlohmann::json& j) {
  TrainingRecord r;
  r.group_id = j.at("group_id").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.response = j.at("response").get<std::string>();
  r.reward = j.at("reward").get<double>();
  r.advantage = j.at("advantage").get<double>();
  if (j.contains("image")) r.image_base64 = j.at("image").get<std::string>();
  if (j.contains("breakdown")) r.breakdown = j.at("breakdown");
  return r;
}

void to_json(nlohmann::json& j, const MetricsRecord& m) {
  j = {{"schema_version", kSchemaVersion},
       {"iteration", m.iteration},
       {"step", m.step},
       {"role", to_string(m.role)},
       {"render_success_rate", nullptr},
       {"solvability_rate", nullptr},
       {"mean_reward", m.mean_reward},
       {"records", m.records},
       {"skipped_groups", m.skipped_groups},
       {"filter_report", nullptr}};
  if (m.render_success_rate) j["render_success_rate"] = *m.render_success_rate;
  if (m.solvability_rate) j["solvability_rate"] = *m.solvability_rate;
  if (m.filter_report) j["filter_report"] = *m.filter_report;
}

namespace {

MetricsRecord metrics_from_json(const nlohmann::json& j) {
  MetricsRecord m;
  m.iteration = j.at("iteration").get<int>();
  m.step = j.at("step").get<int>();
  m.role = parse_role(j.at("role").get<std::string>());
  if (!j.at("render_success_rate").is_null()) m.render_success_rate = j.at("render_success_rate").get<double>();
  if (!j.at("solvability_rate").is_null()) m.solvability_rate = j.at("solvability_rate").get<double>();
  m.mean_reward = j.at("mean_reward").get<double>();
  m.records = j.at("records").get<std::size_t>();
  m.skipped_groups = j.at("skipped_groups").get<std::size_t>();
  if (!j.at("filter_report").is_null()) m.filter_report = j.at("filter_report").get<FilterReport>();
  return m;
}

}  // namespace

void to_json(nlohmann::json& j, const IterationReport& r) {
  j = {{"schema_version", kSchemaVersion},
       {"iteration", r.iteration},
       {"phases_run", r.phases_run},
       {"phases_skipped", r.phases_skipped},
       {"metrics", r.metrics}};
}

EndpointBackendProvider::EndpointBackendProvider(std::map<Role, BackendEndpoint> endpoints, Reload reload)
    : endpoints_(std::move(endpoints)), reload_(std::move(reload)) {}

InferenceBackend& EndpointBackendProvider::backend(Role role) {
  auto cached = cache_.find(role);
  if (cached != cache_.end()) return *cached->second;
  auto it = endpoints_.find(role);
  if (it == endpoints_.end()) throw ConfigError("no endpoint configured for role " + std::string(to_string(role)));
  auto b = make_backend(it->second);
  auto& ref = *b;
  cache_[role] = std::move(b);
  return ref;
}

void EndpointBackendProvider::refresh() {
  if (!reload_) return;
  auto fresh = reload_();
  for (auto it = cache_.begin(); it != cache_.end();) {
    auto f = fresh.find(it->first);
    auto old = endpoints_.find(it->first);
    const bool same = f != fresh.end() && old != endpoints_.end() && nlohmann::json(f->second) == nlohmann::json(old->second);
    it = same ? std::next(it) : cache_.erase(it);
  }
  endpoints_ = std::move(fresh);
}

InferenceBackend& FixedBackendProvider::backend(Role role) {
  auto it = backends_.find(role);
  if (it == backends_.end() || !it->second) {
    throw ConfigError("no backend for role " + std::string(to_string(role)));
  }
  return *it->second;
}

Orchestrator::Orchestrator(LoopConfig cfg, std::filesystem::path run_dir, BackendProvider& backends)
    : cfg_(std::move(cfg)), run_dir_(std::move(run_dir)), backends_(backends) {
  cfg_.validate();
  if (!cfg_.templates_dir.empty()) templates_ = TemplateSet::load(cfg_.templates_dir);
}

std::filesystem::path Orchestrator::iteration_dir(int iteration) const {
  return run_dir_ / ("iter-" + std::to_string(iteration));
}

std::filesystem::path Orchestrator::role_dir(int iteration, Role role) const {
  return iteration_dir(iteration) / std::string(to_string(role));
}

std::uint64_t Orchestrator::request_seed(int iteration, const std::string& phase, int step, std::size_t index) const {
  const std::string key = std::to_string(cfg_.rng_seed) + "/" + std::to_string(iteration) + "/" + phase + "/" +
                          std::to_string(step) + "/" + std::to_string(index);
  return detail::fnv1a(key) & 0x7fffffffULL;
}

Orchestrator::Sampled Orchestrator::sample_proposals(int iteration, const std::string& phase, int round,
                                                     int prompts) {
  const auto& tmpl = templates_.get(Role::proposer);
  const auto& params = cfg_.sampling_for(Role::proposer);
  Sampled out;
  out.n = params.n;
  std::vector<GenerationRequest> requests;
  for (int j = 0; j < prompts; ++j) {
    const auto topic_index = (static_cast<std::size_t>(round - 1) * static_cast<std::size_t>(prompts) +
                              static_cast<std::size_t>(j)) %
                             cfg_.seed_topics.size();
    const Bindings b{{"content", cfg_.seed_topics[topic_index]}};
    requests.push_back(make_request(Role::proposer, tmpl, b, params, std::nullopt,
                                    request_seed(iteration, phase, round, static_cast<std::size_t>(j))));
    out.prompts.push_back(requests.back().messages.front().text);
  }
  for (auto& result : generate_all(backends_.backend(Role::proposer), requests)) {
    for (auto& text : result.texts) {
      out.parses.push_back(parse_proposal(text));
      out.responses.push_back(std::move(text));
    }
  }
  return out;
}

std::vector<Proposal> Orchestrator::sample_valid_proposals(int iteration, const std::string& phase,
                                                           std::size_t target) {
  // Exhausting this budget implies a valid rate below 1%.
  const std::size_t budget = std::max<std::size_t>(100, 100 * target);
  std::vector<Proposal> out;
  std::size_t sampled = 0;
  for (int round = 1; out.size() < target; ++round) {
    if (sampled >= budget) {
      throw QuotaExceeded("only " + std::to_string(out.size()) + " valid proposals in " + std::to_string(sampled) +
                          " samples (valid rate below 1%)");
    }
    auto s = sample_proposals(iteration, phase, round, cfg_.proposer_batch);
    for (auto& p : s.parses) {
      ++sampled;
      if (auto* valid = std::get_if<Proposal>(&p); valid && out.size() < target) out.push_back(std::move(*valid));
    }
  }
  return out;
}

std::vector<std::vector<std::string>> Orchestrator::coder_rollouts(const std::vector<const Proposal*>& proposals,
                                                                   int n, int iteration, const std::string& phase,
                                                                   int step) {
  if (proposals.empty()) return {};
  const auto& tmpl = templates_.get(Role::coder);
  SamplingParams params = cfg_.sampling_for(Role::coder);
  params.n = n;
  std::vector<GenerationRequest> requests;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    requests.push_back(make_request(Role::coder, tmpl, {{"content", proposals[i]->caption}}, params, std::nullopt,
                                    request_seed(iteration, phase + "/coder", step, i)));
  }
  std::vector<std::vector<std::string>> out;
  for (auto& r : generate_all(backends_.backend(Role::coder), requests)) out.push_back(std::move(r.texts));
  return out;
}

std::vector<std::vector<Orchestrator::Sample>> Orchestrator::render_rollouts(
    const std::vector<std::vector<std::string>>& texts, int iteration, const std::string& phase, int step) {
  std::vector<std::vector<Sample>> out(texts.size());
  std::vector<SvgSource> sources;
  std::vector<std::pair<std::size_t, std::size_t>> where;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t s = 0; s < texts[i].size(); ++s) {
      Sample sample;
      sample.text = texts[i][s];
      // Output without any SVG is scored like unparseable markup.
      sample.status = RenderStatus::syntax_error;
      sample.evidence.status = RenderStatus::syntax_error;
      const std::string id = "i" + std::to_string(iteration) + "-" + phase + "-s" + std::to_string(step) + "-p" +
                             std::to_string(i) + "-r" + std::to_string(s);
      if (auto src = extract_svg(sample.text, id)) {
        sources.push_back(std::move(*src));
        where.emplace_back(i, s);
      }
      out[i].push_back(std::move(sample));
    }
  }
  if (sources.empty()) return out;
  const auto outcomes = render_batch(sources, cfg_.render_limits);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    auto& sample = out[where[k].first][where[k].second];
    sample.status = outcomes[k].status;
    sample.evidence.status = outcomes[k].status;
    if (!outcomes[k].ok()) continue;
    sample.image_base64 = encode_png_base64(outcomes[k]);
    if (cfg_.dump_renders) {
      const auto dir = run_dir_ / "artifacts" / "renders" / ("iter-" + std::to_string(iteration) + "-" + phase + "-" +
                                                             step_name(step));
      std::filesystem::create_directories(dir);
      const auto& png = outcomes[k].png;
      write_file_atomic(dir / (sources[k].origin + ".png"), std::string(png.begin(), png.end()));
    }
  }
  return out;
}

void Orchestrator::collect_votes(const std::vector<const Proposal*>& proposals,
                                 std::vector<std::vector<Sample>>& samples, int iteration, const std::string& phase,
                                 int step) {
  const auto& tmpl = templates_.get(Role::solver);
  std::vector<GenerationRequest> requests;
  std::vector<std::pair<std::size_t, std::size_t>> where;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t s = 0; s < samples[i].size(); ++s) {
      const auto& sample = samples[i][s];
      if (sample.status != RenderStatus::ok) continue;
      for (const std::string* q : {&proposals[i]->easy_question, &proposals[i]->hard_question}) {
        const Bindings b{{"question", *q}, {"image", std::string(kImageSentinel)}};
        requests.push_back(make_request(Role::solver, tmpl, b, cfg_.evidence, sample.image_base64,
                                        request_seed(iteration, phase + "/evidence", step, requests.size())));
      }
      where.emplace_back(i, s);
    }
  }
  if (requests.empty()) return;
  const auto results = generate_all(backends_.backend(Role::solver), requests);
  for (std::size_t k = 0; k < where.size(); ++k) {
    auto& ev = samples[where[k].first][where[k].second].evidence;
    for (const auto& t : results[2 * k].texts) ev.easy_votes.push_back(extract_boxed(t));
    for (const auto& t : results[2 * k + 1].texts) ev.hard_votes.push_back(extract_boxed(t));
  }
}

TrainingBatch Orchestrator::proposer_step(int iteration, int step) {
  const std::string phase = kPhaseProposer;
  auto sampled = sample_proposals(iteration, phase, step, cfg_.proposer_batch);

  std::vector<const Proposal*> valid;
  std::vector<std::size_t> valid_index(sampled.parses.size(), SIZE_MAX);
  for (std::size_t k = 0; k < sampled.parses.size(); ++k) {
    if (const auto* p = std::get_if<Proposal>(&sampled.parses[k])) {
      valid_index[k] = valid.size();
      valid.push_back(p);
    }
  }
  const auto texts = coder_rollouts(valid, cfg_.sampling_for(Role::coder).n, iteration, phase, step);
  auto samples = render_rollouts(texts, iteration, phase, step);
  collect_votes(valid, samples, iteration, phase, step);

  // Batch statistics over the format-valid proposals.
  const std::size_t m = valid.size();
  std::vector<std::string> captions, easy_qs, hard_qs;
  std::map<ContentType, std::size_t> type_counts;
  for (const auto* p : valid) {
    captions.push_back(p->caption);
    easy_qs.push_back(p->easy_question);
    hard_qs.push_back(p->hard_question);
    ++type_counts[p->content_type];
  }
  const auto s_cap = shares_for(captions, cfg_.cluster_threshold);
  const auto s_eq = shares_for(easy_qs, cfg_.cluster_threshold);
  const auto s_hq = shares_for(hard_qs, cfg_.cluster_threshold);

  TrainingBatch batch{Role::proposer, iteration, step, {}};
  std::size_t coder_samples = 0, rendered = 0;
  std::vector<double> solv;
  for (std::size_t k = 0; k < sampled.parses.size(); ++k) {
    const std::size_t group = k / static_cast<std::size_t>(sampled.n);
    if (k % static_cast<std::size_t>(sampled.n) == 0 && k > 0) {
      assign_advantages(batch.records, batch.records.size() - static_cast<std::size_t>(sampled.n), cfg_.grpo);
    }
    std::vector<ImageEvidence> evidences;
    BatchContext ctx;
    nlohmann::json renders = nlohmann::json::array();
    if (valid_index[k] != SIZE_MAX) {
      const std::size_t v = valid_index[k];
      for (const auto& sample : samples[v]) {
        evidences.push_back(sample.evidence);
        renders.push_back(to_string(sample.status));
        ++coder_samples;
        if (sample.status == RenderStatus::ok) {
          ++rendered;
          solv.push_back(solvability(sample.evidence, valid[v]->easy_answer));
        }
      }
      ctx.f_t = static_cast<double>(type_counts[valid[v]->content_type]) / static_cast<double>(m);
      ctx.s_cap = s_cap[v];
      ctx.s_eq = s_eq[v];
      ctx.s_hq = s_hq[v];
      ctx.m = m;
    }
    const auto breakdown = proposer_reward(sampled.parses[k], evidences, ctx, cfg_.reward);
    TrainingRecord rec;
    rec.group_id = "i" + std::to_string(iteration) + "-proposer-s" + std::to_string(step) + "-g" +
                   std::to_string(group);
    rec.prompt = sampled.prompts[group];
    rec.response = sampled.responses[k];
    rec.reward = breakdown.total;
    rec.breakdown = breakdown;
    if (const auto* err = std::get_if<FormatError>(&sampled.parses[k])) {
      rec.breakdown["format_error"] = err->message();
    } else {
      rec.breakdown["renders"] = renders;
      rec.breakdown["batch"] = {{"f_t", ctx.f_t}, {"s_cap", ctx.s_cap}, {"s_eq", ctx.s_eq}, {"s_hq", ctx.s_hq},
                                {"m", ctx.m}};
    }
    batch.records.push_back(std::move(rec));
  }
  if (!batch.records.empty()) {
    assign_advantages(batch.records, batch.records.size() - static_cast<std::size_t>(sampled.n), cfg_.grpo);
  }

  MetricsRecord metrics;
  metrics.iteration = iteration;
  metrics.step = step;
  metrics.role = Role::proposer;
  if (coder_samples > 0) {
    metrics.render_success_rate = static_cast<double>(rendered) / static_cast<double>(coder_samples);
  }
  metrics.solvability_rate = mean_of(solv);
  metrics.mean_reward = mean_reward(batch);
  metrics.records = batch.records.size();
  persist_batch(batch, metrics);
  spdlog::info("iter {} proposer step {}: {} records, {} valid, mean reward {:.4f}", iteration, step,
               batch.records.size(), m, metrics.mean_reward);
  return batch;
}

DatasetRef Orchestrator::generate_coder_dataset(int iteration) {
  const auto proposals =
      sample_valid_proposals(iteration, kPhaseCoderData, static_cast<std::size_t>(cfg_.coder_dataset_size));
  std::vector<const Proposal*> ptrs;
  for (const auto& p : proposals) ptrs.push_back(&p);
  const int r = cfg_.sampling_for(Role::coder).n;
  const auto texts = coder_rollouts(ptrs, r, iteration, kPhaseCoderData, 1);
  const auto samples = render_rollouts(texts, iteration, kPhaseCoderData, 1);

  std::vector<CoderCandidate> candidates;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto ok = std::count_if(samples[i].begin(), samples[i].end(),
                                  [](const Sample& s) { return s.status == RenderStatus::ok; });
    candidates.push_back({proposals[i], static_cast<double>(ok) / static_cast<double>(r), static_cast<std::size_t>(r)});
  }
  DatasetRef ref;
  const auto kept = filter_coder(candidates, &ref.report);
  std::vector<nlohmann::json> rows;
  for (const auto& c : kept) {
    auto j = coder_candidate_to_json(c);
    j["schema_version"] = kSchemaVersion;
    rows.push_back(std::move(j));
  }
  const auto dir = iteration_dir(iteration) / "datasets";
  std::filesystem::create_directories(dir);
  ref.path = dir / "coder.jsonl";
  ref.records = rows.size();
  write_file_atomic(dir / "coder.filter.json", nlohmann::json(ref.report).dump(2) + "\n");
  write_file_atomic(ref.path, to_jsonl(rows));
  spdlog::info("iter {} coder dataset: kept {} of {}", iteration, ref.report.kept, ref.report.input_count);
  return ref;
}

TrainingBatch Orchestrator::coder_step(int iteration, int step, const std::filesystem::path& dataset) {
  const auto rows = load_dataset(dataset);
  std::vector<Proposal> picked;
  for (int j = 0; j < cfg_.coder_batch; ++j) {
    const auto idx = (static_cast<std::size_t>(step - 1) * static_cast<std::size_t>(cfg_.coder_batch) +
                      static_cast<std::size_t>(j)) %
                     rows.size();
    picked.push_back(coder_candidate_from_json(rows[idx]).proposal);
  }
  std::vector<const Proposal*> ptrs;
  for (const auto& p : picked) ptrs.push_back(&p);
  const auto texts = coder_rollouts(ptrs, cfg_.sampling_for(Role::coder).n, iteration, kPhaseCoder, step);
  auto samples = render_rollouts(texts, iteration, kPhaseCoder, step);
  collect_votes(ptrs, samples, iteration, kPhaseCoder, step);

  const auto& tmpl = templates_.get(Role::coder);
  TrainingBatch batch{Role::coder, iteration, step, {}};
  std::size_t total = 0, rendered = 0;
  std::vector<double> solv;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const std::size_t begin = batch.records.size();
    const std::string prompt = render_prompt(tmpl, {{"content", picked[i].caption}});
    for (const auto& sample : samples[i]) {
      const auto b = coder_reward(sample.evidence, picked[i].easy_answer, cfg_.reward);
      ++total;
      if (sample.status == RenderStatus::ok) {
        ++rendered;
        solv.push_back(b.r_solv);
      }
      TrainingRecord rec;
      rec.group_id = "i" + std::to_string(iteration) + "-coder-s" + std::to_string(step) + "-g" + std::to_string(i);
      rec.prompt = prompt;
      rec.response = sample.text;
      rec.reward = b.total;
      rec.breakdown = b;
      rec.breakdown["status"] = to_string(sample.status);
      batch.records.push_back(std::move(rec));
    }
    assign_advantages(batch.records, begin, cfg_.grpo);
  }
  MetricsRecord metrics;
  metrics.iteration = iteration;
  metrics.step = step;
  metrics.role = Role::coder;
  if (total > 0) metrics.render_success_rate = static_cast<double>(rendered) / static_cast<double>(total);
  metrics.solvability_rate = mean_of(solv);
  metrics.mean_reward = mean_reward(batch);
  metrics.records = batch.records.size();
  persist_batch(batch, metrics);
  spdlog::info("iter {} coder step {}: {} records, render rate {:.3f}", iteration, step, batch.records.size(),
               metrics.render_success_rate.value_or(0.0));
  return batch;
}

DatasetRef Orchestrator::generate_solver_dataset(int iteration) {
  const auto proposals = sample_valid_proposals(iteration, kPhaseSolverData,
                                                static_cast<std::size_t>(cfg_.effective_solver_dataset_size()));
  std::vector<const Proposal*> ptrs;
  for (const auto& p : proposals) ptrs.push_back(&p);
  const auto texts = coder_rollouts(ptrs, 1, iteration, kPhaseSolverData, 1);
  auto samples = render_rollouts(texts, iteration, kPhaseSolverData, 1);
  collect_votes(ptrs, samples, iteration, kPhaseSolverData, 1);

  std::vector<SolverCandidate> candidates;
  std::size_t unrendered = 0;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& sample = samples[i].front();
    if (sample.status != RenderStatus::ok) {
      ++unrendered;
      continue;
    }
    SolverCandidate c;
    c.proposal = proposals[i];
    c.image_base64 = sample.image_base64;
    c.easy_accuracy = solvability(sample.evidence, proposals[i].easy_answer);
    c.hard_accuracy = majority_vote(sample.evidence.hard_votes).consistency;
    candidates.push_back(std::move(c));
  }
  DatasetRef ref;
  const auto kept = filter_solver(candidates, &ref.report);
  std::vector<nlohmann::json> rows;
  for (const auto& c : kept) {
    auto j = solver_candidate_to_json(c);
    j["schema_version"] = kSchemaVersion;
    rows.push_back(std::move(j));
  }
  const auto dir = iteration_dir(iteration) / "datasets";
  std::filesystem::create_directories(dir);
  ref.path = dir / "solver.jsonl";
  ref.records = rows.size();
  nlohmann::json report = ref.report;
  report["unrendered"] = unrendered;
  write_file_atomic(dir / "solver.filter.json", report.dump(2) + "\n");
  write_file_atomic(ref.path, to_jsonl(rows));
  spdlog::info("iter {} solver dataset: {} rendered, kept {}", iteration, ref.report.input_count, ref.report.kept);
  return ref;
}

TrainingBatch Orchestrator::solver_step(int iteration, int step, const std::filesystem::path& dataset) {
  const auto rows = load_dataset(dataset);
  const auto& tmpl = templates_.get(Role::solver);
  std::vector<SolverCandidate> picked;
  std::vector<GenerationRequest> requests;
  for (int j = 0; j < cfg_.solver_batch; ++j) {
    const auto idx = (static_cast<std::size_t>(step - 1) * static_cast<std::size_t>(cfg_.solver_batch) +
                      static_cast<std::size_t>(j)) %
                     rows.size();
    picked.push_back(solver_candidate_from_json(rows[idx]));
    const Bindings b{{"question", picked.back().proposal.hard_question}, {"image", std::string(kImageSentinel)}};
    requests.push_back(make_request(Role::solver, tmpl, b, cfg_.sampling_for(Role::solver),
                                    picked.back().image_base64,
                                    request_seed(iteration, kPhaseSolver, step, static_cast<std::size_t>(j))));
  }
  const auto results = generate_all(backends_.backend(Role::solver), requests);

  TrainingBatch batch{Role::solver, iteration, step, {}};
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::vector<Vote> votes;
    for (const auto& t : results[i].texts) votes.push_back(extract_boxed(t));
    const auto vr = majority_vote(votes);
    if (vr.all_failed()) {
      ++skipped;
      spdlog::warn("iter {} solver step {}: group {} has no extractable answer; skipped", iteration, step, i);
      continue;
    }
    const std::size_t begin = batch.records.size();
    for (const auto& t : results[i].texts) {
      TrainingRecord rec;
      rec.group_id = "i" + std::to_string(iteration) + "-solver-s" + std::to_string(step) + "-g" + std::to_string(i);
      rec.prompt = requests[i].messages.front().text;
      rec.image_base64 = picked[i].image_base64;
      rec.response = t;
      rec.reward = solver_reward(t, *vr.silver, cfg_.reward);
      rec.breakdown = {{"silver", vr.silver->raw}, {"consistency", vr.consistency}};
      batch.records.push_back(std::move(rec));
    }
    assign_advantages(batch.records, begin, cfg_.grpo);
  }
  MetricsRecord metrics;
  metrics.iteration = iteration;
  metrics.step = step;
  metrics.role = Role::solver;
  metrics.mean_reward = mean_reward(batch);
  metrics.records = batch.records.size();
  metrics.skipped_groups = skipped;
  persist_batch(batch, metrics);
  spdlog::info("iter {} solver step {}: {} records, {} groups skipped", iteration, step, batch.records.size(),
               skipped);
  return batch;
}

void Orchestrator::persist_batch(const TrainingBatch& batch, const MetricsRecord& metrics) {
  const auto dir = role_dir(batch.iteration, batch.role);
  std::filesystem::create_directories(dir);
  std::vector<nlohmann::json> rows;
  for (const auto& r : batch.records) rows.push_back(record_to_json(batch, r));
  const auto s = step_name(batch.step);
  write_file_atomic(dir / ("batch-" + s + ".jsonl"), to_jsonl(rows));
  write_file_atomic(dir / ("metrics-" + s + ".json"), nlohmann::json(metrics).dump(2) + "\n");
  write_file_atomic(dir / ("batch-" + s + ".ready"), "");
  last_metrics_ = metrics;
}

void Orchestrator::await_acks(int iteration, Role role) {
  if (cfg_.trainer_ack == TrainerAck::none) return;
  const auto dir = role_dir(iteration, role);
  const auto deadline = std::chrono::steady_clock::now() + cfg_.ack_timeout;
  for (int step = 1; step <= cfg_.steps_per_role; ++step) {
    const auto marker = dir / ("ack-" + step_name(step));
    bool announced = false;
    while (!std::filesystem::exists(marker)) {
      if (!announced) {
        spdlog::info("waiting for trainer acknowledgment {}", marker.string());
        announced = true;
      }
      if (std::chrono::steady_clock::now() >= deadline) {
        throw AckTimeout("trainer did not acknowledge " + marker.string());
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
  }
}

IterationReport Orchestrator::run_iteration(int iteration) {
  if (iteration < 1) throw UsageError("iterations are numbered from 1");
  const auto idir = iteration_dir(iteration);
  std::filesystem::create_directories(idir);
  IterationReport report;
  report.iteration = iteration;
  const auto datasets = idir / "datasets";

  auto run_phase = [&](const char* name, const std::function<void()>& body) {
    const auto done = idir / (std::string(name) + ".done");
    if (std::filesystem::exists(done)) {
      report.phases_skipped.emplace_back(name);
      return;
    }
    backends_.refresh();
    body();
    write_file_atomic(done, "");
    report.phases_run.emplace_back(name);
  };
  auto run_steps = [&](Role role, const std::function<void(int)>& step_fn) {
    for (int step = 1; step <= cfg_.steps_per_role; ++step) {
      const auto dir = role_dir(iteration, role);
      const auto s = step_name(step);
      if (std::filesystem::exists(dir / ("batch-" + s + ".jsonl")) &&
          std::filesystem::exists(dir / ("metrics-" + s + ".json"))) {
        if (!std::filesystem::exists(dir / ("batch-" + s + ".ready"))) write_file_atomic(dir / ("batch-" + s + ".ready"), "");
        continue;
      }
      step_fn(step);
    }
    await_acks(iteration, role);
  };

  run_phase(kPhaseProposer, [&] { run_steps(Role::proposer, [&](int s) { proposer_step(iteration, s); }); });
  run_phase(kPhaseCoderData, [&] { generate_coder_dataset(iteration); });
  run_phase(kPhaseCoder, [&] {
    run_steps(Role::coder, [&](int s) { coder_step(iteration, s, datasets / "coder.jsonl"); });
  });
  run_phase(kPhaseSolverData, [&] { generate_solver_dataset(iteration); });
  run_phase(kPhaseSolver, [&] {
    run_steps(Role::solver, [&](int s) { solver_step(iteration, s, datasets / "solver.jsonl"); });
  });

  for (Role role : {Role::proposer, Role::coder, Role::solver}) {
    for (int step = 1; step <= cfg_.steps_per_role; ++step) {
      const auto path = role_dir(iteration, role) / ("metrics-" + step_name(step) + ".json");
      std::ifstream in(path);
      if (!in) continue;
      report.metrics.push_back(metrics_from_json(nlohmann::json::parse(in)));
    }
  }
  nlohmann::json summary = report;
  summary.erase("phases_run");
  summary.erase("phases_skipped");
  for (const char* name : {"coder", "solver"}) {
    std::ifstream in(datasets / (std::string(name) + ".filter.json"));
    if (in) summary["filter_reports"][name] = nlohmann::json::parse(in);
  }
  write_file_atomic(idir / "report.json", summary.dump(2) + "\n");
  return report;
}

std::vector<IterationReport> Orchestrator::evolve() {
  std::filesystem::create_directories(run_dir_);
  write_file_atomic(run_dir_ / "config.json", nlohmann::json(cfg_).dump(2) + "\n");
  std::vector<IterationReport> out;
  for (int k = 1; k <= cfg_.iterations; ++k) out.push_back(run_iteration(k));
  return out;
}

}  // namespace mmzero
