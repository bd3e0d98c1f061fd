#include "mmzero/config.hpp"

#include <fstream>

namespace mmzero {

namespace {

constexpr Role kRoles[] = {Role::proposer, Role::coder, Role::solver, Role::judge};

BackendEndpoint local_endpoint(Role r, int port) {
  BackendEndpoint e;
  e.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  e.model_name = std::string(to_string(r));
  return e;
}

template <typename T>
void overlay(const nlohmann::json& j, const char* key, T& target) {
  auto it = j.find(key);
  if (it == j.end()) return;
  nlohmann::json base = target;
  base.merge_patch(*it);
  target = base.get<T>();
}

void render_limits_to_json(nlohmann::json& j, const RenderLimits& l) {
  j = {{"max_aspect_ratio", l.max_aspect_ratio},
       {"max_dimension", l.max_dimension},
       {"timeout_ms", l.timeout.count()},
       {"workers", l.workers}};
}

void render_limits_from_json(const nlohmann::json& j, RenderLimits& l) {
  l.max_aspect_ratio = j.value("max_aspect_ratio", l.max_aspect_ratio);
  l.max_dimension = j.value("max_dimension", l.max_dimension);
  l.timeout = std::chrono::milliseconds(j.value("timeout_ms", l.timeout.count()));
  l.workers = j.value("workers", l.workers);
}

}  // namespace

std::vector<std::string> default_seed_topics() {
  return {"chart understanding", "object and shape recognition", "OCR and text in images",
          "visual mathematical reasoning", "visual geometry", "number problems"};
}

const SamplingParams& LoopConfig::sampling_for(Role r) const {
  auto it = sampling.find(r);
  if (it == sampling.end()) throw ConfigError("no sampling parameters for role " + std::string(to_string(r)));
  return it->second;
}

void LoopConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(steps_per_role, "steps_per_role");
  positive(iterations, "iterations");
  positive(coder_dataset_size, "coder_dataset_size");
  positive(proposer_batch, "proposer_batch");
  positive(coder_batch, "coder_batch");
  positive(solver_batch, "solver_batch");
  if (solver_dataset_size < 0) throw ConfigError("solver_dataset_size must be >= 0");
  if (seed_topics.empty()) throw ConfigError("seed_topics is empty");
  render_limits.validate();
  reward.validate();
  grpo.validate();
  for (Role r : {Role::proposer, Role::coder, Role::solver}) {
    auto it = endpoints.find(r);
    if (it == endpoints.end()) throw ConfigError("no endpoint for role " + std::string(to_string(r)));
    it->second.validate();
    const auto& s = sampling_for(r);
    if (s.n < 1 || s.temperature < 0 || !(s.top_p > 0 && s.top_p <= 1) || s.max_tokens < 1) {
      throw ConfigError("invalid sampling parameters for role " + std::string(to_string(r)));
    }
  }
  if (!(cluster_threshold > 0 && cluster_threshold <= 1)) throw ConfigError("cluster_threshold must be in (0, 1]");
  if (evidence.n < 1) throw ConfigError("evidence.n must be >= 1");
  if (ack_timeout.count() <= 0) throw ConfigError("ack_timeout_s must be positive");
}

void to_json(nlohmann::json& j, const LoopConfig& c) {
  nlohmann::json endpoints = nlohmann::json::object();
  for (const auto& [r, e] : c.endpoints) endpoints[std::string(to_string(r))] = e;
  nlohmann::json sampling = nlohmann::json::object();
  for (const auto& [r, s] : c.sampling) sampling[std::string(to_string(r))] = s;
  nlohmann::json limits;
  render_limits_to_json(limits, c.render_limits);
  j = {{"steps_per_role", c.steps_per_role},
       {"iterations", c.iterations},
       {"coder_dataset_size", c.coder_dataset_size},
       {"solver_dataset_size", c.solver_dataset_size},
       {"proposer_batch", c.proposer_batch},
       {"coder_batch", c.coder_batch},
       {"solver_batch", c.solver_batch},
       {"seed_topics", c.seed_topics},
       {"render_limits", limits},
       {"reward", c.reward},
       {"grpo", c.grpo},
       {"cluster_threshold", c.cluster_threshold},
       {"endpoints", endpoints},
       {"sampling", sampling},
       {"evidence", c.evidence},
       {"rng_seed", c.rng_seed},
       {"templates_dir", c.templates_dir},
       {"trainer_ack", c.trainer_ack == TrainerAck::none ? "none" : "ack"},
       {"ack_timeout_s", c.ack_timeout.count()},
       {"dump_renders", c.dump_renders}};
}

void from_json(const nlohmann::json& j, LoopConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    c.steps_per_role = j.value("steps_per_role", c.steps_per_role);
    c.iterations = j.value("iterations", c.iterations);
    c.coder_dataset_size = j.value("coder_dataset_size", c.coder_dataset_size);
    c.solver_dataset_size = j.value("solver_dataset_size", c.solver_dataset_size);
    c.proposer_batch = j.value("proposer_batch", c.proposer_batch);
    c.coder_batch = j.value("coder_batch", c.coder_batch);
    c.solver_batch = j.value("solver_batch", c.solver_batch);
    c.seed_topics = j.value("seed_topics", c.seed_topics);
    if (auto it = j.find("render_limits"); it != j.end()) render_limits_from_json(*it, c.render_limits);
    overlay(j, "reward", c.reward);
    overlay(j, "grpo", c.grpo);
    c.cluster_threshold = j.value("cluster_threshold", c.cluster_threshold);
    for (const char* group : {"endpoints", "sampling"}) {
      auto it = j.find(group);
      if (it == j.end()) continue;
      if (!it->is_object()) throw ConfigError(std::string(group) + " must be an object");
      for (const auto& [key, value] : it->items()) {
        const Role r = parse_role(key);
        nlohmann::json patch = nlohmann::json::object({{key, value}});
        if (std::string_view(group) == "endpoints") {
          overlay(patch, key.c_str(), c.endpoints[r]);
        } else {
          if (!c.sampling.contains(r)) c.sampling[r] = default_sampling(r);
          overlay(patch, key.c_str(), c.sampling[r]);
        }
      }
    }
    overlay(j, "evidence", c.evidence);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.templates_dir = j.value("templates_dir", c.templates_dir);
    if (auto it = j.find("trainer_ack"); it != j.end()) {
      const auto v = it->get<std::string>();
      if (v == "none") {
        c.trainer_ack = TrainerAck::none;
      } else if (v == "ack") {
        c.trainer_ack = TrainerAck::ack;
      } else {
        throw ConfigError("trainer_ack must be \"none\" or \"ack\"");
      }
    }
    c.ack_timeout = std::chrono::seconds(j.value("ack_timeout_s", c.ack_timeout.count()));
    c.dump_renders = j.value("dump_renders", c.dump_renders);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  }
}

LoopConfig profile_config(std::string_view profile) {
  LoopConfig c;
  c.seed_topics = default_seed_topics();
  int port = 8000;
  for (Role r : kRoles) {
    c.endpoints[r] = local_endpoint(r, port++);
    c.sampling[r] = default_sampling(r);
  }
  if (profile == "paper") return c;
  if (profile == "desk") {
    c.steps_per_role = 2;
    c.iterations = 1;
    c.coder_dataset_size = 10;
    c.proposer_batch = 3;
    c.coder_batch = 3;
    c.solver_batch = 3;
    c.trainer_ack = TrainerAck::none;
    return c;
  }
  throw ConfigError("unknown profile '" + std::string(profile) + "' (expected desk or paper)");
}

LoopConfig load_config(const std::optional<std::filesystem::path>& path, std::string_view profile) {
  LoopConfig c = profile_config(profile);
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config " + path->string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config " + path->string() + " is not valid JSON: " + e.what());
    }
    from_json(j, c);
  }
  c.validate();
  return c;
}

}  // namespace mmzero
