#include "mmzero/backend.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <thread>

#include "text_util.hpp"

namespace mmzero {

namespace {

constexpr char kFieldSep = '\x1f';
constexpr char kPairSep = '\x1e';

std::string hash_bindings(const Bindings& bindings, const std::optional<std::string>& image) {
  std::uint64_t h = detail::fnv1a("bindings");
  for (const auto& [k, v] : bindings) {
    h = detail::fnv1a(k, h);
    h = detail::fnv1a(std::string_view(&kPairSep, 1), h);
    h = detail::fnv1a(v, h);
    h = detail::fnv1a(std::string_view(&kFieldSep, 1), h);
  }
  if (image) {
    h = detail::fnv1a("image", h);
    h = detail::fnv1a(*image, h);
  }
  return detail::hex64(h);
}

}  // namespace

void GenerationRequest::validate() const {
  if (n < 1) throw UsageError("generation request needs n >= 1");
  if (!(temperature >= 0)) throw UsageError("temperature must be >= 0");
  if (!(top_p > 0 && top_p <= 1)) throw UsageError("top_p must be in (0, 1]");
  if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");
  if (messages.empty()) throw UsageError("generation request has no messages");
}

std::string GenerationRequest::fingerprint() const {
  std::string key;
  key += to_string(role);
  key += kFieldSep;
  key += template_hash;
  key += kFieldSep;
  key += bindings_hash;
  key += kFieldSep;
  key += std::to_string(n);
  if (seed) {
    key += kFieldSep;
    key += std::to_string(*seed);
  }
  return detail::hex64(detail::fnv1a(key));
}

SamplingParams default_sampling(Role role) {
  switch (role) {
    case Role::proposer: return {4, 1.0, 0.99, 2048};
    case Role::coder: return {4, 0.7, 0.95, 4096};
    case Role::solver: return {8, 1.0, 0.99, 4096};
    case Role::judge: return {1, 0.0, 1.0, 64};
  }
  return {};
}

SamplingParams default_evidence_sampling() { return {5, 1.0, 0.99, 4096}; }

void to_json(nlohmann::json& j, const SamplingParams& p) {
  j = {{"n", p.n}, {"temperature", p.temperature}, {"top_p", p.top_p}, {"max_tokens", p.max_tokens}};
}

void from_json(const nlohmann::json& j, SamplingParams& p) {
  p.n = j.value("n", p.n);
  p.temperature = j.value("temperature", p.temperature);
  p.top_p = j.value("top_p", p.top_p);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
}

GenerationRequest make_request(Role role, const PromptTemplate& tmpl, const Bindings& bindings,
                               const SamplingParams& params, std::optional<std::string> image_base64,
                               std::optional<std::uint64_t> seed) {
  GenerationRequest req;
  req.role = role;
  req.template_hash = tmpl.hash();
  req.bindings_hash = hash_bindings(bindings, image_base64);
  req.messages.push_back({Message::Sender::user, render_prompt(tmpl, bindings), std::move(image_base64)});
  req.n = params.n;
  req.temperature = params.temperature;
  req.top_p = params.top_p;
  req.max_tokens = params.max_tokens;
  req.seed = seed;
  req.validate();
  return req;
}

void BackendEndpoint::validate() const {
  if (base_url.empty()) throw ConfigError("endpoint base_url is empty");
  if (max_in_flight < 1) throw ConfigError("endpoint max_in_flight must be >= 1");
  if (max_attempts < 1) throw ConfigError("endpoint max_attempts must be >= 1");
  if (request_timeout.count() <= 0) throw ConfigError("endpoint request_timeout must be positive");
}

void to_json(nlohmann::json& j, const BackendEndpoint& e) {
  j = {{"base_url", e.base_url},
       {"model_name", e.model_name},
       {"api_key_env", e.api_key_env},
       {"max_in_flight", e.max_in_flight},
       {"request_timeout_s", e.request_timeout.count()},
       {"max_attempts", e.max_attempts},
       {"initial_backoff_ms", e.initial_backoff.count()}};
}

void from_json(const nlohmann::json& j, BackendEndpoint& e) {
  e.base_url = j.value("base_url", e.base_url);
  e.model_name = j.value("model_name", e.model_name);
  e.api_key_env = j.value("api_key_env", e.api_key_env);
  e.max_in_flight = j.value("max_in_flight", e.max_in_flight);
  e.request_timeout = std::chrono::seconds(j.value("request_timeout_s", e.request_timeout.count()));
  e.max_attempts = j.value("max_attempts", e.max_attempts);
  e.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", e.initial_backoff.count()));
}

BackendError::BackendError(Kind kind, std::string message, int http_status)
    : Error(std::string(to_string(kind)) + ": " + message), kind_(kind), http_status_(http_status) {}

std::string_view to_string(BackendError::Kind k) {
  switch (k) {
    case BackendError::Kind::transport: return "transport";
    case BackendError::Kind::http_status: return "http_status";
    case BackendError::Kind::malformed_response: return "malformed_response";
    case BackendError::Kind::timeout: return "timeout";
  }
  return "transport";
}

void AdmissionGate::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void AdmissionGate::release() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

Transcript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transcript " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("transcript " + path.string() + " is not valid JSON: " + e.what());
  }
  const auto& entries = j.contains("responses") ? j.at("responses") : j;
  return entries.get<Transcript>();
}

void save_transcript(const Transcript& t, const std::filesystem::path& path) {
  const nlohmann::json j = {{"schema_version", 1}, {"responses", t}};
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << j.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

ScriptedBackend::ScriptedBackend(Transcript transcript, int max_in_flight)
    : transcript_(std::move(transcript)), max_in_flight_(max_in_flight) {}

GenerationResult ScriptedBackend::generate(const GenerationRequest& request) {
  request.validate();
  const auto fp = request.fingerprint();
  auto it = transcript_.find(fp);
  if (it == transcript_.end()) throw UnscriptedRequest(fp);
  if (static_cast<int>(it->second.size()) != request.n) {
    throw BackendError(BackendError::Kind::malformed_response,
                       "scripted entry " + fp + " has " + std::to_string(it->second.size()) + " texts, expected " +
                           std::to_string(request.n));
  }
  GenerationResult r;
  r.texts = it->second;
  return r;
}

GenerationResult RecordingBackend::generate(const GenerationRequest& request) {
  auto result = inner_->generate(request);
  std::lock_guard lock(mu_);
  recorded_[request.fingerprint()] = result.texts;
  return result;
}

Transcript RecordingBackend::transcript() const {
  std::lock_guard lock(mu_);
  return recorded_;
}

std::shared_ptr<InferenceBackend> make_backend(const BackendEndpoint& endpoint) {
  endpoint.validate();
  constexpr std::string_view kScripted = "scripted:";
  if (endpoint.base_url.starts_with(kScripted)) {
    return std::make_shared<ScriptedBackend>(load_transcript(endpoint.base_url.substr(kScripted.size())),
                                             endpoint.max_in_flight);
  }
  return std::make_shared<HttpBackend>(endpoint);
}

std::vector<GroupSlot> generate_group(InferenceBackend& backend, std::span<const GenerationRequest> requests) {
  if (requests.empty()) throw UsageError("generate_group needs at least one request");
  std::vector<std::optional<GroupSlot>> slots(requests.size());
  std::vector<std::exception_ptr> failures(requests.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        slots[i].emplace(backend.generate(requests[i]));
      } catch (const BackendError& e) {
        slots[i].emplace(e);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const auto workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, backend.max_in_flight())), requests.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  std::vector<GroupSlot> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<GenerationResult> generate_all(InferenceBackend& backend, std::span<const GenerationRequest> requests) {
  auto slots = generate_group(backend, requests);
  std::vector<GenerationResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) {
    if (auto* err = std::get_if<BackendError>(&s)) throw *err;
    out.push_back(std::move(std::get<GenerationResult>(s)));
  }
  return out;
}

bool judge_equivalence(std::string_view question, std::string_view gold, std::string_view model_answer,
                       InferenceBackend& backend, const PromptTemplate& judge_template, int max_tokens) {
  const Bindings b{{"question", std::string(question)}, {"gold", std::string(gold)},
                   {"model_answer", std::string(model_answer)}};
  const auto req = make_request(Role::judge, judge_template, b, {1, 0.0, 1.0, max_tokens});
  const auto result = backend.generate(req);
  if (result.texts.empty()) return false;
  const std::string& reply = result.texts.front();
  std::size_t i = 0;
  while (i < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[i]))) ++i;
  std::size_t j = i;
  while (j < reply.size() && std::isalpha(static_cast<unsigned char>(reply[j]))) ++j;
  return detail::ascii_lower(std::string_view(reply).substr(i, j - i)) == "yes";
}

}  // namespace mmzero
