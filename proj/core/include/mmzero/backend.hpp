#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmzero/error.hpp"
#include "mmzero/prompt_template.hpp"

namespace mmzero {

struct Message {
  enum class Sender { system, user };
  Sender sender = Sender::user;
  std::string text;
  std::optional<std::string> image_base64;  // PNG
};

struct GenerationRequest {
  Role role = Role::proposer;
  std::string template_hash;
  std::string bindings_hash;  // covers the bindings and any attached image
  std::vector<Message> messages;
  int n = 1;
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 2048;
  std::optional<std::uint64_t> seed;

  // Throws UsageError unless n >= 1, temperature >= 0 and top_p in (0, 1].
  void validate() const;
  // Stable hex key over role, template hash, bindings hash, n and seed.
  std::string fingerprint() const;
};

struct SamplingParams {
  int n = 1;
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 2048;
};

// Rollout defaults per role; `evidence` is the solver sampling used to score
// proposer and coder outputs.
SamplingParams default_sampling(Role role);
SamplingParams default_evidence_sampling();

void to_json(nlohmann::json& j, const SamplingParams& p);
void from_json(const nlohmann::json& j, SamplingParams& p);

// Renders the role template with `bindings` into a single user message, with
// the image attached when given, and fills in the fingerprint hashes.
GenerationRequest make_request(Role role, const PromptTemplate& tmpl, const Bindings& bindings,
                               const SamplingParams& params, std::optional<std::string> image_base64 = std::nullopt,
                               std::optional<std::uint64_t> seed = std::nullopt);

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct GenerationResult {
  std::vector<std::string> texts;
  std::optional<std::vector<double>> logprobs;  // one sequence log-probability per text
  TokenUsage usage;
  std::chrono::milliseconds latency{0};
};

struct BackendEndpoint {
  // http(s)://host[:port][/prefix] for OpenAI-compatible servers, or
  // scripted:<path-to-transcript.json> for replay.
  std::string base_url;
  std::string model_name;
  std::string api_key_env;  // name of the environment variable holding the key
  int max_in_flight = 8;
  std::chrono::seconds request_timeout{600};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};

  void validate() const;
};

void to_json(nlohmann::json& j, const BackendEndpoint& e);
void from_json(const nlohmann::json& j, BackendEndpoint& e);

class BackendError : public Error {
 public:
  enum class Kind { transport, http_status, malformed_response, timeout };

  BackendError(Kind kind, std::string message, int http_status = 0);

  Kind kind() const { return kind_; }
  int http_status() const { return http_status_; }

 private:
  Kind kind_;
  int http_status_;
};

std::string_view to_string(BackendError::Kind k);

class UnscriptedRequest : public Error {
 public:
  explicit UnscriptedRequest(std::string fingerprint)
      : Error("no scripted response for request " + fingerprint), fingerprint_(std::move(fingerprint)) {}
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::string fingerprint_;
};

// Shareable across threads.
class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;
  // Returns exactly request.n texts or throws.
  virtual GenerationResult generate(const GenerationRequest& request) = 0;
  virtual int max_in_flight() const { return 1; }
};

// Bounded concurrency gate.
class AdmissionGate {
 public:
  explicit AdmissionGate(int limit) : free_(limit) {}
  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int free_;
};

// OpenAI-compatible chat-completions client with retries and in-flight limiting.
class HttpBackend : public InferenceBackend {
 public:
  explicit HttpBackend(BackendEndpoint endpoint);
  GenerationResult generate(const GenerationRequest& request) override;
  int max_in_flight() const override { return endpoint_.max_in_flight; }

  // The JSON body sent for a request (exposed for tests).
  nlohmann::json request_body(const GenerationRequest& request) const;
  // Parses a chat-completions response; throws BackendError{malformed_response}.
  static GenerationResult parse_response(const nlohmann::json& body, int n);

 private:
  GenerationResult attempt(const GenerationRequest& request);

  BackendEndpoint endpoint_;
  std::string api_key_;
  AdmissionGate gate_;
};

using Transcript = std::map<std::string, std::vector<std::string>>;

Transcript load_transcript(const std::filesystem::path& path);
void save_transcript(const Transcript& t, const std::filesystem::path& path);

// Replays canned responses keyed by request fingerprint.
class ScriptedBackend : public InferenceBackend {
 public:
  explicit ScriptedBackend(Transcript transcript, int max_in_flight = 4);
  GenerationResult generate(const GenerationRequest& request) override;
  int max_in_flight() const override { return max_in_flight_; }

 private:
  Transcript transcript_;
  int max_in_flight_;
};

// Forwards to another backend and records every response by fingerprint.
class RecordingBackend : public InferenceBackend {
 public:
  explicit RecordingBackend(std::shared_ptr<InferenceBackend> inner) : inner_(std::move(inner)) {}
  GenerationResult generate(const GenerationRequest& request) override;
  int max_in_flight() const override { return inner_->max_in_flight(); }

  Transcript transcript() const;

 private:
  std::shared_ptr<InferenceBackend> inner_;
  mutable std::mutex mu_;
  Transcript recorded_;
};

// HttpBackend or ScriptedBackend depending on the URL scheme.
std::shared_ptr<InferenceBackend> make_backend(const BackendEndpoint& endpoint);

using GroupSlot = std::variant<GenerationResult, BackendError>;

// Dispatches with at most backend.max_in_flight() calls outstanding. Result
// order matches request order. A BackendError fills only its own slot; any
// other exception is rethrown after all calls finish. Throws UsageError on an
// empty list.
std::vector<GroupSlot> generate_group(InferenceBackend& backend, std::span<const GenerationRequest> requests);

// Returns the results, or throws the first BackendError in request order.
std::vector<GenerationResult> generate_all(InferenceBackend& backend, std::span<const GenerationRequest> requests);

// Asks the judge whether `model_answer` matches `gold`; true iff the reply's
// first alphabetic token is "yes" (case-insensitive).
bool judge_equivalence(std::string_view question, std::string_view gold, std::string_view model_answer,
                       InferenceBackend& backend, const PromptTemplate& judge_template = default_template(Role::judge),
                       int max_tokens = 64);

}  // namespace mmzero
