#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "mmzero/backend.hpp"

namespace mmzero {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

class GateLease {
 public:
  explicit GateLease(AdmissionGate& g) : g_(g) { g_.acquire(); }
  ~GateLease() { g_.release(); }
  GateLease(const GateLease&) = delete;
  GateLease& operator=(const GateLease&) = delete;

 private:
  AdmissionGate& g_;
};

}  // namespace

HttpBackend::HttpBackend(BackendEndpoint endpoint)
    : endpoint_(std::move(endpoint)), gate_(std::max(1, endpoint_.max_in_flight)) {
  endpoint_.validate();
  split_url(endpoint_.base_url);
  if (!endpoint_.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint_.api_key_env.c_str())) api_key_ = key;
  }
}

nlohmann::json HttpBackend::request_body(const GenerationRequest& request) const {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    nlohmann::json msg;
    msg["role"] = m.sender == Message::Sender::system ? "system" : "user";
    if (m.image_base64) {
      msg["content"] = nlohmann::json::array(
          {{{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + *m.image_base64}}}},
           {{"type", "text"}, {"text", m.text}}});
    } else {
      msg["content"] = m.text;
    }
    messages.push_back(std::move(msg));
  }
  nlohmann::json body = {{"model", endpoint_.model_name},
                         {"messages", std::move(messages)},
                         {"n", request.n},
                         {"temperature", request.temperature},
                         {"top_p", request.top_p},
                         {"max_tokens", request.max_tokens},
                         {"logprobs", true}};
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

GenerationResult HttpBackend::parse_response(const nlohmann::json& body, int n) {
  auto malformed = [](const std::string& why) {
    return BackendError(BackendError::Kind::malformed_response, why);
  };
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array()) {
    throw malformed("response has no choices array");
  }
  const auto& choices = body["choices"];
  if (static_cast<int>(choices.size()) != n) {
    throw malformed("expected " + std::to_string(n) + " choices, got " + std::to_string(choices.size()));
  }
  GenerationResult r;
  r.texts.resize(static_cast<std::size_t>(n));
  std::vector<double> logprobs(static_cast<std::size_t>(n), 0.0);
  bool have_logprobs = true;
  std::vector<bool> filled(static_cast<std::size_t>(n), false);
  for (std::size_t pos = 0; pos < choices.size(); ++pos) {
    const auto& c = choices[pos];
    const std::size_t idx = c.contains("index") && c["index"].is_number_integer()
                                ? c["index"].get<std::size_t>()
                                : pos;
    if (idx >= r.texts.size() || filled[idx]) throw malformed("bad choice index");
    filled[idx] = true;
    const auto msg = c.find("message");
    if (msg == c.end() || !msg->is_object()) throw malformed("choice has no message");
    const auto content = msg->find("content");
    if (content == msg->end() || !content->is_string()) throw malformed("choice has no text content");
    r.texts[idx] = content->get<std::string>();
    const auto lp = c.find("logprobs");
    if (lp != c.end() && lp->is_object() && lp->contains("content") && (*lp)["content"].is_array()) {
      double sum = 0;
      for (const auto& tok : (*lp)["content"]) sum += tok.value("logprob", 0.0);
      logprobs[idx] = sum;
    } else {
      have_logprobs = false;
    }
  }
  if (have_logprobs) r.logprobs = std::move(logprobs);
  if (auto u = body.find("usage"); u != body.end() && u->is_object()) {
    r.usage.prompt_tokens = u->value("prompt_tokens", 0);
    r.usage.completion_tokens = u->value("completion_tokens", 0);
  }
  return r;
}

GenerationResult HttpBackend::attempt(const GenerationRequest& request) {
  const auto url = split_url(endpoint_.base_url);
  httplib::Client cli(url.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.request_timeout);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const auto start = std::chrono::steady_clock::now();
  auto res = cli.Post(url.path + "/chat/completions", headers, request_body(request).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && std::chrono::steady_clock::now() - start >= timeout);
    throw BackendError(timed_out ? BackendError::Kind::timeout : BackendError::Kind::transport,
                       httplib::to_string(err) + " (" + endpoint_.base_url + ")");
  }
  if (res->status != 200) {
    throw BackendError(BackendError::Kind::http_status,
                       "HTTP " + std::to_string(res->status) + " from " + endpoint_.base_url, res->status);
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(BackendError::Kind::malformed_response, e.what());
  }
  auto result = parse_response(body, request.n);
  result.latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  return result;
}

GenerationResult HttpBackend::generate(const GenerationRequest& request) {
  request.validate();
  GateLease lease(gate_);
  auto backoff = endpoint_.initial_backoff;
  for (int attempt_no = 1;; ++attempt_no) {
    try {
      return attempt(request);
    } catch (const BackendError& e) {
      const bool retryable = e.kind() == BackendError::Kind::transport || e.kind() == BackendError::Kind::timeout ||
                             (e.kind() == BackendError::Kind::http_status && retryable_status(e.http_status()));
      if (!retryable || attempt_no >= endpoint_.max_attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace mmzero
