#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace mmzero::testkit {

// Chat-completions server on an ephemeral localhost port. The handler gets the
// parsed request body and the 1-based call number.
class MockOpenAi {
 public:
  using Handler = std::function<void(const nlohmann::json& body, int call, httplib::Response& res)>;

  explicit MockOpenAi(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      int call = 0;
      {
        std::lock_guard<std::mutex> lock(mu_);
        bodies_.push_back(body);
        headers_.push_back(req.get_header_value("Authorization"));
        call = static_cast<int>(bodies_.size());
      }
      handler_(body, call, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockOpenAi() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::vector<nlohmann::json> bodies() const {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth_headers() const {
    std::lock_guard<std::mutex> lock(mu_);
    return headers_;
  }

  // A well-formed response echoing `texts` with per-token logprobs.
  static nlohmann::json completion(const std::vector<std::string>& texts) {
    nlohmann::json choices = nlohmann::json::array();
    for (std::size_t i = 0; i < texts.size(); ++i) {
      choices.push_back({{"index", i},
                         {"message", {{"role", "assistant"}, {"content", texts[i]}}},
                         {"logprobs", {{"content", {{{"token", "a"}, {"logprob", -0.5}}, {{"token", "b"}, {"logprob", -0.25}}}}}}});
    }
    return {{"choices", choices}, {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 7}}}};
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::vector<nlohmann::json> bodies_;
  std::vector<std::string> headers_;
};

}  // namespace mmzero::testkit
