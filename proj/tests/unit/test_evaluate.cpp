#include <gtest/gtest.h>

#include "mmzero/image.hpp"
#include "mmzero/orchestrator.hpp"
#include "support/test_data.hpp"

using namespace mmzero;

namespace {

// Answers each benchmark question with a fixed response.
class ScriptedSolver : public InferenceBackend {
 public:
  explicit ScriptedSolver(std::map<std::string, std::string> by_question) : by_question_(std::move(by_question)) {}
  GenerationResult generate(const GenerationRequest& r) override {
    EXPECT_EQ(r.temperature, 0.0);
    EXPECT_EQ(r.n, 1);
    EXPECT_TRUE(r.messages.front().image_base64.has_value());
    for (const auto& [q, resp] : by_question_) {
      if (r.messages.front().text.find(q) != std::string::npos) return GenerationResult{{resp}, {}, {}, {}};
    }
    throw BackendError(BackendError::Kind::transport, "unknown question");
  }

 private:
  std::map<std::string, std::string> by_question_;
};

class AlwaysYes : public InferenceBackend {
 public:
  GenerationResult generate(const GenerationRequest& r) override {
    return GenerationResult{std::vector<std::string>(static_cast<std::size_t>(r.n), "Yes"), {}, {}, {}};
  }
};

}  // namespace

TEST(EvaluateBenchmark, ExactMatchAgainstOracle) {
  const auto oracle = testkit::oracle("benchmark");
  const auto dir = testkit::scratch_dir("bench");
  const auto png = encode_png(RgbImage(2, 2, 128));
  write_file_atomic(dir / "img.png", std::string(png.begin(), png.end()));
  std::vector<nlohmann::json> rows;
  std::map<std::string, std::string> responses;
  int k = 0;
  for (const auto& r : oracle.at("records")) {
    const std::string image = (k++ % 2 == 0) ? "img.png" : base64_encode(png);
    rows.push_back({{"id", r.at("id")}, {"image", image}, {"question", r.at("question")}, {"gold", r.at("gold")}});
    responses[r.at("question")] = r.at("response");
  }
  write_file_atomic(dir / "bench.jsonl", to_jsonl(rows));
  FixedBackendProvider provider({{Role::solver, std::make_shared<ScriptedSolver>(responses)}});
  const auto report = evaluate_benchmark(profile_config("desk"), dir / "bench.jsonl", false, provider);
  EXPECT_EQ(report.total, oracle.at("total").get<std::size_t>());
  EXPECT_EQ(report.correct, oracle.at("correct").get<std::size_t>());
  EXPECT_DOUBLE_EQ(report.accuracy, oracle.at("accuracy").get<double>());
  for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
    EXPECT_EQ(report.verdicts[i].id, oracle.at("records")[i].at("id"));
    EXPECT_EQ(report.verdicts[i].correct, oracle.at("records")[i].at("correct").get<bool>()) << report.verdicts[i].id;
  }
  EXPECT_EQ(nlohmann::json(report).at("accuracy"), report.accuracy);
}

TEST(EvaluateBenchmark, MissingImageAndJudge) {
  const auto dir = testkit::scratch_dir("bench-missing");
  const auto png = encode_png(RgbImage(1, 1, 0));
  write_file_atomic(dir / "ok.png", std::string(png.begin(), png.end()));
  write_file_atomic(dir / "bench.jsonl",
                    to_jsonl({{{"id", "a"}, {"image", "ok.png"}, {"question", "Q one"}, {"gold", "blue"}},
                              {{"id", "b"}, {"image", "nope.png"}, {"question", "Q two"}, {"gold", "red"}}}));
  FixedBackendProvider provider(
      {{Role::solver, std::make_shared<ScriptedSolver>(std::map<std::string, std::string>{
                          {"Q one", "<think>x</think>\\boxed{navy}"}, {"Q two", "\\boxed{red}"}})},
       {Role::judge, std::make_shared<AlwaysYes>()}});
  const auto exact = evaluate_benchmark(profile_config("desk"), dir / "bench.jsonl", false, provider);
  EXPECT_EQ(exact.correct, 0u);
  EXPECT_FALSE(exact.verdicts[1].error.empty());
  const auto judged = evaluate_benchmark(profile_config("desk"), dir / "bench.jsonl", true, provider);
  EXPECT_EQ(judged.correct, 1u);
  EXPECT_DOUBLE_EQ(judged.accuracy, 0.5);
}
