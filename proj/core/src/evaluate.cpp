#include <fstream>
#include <iterator>

#include <spdlog/spdlog.h>

#include "mmzero/answer.hpp"
#include "mmzero/image.hpp"
#include "mmzero/orchestrator.hpp"

namespace mmzero {

namespace {

constexpr unsigned char kPngSignature[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= sizeof(kPngSignature) && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin());
}

// File path relative to the benchmark first, then inline base64.
std::string resolve_image(const std::string& image, const std::filesystem::path& base_dir) {
  std::error_code ec;
  const auto candidate = base_dir / image;
  if (image.size() < 4096 && std::filesystem::is_regular_file(candidate, ec)) {
    std::ifstream in(candidate, std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!is_png(bytes)) throw Error("image file " + candidate.string() + " is not a PNG");
    return base64_encode(bytes);
  }
  if (auto bytes = base64_decode(image); bytes && is_png(*bytes)) return image;
  throw Error("image not found: " + (image.size() > 80 ? image.substr(0, 80) + "..." : image));
}

}  // namespace

void to_json(nlohmann::json& j, const BenchmarkReport& r) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts) {
    nlohmann::json row = {{"id", v.id}, {"correct", v.correct}, {"answer", nullptr}};
    if (v.answer) row["answer"] = *v.answer;
    if (!v.error.empty()) row["error"] = v.error;
    verdicts.push_back(std::move(row));
  }
  j = {{"schema_version", kSchemaVersion},
       {"total", r.total},
       {"correct", r.correct},
       {"accuracy", r.accuracy},
       {"verdicts", verdicts}};
}

BenchmarkReport evaluate_benchmark(const LoopConfig& cfg, const std::filesystem::path& benchmark, bool use_judge,
                                   BackendProvider& backends) {
  const auto rows = read_jsonl(benchmark);
  const auto base_dir = benchmark.parent_path();
  const TemplateSet templates = cfg.templates_dir.empty() ? TemplateSet() : TemplateSet::load(cfg.templates_dir);
  SamplingParams params = cfg.sampling_for(Role::solver);
  params.n = 1;
  params.temperature = 0.0;
  params.top_p = 1.0;

  BenchmarkReport report;
  report.total = rows.size();
  report.verdicts.resize(rows.size());
  std::vector<GenerationRequest> requests;
  std::vector<std::size_t> request_row;
  std::vector<std::string> questions(rows.size()), golds(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& v = report.verdicts[i];
    try {
      const auto& row = rows[i];
      v.id = row.contains("id") ? (row["id"].is_string() ? row["id"].get<std::string>() : row["id"].dump())
                                : std::to_string(i);
      questions[i] = row.at("question").get<std::string>();
      golds[i] = row.at("gold").is_string() ? row.at("gold").get<std::string>() : row.at("gold").dump();
      const auto image = resolve_image(row.at("image").get<std::string>(), base_dir);
      const Bindings b{{"question", questions[i]}, {"image", std::string(kImageSentinel)}};
      requests.push_back(make_request(Role::solver, templates.get(Role::solver), b, params, image));
      request_row.push_back(i);
    } catch (const std::exception& e) {
      v.error = e.what();
    }
  }
  if (!requests.empty()) {
    auto slots = generate_group(backends.backend(Role::solver), requests);
    InferenceBackend* judge = use_judge ? &backends.backend(Role::judge) : nullptr;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const std::size_t i = request_row[k];
      auto& v = report.verdicts[i];
      if (auto* err = std::get_if<BackendError>(&slots[k])) {
        v.error = err->what();
        continue;
      }
      const auto& text = std::get<GenerationResult>(slots[k]).texts.front();
      const auto answer = extract_boxed(text);
      if (!answer) {
        v.error = "no boxed answer";
        continue;
      }
      v.answer = answer->raw;
      try {
        v.correct = judge ? judge_equivalence(questions[i], golds[i], answer->raw, *judge, templates.get(Role::judge))
                          : answers_equal(normalize(golds[i]), *answer);
      } catch (const BackendError& e) {
        v.error = e.what();
      }
    }
  }
  for (const auto& v : report.verdicts) {
    if (v.correct) ++report.correct;
    if (!v.error.empty()) spdlog::warn("benchmark record {}: {}", v.id, v.error);
  }
  report.accuracy = report.total ? static_cast<double>(report.correct) / static_cast<double>(report.total) : 0.0;
  return report;
}

}  // namespace mmzero
