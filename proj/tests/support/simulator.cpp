#include "simulator.hpp"

#include <regex>

#include "mmzero/proposal.hpp"

namespace mmzero::testkit {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int figure_id(const std::string& text) {
  static const std::regex re(R"(figure (\d+))");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return -1;
  return std::stoi(m[1]);
}

const char* kTopics[] = {"monthly rainfall", "ticket sales", "exam scores", "server load", "crop yield",
                         "river levels", "app downloads", "energy use"};

std::string proposer_text(std::uint64_t h) {
  const int id = static_cast<int>(h % 40);
  if (h % 7 == 3) {
    return "<caption>figure " + std::to_string(id) + " without the other fields</caption>";
  }
  Proposal p;
  p.content_type = kAllContentTypes[(h >> 8) % 7];
  p.caption = "A bar chart for figure " + std::to_string(id) + " showing " + kTopics[id % 8] +
              " across four quarters with labelled axes";
  p.easy_question = "What number is printed in the title of figure " + std::to_string(id) + "?";
  p.easy_answer = std::to_string(SimulatedModel::easy_answer(id));
  p.hard_question = "What is the total of all four bars in figure " + std::to_string(id) + "?";
  p.hard_answer = std::to_string(SimulatedModel::hard_answer(id));
  return "Here is my proposal.\n" + serialize_proposal(p);
}

std::string coder_text(int id, int k, int n) {
  const int broken = SimulatedModel::broken_samples(id, n);
  if ((k + id) % n < broken) {
    switch ((k + id) % 3) {
      case 0:
        return "```svg\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"100\" height=\"100\"><rect width=\"10\"></svg>\n```";
      case 1:
        return "I could not produce a drawing for this description.";
      default:
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"20000\" height=\"10\"><rect width=\"5\" height=\"5\"/></svg>";
    }
  }
  return "Sure.\n```svg\n" + bar_chart_svg(id) + "\n```";
}

std::string solver_text(const std::string& prompt, std::uint64_t seed, int k, int n) {
  const int id = figure_id(prompt);
  if (id < 0) return "<think>no figure</think> \\boxed{unknown}";
  const bool easy = prompt.find("title") != std::string::npos;
  const std::string think = "<think>Reading figure " + std::to_string(id) + ".</think> ";
  // Position of this sample in a per-request permutation.
  const int slot = static_cast<int>((static_cast<std::uint64_t>(k) + seed) % static_cast<std::uint64_t>(n));
  if (easy) {
    const int matches = SimulatedModel::easy_matches(id) * n / 5;
    if (slot < matches) return think + "\\boxed{" + std::to_string(SimulatedModel::easy_answer(id)) + "}";
    return think + "\\boxed{" + std::to_string(SimulatedModel::easy_answer(id) + 100 + slot) + "}";
  }
  const int agree = std::max(1, SimulatedModel::hard_agreement(id) * n / 5);
  const std::string right = std::to_string(SimulatedModel::hard_answer(id));
  if (slot < agree) {
    if (slot == 1) return "\\boxed{" + right + "}";  // missing reasoning block
    return think + "\\boxed{" + right + ".0}";
  }
  if (slot == n - 1 && n > 5) return think + "I am not sure.";
  return think + "\\boxed{" + std::to_string(SimulatedModel::hard_answer(id) + 1000 + slot) + "}";
}

}  // namespace

int SimulatedModel::hard_answer(int id) {
  int total = 0;
  for (int b = 0; b < 4; ++b) total += 10 + (id * 7 + b * 13) % 50;
  return total;
}

int SimulatedModel::broken_samples(int id, int n) {
  const int quarters = id % 5;  // 0..4 quarters of the group fail
  return (quarters * n + 2) / 4;
}

std::string bar_chart_svg(int id) {
  std::string s = R"(<svg xmlns="http://www.w3.org/2000/svg" width="320" height="240" viewBox="0 0 320 240">)";
  s += R"(<rect width="320" height="240" fill="#ffffff"/>)";
  s += R"(<text x="160" y="24" font-size="16" text-anchor="middle" fill="#222">Figure )" + std::to_string(id) +
       "</text>";
  s += R"(<line x1="40" y1="200" x2="300" y2="200" stroke="#000" stroke-width="2"/>)";
  s += R"(<line x1="40" y1="200" x2="40" y2="40" stroke="#000" stroke-width="2"/>)";
  const char* colors[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2"};
  for (int b = 0; b < 4; ++b) {
    const int v = 10 + (id * 7 + b * 13) % 50;
    const int x = 60 + b * 60;
    s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(200 - 2 * v) + "\" width=\"40\" height=\"" +
         std::to_string(2 * v) + "\" fill=\"" + colors[b] + "\"/>";
    s += "<text x=\"" + std::to_string(x + 20) + "\" y=\"" + std::to_string(195 - 2 * v) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + std::to_string(v) + "</text>";
    s += "<text x=\"" + std::to_string(x + 20) + "\" y=\"216\" font-size=\"11\" text-anchor=\"middle\">Q" +
         std::to_string(b + 1) + "</text>";
  }
  s += "</svg>";
  return s;
}

GenerationResult SimulatedModel::generate(const GenerationRequest& request) {
  request.validate();
  const std::string& prompt = request.messages.front().text;
  const std::uint64_t seed = request.seed.value_or(0);
  GenerationResult out;
  for (int k = 0; k < request.n; ++k) {
    switch (request.role) {
      case Role::proposer:
        out.texts.push_back(proposer_text(mix(seed * 31 + static_cast<std::uint64_t>(k))));
        break;
      case Role::coder:
        out.texts.push_back(coder_text(std::max(0, figure_id(prompt)), k, request.n));
        break;
      case Role::solver:
        out.texts.push_back(solver_text(prompt, seed, k, request.n));
        break;
      case Role::judge:
        out.texts.push_back("yes");
        break;
    }
  }
  return out;
}

RecordingSet::RecordingSet() {
  for (Role r : {Role::proposer, Role::coder, Role::solver, Role::judge}) {
    recorders[r] = std::make_shared<RecordingBackend>(model);
  }
}

FixedBackendProvider RecordingSet::provider() const {
  std::map<Role, std::shared_ptr<InferenceBackend>> m(recorders.begin(), recorders.end());
  return FixedBackendProvider(m);
}

std::filesystem::path write_scripted_fixture(const LoopConfig& cfg, const std::filesystem::path& scratch,
                                             const std::filesystem::path& fixture_dir) {
  std::filesystem::remove_all(scratch);
  std::filesystem::create_directories(fixture_dir);
  RecordingSet set;
  auto provider = set.provider();
  Orchestrator(cfg, scratch, provider).evolve();

  nlohmann::json endpoints = nlohmann::json::object();
  for (Role r : {Role::proposer, Role::coder, Role::solver}) {
    const auto path = std::filesystem::absolute(fixture_dir / (std::string(to_string(r)) + ".json"));
    save_transcript(set.recorders.at(r)->transcript(), path);
    endpoints[std::string(to_string(r))] = {{"base_url", "scripted:" + path.string()}};
  }
  const auto config_path = fixture_dir / "config.json";
  write_file_atomic(config_path, nlohmann::json{{"endpoints", endpoints}, {"rng_seed", cfg.rng_seed}}.dump(2) + "\n");
  return config_path;
}

}  // namespace mmzero::testkit
