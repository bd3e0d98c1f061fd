#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "mmzero/config.hpp"
#include "mmzero/grpo.hpp"
#include "mmzero/orchestrator.hpp"
#include "mmzero/render.hpp"

namespace {

struct Globals {
  std::string config;
  std::string profile = "paper";
  std::optional<std::uint64_t> seed;
  std::string run_dir = "runs/default";
  std::string log_level = "info";
};

mmzero::LoopConfig load(const Globals& g) {
  std::optional<std::filesystem::path> path;
  if (!g.config.empty()) path = g.config;
  auto cfg = mmzero::load_config(path, g.profile);
  if (g.seed) cfg.rng_seed = *g.seed;
  return cfg;
}

std::unique_ptr<mmzero::EndpointBackendProvider> provider_for(const Globals& g, const mmzero::LoopConfig& cfg) {
  mmzero::EndpointBackendProvider::Reload reload;
  if (!g.config.empty()) {
    reload = [g] { return load(g).endpoints; };
  }
  return std::make_unique<mmzero::EndpointBackendProvider>(cfg.endpoints, reload);
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

std::string read_all(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mmzero::UsageError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tri-role self-evolution engine: proposer, coder and solver rollouts, rewards and GRPO batches"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--profile", g.profile, "Size profile")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--seed", g.seed, "Override rng_seed");
  app.add_option("--run-dir", g.run_dir, "Run directory");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");

  int iteration = 1;
  int step = 1;
  std::string dataset;

  auto* propose = app.add_subcommand("propose-step", "Run one proposer step and write its batch");
  auto* gen_coder = app.add_subcommand("gen-coder-data", "Build the filtered coder dataset");
  auto* coder = app.add_subcommand("coder-step", "Run one coder step on the coder dataset");
  auto* gen_solver = app.add_subcommand("gen-solver-data", "Build the filtered solver dataset");
  auto* solver = app.add_subcommand("solver-step", "Run one solver step on the solver dataset");
  for (auto* sub : {propose, gen_coder, coder, gen_solver, solver}) {
    sub->add_option("--iteration", iteration, "Iteration index (from 1)")->check(CLI::PositiveNumber);
  }
  for (auto* sub : {propose, coder, solver}) {
    sub->add_option("--step", step, "Step index (from 1)")->check(CLI::PositiveNumber);
  }
  for (auto* sub : {coder, solver}) {
    sub->add_option("--dataset", dataset, "Dataset JSONL (defaults to the iteration's dataset)");
  }

  auto* evolve = app.add_subcommand("evolve", "Run every iteration of the loop, resuming finished work");

  auto* eval = app.add_subcommand("eval", "Score the solver on a benchmark JSONL file");
  std::string benchmark;
  bool use_judge = false;
  std::string eval_out;
  eval->add_option("benchmark", benchmark, "Benchmark JSONL {id, image, question, gold}")->required();
  eval->add_flag("--judge", use_judge, "Score with the judge endpoint instead of exact match");
  eval->add_option("--out", eval_out, "Write the report here as well as to stdout");

  auto* render = app.add_subcommand("render", "Render one SVG to PNG");
  std::string svg_in = "-";
  std::string png_out;
  int timeout_ms = 30000;
  render->add_option("input", svg_in, "SVG file, or raw coder output; - for stdin");
  render->add_option("-o,--output", png_out, "PNG output path");
  render->add_option("--timeout-ms", timeout_ms, "Per-render timeout")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check-grpo", "Finite-difference gradient check on a toy softmax policy");
  int seeds = 20;
  std::uint64_t first_seed = 0;
  check->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  check->add_option("--first-seed", first_seed, "First seed");

  CLI11_PARSE(app, argc, argv);

  try {
    spdlog::set_default_logger(spdlog::stderr_logger_mt("mmzero"));
    spdlog::set_level(spdlog::level::from_str(g.log_level));

    if (render->parsed()) {
      const std::string raw = read_all(svg_in);
      auto src = mmzero::extract_svg(raw, svg_in);
      if (!src) {
        std::cerr << "no SVG found in input\n";
        return 1;
      }
      mmzero::RenderLimits limits;
      limits.timeout = std::chrono::milliseconds(timeout_ms);
      const auto out = mmzero::render_svg(*src, limits);
      if (out.ok() && !png_out.empty()) {
        mmzero::write_file_atomic(png_out, std::string(out.png.begin(), out.png.end()));
      }
      print_json({{"status", mmzero::to_string(out.status)},
                  {"width", out.width},
                  {"height", out.height},
                  {"elapsed_ms", out.elapsed.count()},
                  {"detail", out.detail}});
      return out.ok() ? 0 : 1;
    }
    if (check->parsed()) {
      double worst = 0;
      for (int i = 0; i < seeds; ++i) {
        const auto seed = first_seed + static_cast<std::uint64_t>(i);
        const auto r = mmzero::toy_policy_check(seed);
        worst = std::max(worst, r.max_rel_grad_error);
        std::cout << "seed " << seed << ": max_rel_error " << r.max_rel_grad_error << " params " << r.parameters
                  << " clip_active " << r.clip_active << " clip_inactive " << r.clip_inactive << '\n';
      }
      std::cout << "worst " << worst << (worst < 1e-4 ? " PASS" : " FAIL") << '\n';
      return worst < 1e-4 ? 0 : 1;
    }

    const auto cfg = load(g);
    auto provider = provider_for(g, cfg);

    if (eval->parsed()) {
      const auto report = mmzero::evaluate_benchmark(cfg, benchmark, use_judge, *provider);
      const nlohmann::json j = report;
      if (!eval_out.empty()) mmzero::write_file_atomic(eval_out, j.dump(2) + "\n");
      print_json(j);
      return 0;
    }

    mmzero::Orchestrator orch(cfg, g.run_dir, *provider);
    const auto dataset_or = [&](const char* name) {
      return dataset.empty() ? orch.iteration_dir(iteration) / "datasets" / name : std::filesystem::path(dataset);
    };
    if (propose->parsed()) {
      orch.proposer_step(iteration, step);
      print_json(orch.last_metrics());
    } else if (gen_coder->parsed()) {
      const auto ref = orch.generate_coder_dataset(iteration);
      print_json({{"path", ref.path.string()}, {"records", ref.records}, {"report", ref.report}});
    } else if (coder->parsed()) {
      orch.coder_step(iteration, step, dataset_or("coder.jsonl"));
      print_json(orch.last_metrics());
    } else if (gen_solver->parsed()) {
      const auto ref = orch.generate_solver_dataset(iteration);
      print_json({{"path", ref.path.string()}, {"records", ref.records}, {"report", ref.report}});
    } else if (solver->parsed()) {
      orch.solver_step(iteration, step, dataset_or("solver.jsonl"));
      print_json(orch.last_metrics());
    } else if (evolve->parsed()) {
      print_json(orch.evolve());
    }
    return 0;
  } catch (const mmzero::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mmzero::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
