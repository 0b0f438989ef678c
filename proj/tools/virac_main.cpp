#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "virac/backends.hpp"
#include "virac/environment.hpp"
#include "virac/errors.hpp"
#include "virac/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitBackend = 2;
constexpr int kExitIo = 3;

struct RunOptions {
  std::string scenario_path;
  std::string backend = "scripted";
  std::string endpoint;
  std::string model = "virac-agent";
  virac::RunConfig config;
};

void fill_backend(RunOptions& opt) {
  if (opt.backend == "remote") {
    if (opt.endpoint.empty()) {
      throw virac::InvalidInputError("--backend remote requires --endpoint");
    }
    opt.config.backend.kind = virac::BackendKind::Remote;
    opt.config.backend.endpoint = opt.endpoint;
  } else if (opt.backend == "scripted") {
    opt.config.backend.kind = virac::BackendKind::Scripted;
  } else {
    throw virac::InvalidInputError("--backend must be scripted or remote");
  }
  opt.config.backend.model = opt.model;
}

void print_run_summary(const virac::RunResult& result, const std::string& out_dir) {
  std::cout << result.stem << ": " << result.trajectory.size() << " samples, "
            << result.decision_count << " decisions";
  if (result.perception_fallbacks + result.decision_fallbacks + result.decompose_fallbacks >
      0) {
    std::cout << ", fallbacks (perception " << result.perception_fallbacks << ", decision "
              << result.decision_fallbacks << ", decompose " << result.decompose_fallbacks
              << ")";
  }
  if (result.truncated) {
    std::cout << ", truncated";
  }
  if (!out_dir.empty()) {
    std::cout << " -> " << out_dir;
  }
  std::cout << "\n";
}

int run_main(RunOptions& opt) {
  fill_backend(opt);
  const virac::Scenario scenario = virac::load_scenario_file(opt.scenario_path);
  const virac::RunResult result = virac::run(scenario, opt.config);
  print_run_summary(result, opt.config.out_dir);
  return kExitOk;
}

int replay_main(const std::string& scenario_path, const std::string& log_path,
                virac::RunConfig& config) {
  const virac::Scenario scenario = virac::load_scenario_file(scenario_path);
  const virac::RunResult result = virac::replay(scenario, log_path, config);
  print_run_summary(result, config.out_dir);
  return kExitOk;
}

int evaluate_main(const std::string& reference, const std::vector<std::string>& candidates,
                  double resample_hz, const std::string& out_dir) {
  const virac::EvaluateResult result =
      virac::evaluate_directories(reference, candidates, resample_hz, out_dir);
  std::cout << virac::render_report_text(result.report);
  return kExitOk;
}

int validate_main(const std::vector<std::string>& paths) {
  bool all_ok = true;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) {
      throw virac::IoError("cannot open scenario file: " + path);
    }
    const auto diagnostics = virac::validate_scenario(in);
    if (diagnostics.empty()) {
      std::cout << path << ": OK\n";
    } else {
      all_ok = false;
      for (const auto& d : diagnostics) {
        std::cout << path << ": " << d.field << ": " << d.message << "\n";
      }
    }
  }
  return all_ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic head-rotation agent simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate one scenario");
  run_cmd->add_option("--scenario", run_opt.scenario_path, "scenario JSON file")->required();
  run_cmd->add_option("--backend", run_opt.backend, "scripted|remote");
  run_cmd->add_option("--endpoint", run_opt.endpoint, "chat-completion URL for --backend remote");
  run_cmd->add_option("--model", run_opt.model, "model name sent to the endpoint");
  run_cmd->add_option("--tick-hz", run_opt.config.tick_hz, "simulation tick rate");
  run_cmd->add_option("--resample-hz", run_opt.config.resample_hz, "evaluation resample rate");
  run_cmd->add_option("--fov-h", run_opt.config.fov_h_deg, "horizontal FOV half angle, degrees");
  run_cmd->add_option("--fov-v", run_opt.config.fov_v_deg, "vertical FOV half angle, degrees");
  run_cmd->add_option("--omega-max", run_opt.config.max_angular_velocity,
                      "max head angular velocity, rad/s");
  run_cmd->add_option("--seed", run_opt.config.backend.seed, "seed echoed into the manifest");
  run_cmd->add_option("--out", run_opt.config.out_dir, "output directory");

  std::string replay_scenario, replay_log;
  virac::RunConfig replay_config;
  CLI::App* replay_cmd = app.add_subcommand("replay", "re-drive a recorded action log");
  replay_cmd->add_option("--scenario", replay_scenario, "scenario JSON file")->required();
  replay_cmd->add_option("--log", replay_log, "actions JSONL file")->required();
  replay_cmd->add_option("--tick-hz", replay_config.tick_hz, "simulation tick rate");
  replay_cmd->add_option("--omega-max", replay_config.max_angular_velocity,
                         "max head angular velocity, rad/s");
  replay_cmd->add_option("--out", replay_config.out_dir, "output directory");

  std::string eval_reference, eval_out;
  std::vector<std::string> eval_candidates;
  double eval_resample = 30.0;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "compare trajectory directories");
  eval_cmd->add_option("--reference", eval_reference, "reference trajectory directory")
      ->required();
  eval_cmd->add_option("--candidate", eval_candidates, "candidate trajectory directory")
      ->required();
  eval_cmd->add_option("--resample-hz", eval_resample, "resample rate before comparison");
  eval_cmd->add_option("--out", eval_out, "output directory for report files");

  std::vector<std::string> validate_paths;
  CLI::App* validate_cmd = app.add_subcommand("validate", "check scenario files");
  validate_cmd->add_option("scenarios", validate_paths, "scenario JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return run_main(run_opt);
    }
    if (replay_cmd->parsed()) {
      return replay_main(replay_scenario, replay_log, replay_config);
    }
    if (eval_cmd->parsed()) {
      return evaluate_main(eval_reference, eval_candidates, eval_resample, eval_out);
    }
    if (validate_cmd->parsed()) {
      return validate_main(validate_paths);
    }
  } catch (const virac::BackendError& ex) {
    std::cerr << "backend error: " << ex.what() << "\n";
    return kExitBackend;
  } catch (const virac::IoError& ex) {
    std::cerr << "i/o error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const virac::Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
