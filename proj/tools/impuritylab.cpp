// Experiment runner: impuritylab <kind> --config file.json
//                                 [--seed N] [--workers N] [--out dir]
// Exit codes: 0 success, 2 config error, 3 resource error, 4 numerical
// contract violation. Errors are reported as JSON on stderr.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "impuritylab/experiment.hpp"

namespace {

void report_error(const std::string& type, const std::string& message) {
  nlohmann::json err;
  err["error"]["type"] = type;
  err["error"]["message"] = message;
  std::fprintf(stderr, "%s\n", err.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"impurity-induced growth and scrambling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::string kind;

  for (const std::string& k : impuritylab::experiment_kinds) {
    CLI::App* sub = app.add_subcommand(k);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "override master seed");
    sub->add_option("--workers", workers, "worker threads (0 = auto)");
    sub->add_option("--out", out_dir, "output directory");
    sub->callback([&, k] { kind = k; });
  }

  CLI11_PARSE(app, argc, argv);

  nlohmann::json params;
  {
    std::ifstream in(config_path);
    if (!in) {
      report_error("config", "cannot open config file: " + config_path);
      return 2;
    }
    try {
      in >> params;
    } catch (const nlohmann::json::exception& e) {
      report_error("config", std::string("malformed JSON: ") + e.what());
      return 2;
    }
  }

  try {
    const impuritylab::ExperimentConfig cfg =
        impuritylab::parse_config(kind, params, seed, workers, out_dir);
    impuritylab::run_experiment(cfg);
  } catch (const impuritylab::invalid_spec_error& e) {
    report_error("config", e.what());
    return 2;
  } catch (const impuritylab::resource_error& e) {
    report_error("resource", e.what());
    return 3;
  } catch (const impuritylab::numeric_error& e) {
    report_error("numeric", e.what());
    return 4;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
