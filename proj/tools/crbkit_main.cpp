// crbkit command-line front end. All work goes through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "crbkit/crbkit.h"

namespace {

struct Flag {
  const char* name;  // command-line spelling
  const char* key;   // config key
  const char* help;
};

const std::vector<Flag> kFlags = {
    {"--input", "input", "FIM in matx format"},
    {"--model", "model", "built-in model: blind_channel | linear_gaussian"},
    {"--seed", "seed", "top-level random seed"},
    {"--count", "count", "number of sampled constraints"},
    {"--samples", "samples", "Monte-Carlo FIM samples (analyze with a model)"},
    {"--out", "out", "output directory"},
    {"--rank-tol", "rank_tol", "relative rank cutoff"},
    {"--psd-tol", "psd_tol", "absolute PSD slack, or 'auto'"},
    {"--margin-tol", "margin_tol", "absolute slack on theorem margins"},
    {"--theta", "theta", "evaluation point, comma separated"},
    {"--s-len", "s_len", "blind channel: data length"},
    {"--h-len", "h_len", "blind channel: channel length"},
    {"--noise-var", "noise_var", "noise variance"},
    {"--design", "design", "linear_gaussian: design matrix (matx)"},
    {"--workers", "workers", "worker threads"},
};

int fail(const char* stage, crbkit_status st) {
  std::fprintf(stderr, "crbkit: %s failed (%s): %s\n", stage, crbkit_status_name(st),
               crbkit_last_error());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cramer-Rao bounds under singular Fisher information"};
  app.set_version_flag("--version", crbkit_version());
  app.require_subcommand(1);

  std::string config_path;
  bool force_optimal = false;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "rank, pseudoinverse bound and optimal constraint for one FIM"},
      {"certify", "check the bound inequalities on random and built-in cases"},
      {"experiment", "trace of the bound over sampled minimum constraints"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "key = value config file (a run manifest works)");
    for (const auto& f : kFlags) {
      options[std::string(name) + f.key] = sub->add_option(f.name, values[f.key], f.help);
    }
    if (std::string(name) == "experiment") {
      sub->add_flag("--force-optimal", force_optimal, "make sample 0 the optimal constraint");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();

  crbkit_config* cfg = nullptr;
  if (auto st = crbkit_config_create(&cfg); st != CRBKIT_OK) return fail("config", st);
  int rc = 0;
  do {
    if (!config_path.empty()) {
      if (auto st = crbkit_config_load(cfg, config_path.c_str()); st != CRBKIT_OK) {
        rc = fail("config file", st);
        break;
      }
    }
    // Flags override file values.
    crbkit_config_set(cfg, "command", command.c_str());
    bool ok = true;
    for (const auto& f : kFlags) {
      if (options[command + f.key]->count() == 0) continue;
      if (auto st = crbkit_config_set(cfg, f.key, values[f.key].c_str()); st != CRBKIT_OK) {
        rc = fail(f.name, st);
        ok = false;
        break;
      }
    }
    if (!ok) break;
    if (force_optimal) crbkit_config_set(cfg, "force_optimal", "true");

    crbkit_result* result = nullptr;
    if (auto st = crbkit_run(cfg, &result); st != CRBKIT_OK) {
      rc = fail(command.c_str(), st);
      break;
    }
    rc = crbkit_result_exit_code(result);
    std::fputs(crbkit_result_summary(result), rc == 0 || rc == 4 ? stdout : stderr);
    if (rc != 0 && rc != 4) std::fputc('\n', stderr);
    crbkit_result_free(result);
  } while (false);

  crbkit_config_free(cfg);
  return rc;
}
