// Command-line front end over the C API.
//
//   dpa <command> [--config FILE] [--section.key=value ...]
//   dpa --config artifacts/manifest.cfg      (re-runs a recorded command)
//
// Precedence for every key: defaults < config file < flags. ARTIFACT_DIR,
// when set, overrides run.out_dir from the file but not an explicit flag.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpagrpo/dpagrpo.h"

namespace {

int exit_code(dpa_status s) {
  switch (s) {
    case DPA_OK: return 0;
    case DPA_ERR_INVALID_ARGUMENT:
    case DPA_ERR_CONFIG:
    case DPA_ERR_IO: return 2;
    case DPA_ERR_NUMERIC: return 3;
    case DPA_ERR_INTERNAL: return 1;
  }
  return 1;
}

int report(dpa_status s, const std::string& context) {
  std::fprintf(stderr, "dpa: %s: %s: %s\n", context.c_str(), dpa_status_name(s), dpa_last_error());
  return exit_code(s);
}

struct ConfigHandle {
  dpa_config* ptr = nullptr;
  ~ConfigHandle() { dpa_config_destroy(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generator-verifier game lab: corpus generation, DPA-GRPO training, theory audits"};
  std::string command;
  std::string config_path;
  bool print_config = false;
  app.add_option("command", command, "gen-corpus | train-dpa | train-baseline | eval | audit-theory | track-ode");
  app.add_option("--config", config_path, "key-value config file");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  app.allow_extras();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ConfigHandle config;
  if (dpa_status s = dpa_config_create(&config.ptr); s != DPA_OK) return report(s, "config");
  if (!config_path.empty()) {
    if (dpa_status s = dpa_config_load_file(config.ptr, config_path.c_str()); s != DPA_OK) {
      return report(s, config_path);
    }
  }
  if (const char* dir = std::getenv("ARTIFACT_DIR"); dir != nullptr && *dir != '\0') {
    if (dpa_status s = dpa_config_set(config.ptr, "run.out_dir", dir); s != DPA_OK) return report(s, "ARTIFACT_DIR");
  }

  const std::vector<std::string> extras = app.remaining();
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0) {
      std::fprintf(stderr, "dpa: unexpected argument '%s'\n", arg.c_str());
      return 2;
    }
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < extras.size()) {
      value = extras[++i];
    } else {
      std::fprintf(stderr, "dpa: flag '--%s' needs a value\n", key.c_str());
      return 2;
    }
    if (dpa_status s = dpa_config_set(config.ptr, key.c_str(), value.c_str()); s != DPA_OK) {
      return report(s, "--" + key);
    }
  }
  if (!command.empty()) {
    if (dpa_status s = dpa_config_set(config.ptr, "run.command", command.c_str()); s != DPA_OK) {
      return report(s, "command");
    }
  }

  if (print_config) {
    std::size_t size = 0;
    dpa_config_to_text(config.ptr, nullptr, 0, &size);
    std::string text(size, '\0');
    if (dpa_status s = dpa_config_to_text(config.ptr, text.data(), text.size(), nullptr); s != DPA_OK) {
      return report(s, "config");
    }
    std::fputs(text.c_str(), stdout);
    return 0;
  }
  if (command.empty() && config_path.empty()) {
    std::fprintf(stderr, "dpa: a command or a --config naming one is required\n%s", app.help().c_str());
    return 2;
  }
  if (dpa_status s = dpa_run(config.ptr); s != DPA_OK) return report(s, command.empty() ? "run" : command);
  return 0;
}
