// Experiment harness CLI. Links the shared C API only.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "hdcal.h"

namespace {

void usage(FILE* out) {
  std::fprintf(out,
               "usage: hdcal <kernel|classify|graph-recon|node-classify> [options]\n"
               "       hdcal compare <report_a.json> <report_b.json> [--tolerance T] [--out F]\n"
               "\n"
               "options for experiment subcommands:\n"
               "  --config FILE        key = value configuration file\n"
               "  --KEY VALUE          override any config key (e.g. --hw.family tanh,\n"
               "                       --hw.gain 4.0, --seed 7, --optimized true, --dim 2048)\n"
               "  --optimized          shorthand for --optimized true\n"
               "\n"
               "common keys: seed, repeats, dim, out_dir, optimized, data.root,\n"
               "  hw.family, hw.gain, hw.input_noise, hw.output_noise, hw.mode\n"
               "environment: HDC_HWCAL_DATA sets the default dataset root\n");
}

int exit_code_for(hdcal_status status) {
  switch (status) {
    case HDCAL_OK:
      return 0;
    case HDCAL_ERR_CONFIG:
    case HDCAL_ERR_INVALID_PARAMETER:
      return 2;
    case HDCAL_ERR_IO:
    case HDCAL_ERR_PARSE:
    case HDCAL_ERR_FORMAT:
    case HDCAL_ERR_INVALID_DATASET:
      return 3;
    case HDCAL_ERR_NUMERIC:
    case HDCAL_ERR_DIVERGED:
      return 4;
    default:
      return 1;
  }
}

int fail(hdcal_status status) {
  std::fprintf(stderr, "error: %s\n", hdcal_last_error());
  return exit_code_for(status);
}

int run_compare(int argc, char** argv) {
  if (argc < 2) {
    usage(stderr);
    return 2;
  }
  const char* report_a = argv[0];
  const char* report_b = argv[1];
  double tolerance = 0.0;
  const char* out_path = nullptr;
  for (int i = 2; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--tolerance" && i + 1 < argc) {
      tolerance = std::atof(argv[++i]);
    } else if (arg == "--out" && i + 1 < argc) {
      out_path = argv[++i];
    } else {
      std::fprintf(stderr, "error: unknown compare option '%s'\n", arg.c_str());
      return 2;
    }
  }
  char* delta = nullptr;
  const hdcal_status status = hdcal_compare(report_a, report_b, tolerance, out_path, &delta);
  if (status != HDCAL_OK) return fail(status);
  std::fputs(delta, stdout);
  hdcal_string_free(delta);
  return 0;
}

int run_experiment(const char* kind, int argc, char** argv) {
  hdcal_config* cfg = nullptr;
  hdcal_status status = hdcal_config_create(kind, &cfg);
  if (status != HDCAL_OK) return fail(status);

  for (int i = 0; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--", 0) != 0) {
      std::fprintf(stderr, "error: expected an option, got '%s'\n", arg.c_str());
      hdcal_config_free(cfg);
      return 2;
    }
    const std::string key = arg.substr(2);
    if (key == "help") {
      usage(stdout);
      hdcal_config_free(cfg);
      return 0;
    }
    if (key == "config") {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "error: --config needs a path\n");
        hdcal_config_free(cfg);
        return 2;
      }
      status = hdcal_config_load_file(cfg, argv[++i]);
      if (status != HDCAL_OK) {
        hdcal_config_free(cfg);
        return fail(status);
      }
      continue;
    }
    // boolean shorthand: a flag followed by another option or end of args
    const bool has_value = (i + 1 < argc) && std::strncmp(argv[i + 1], "--", 2) != 0;
    const char* value = has_value ? argv[++i] : "true";
    status = hdcal_config_set(cfg, key.c_str(), value);
    if (status != HDCAL_OK) {
      hdcal_config_free(cfg);
      return fail(status);
    }
  }

  char* report = nullptr;
  char* out_dir = nullptr;
  status = hdcal_run(cfg, &report, &out_dir);
  hdcal_config_free(cfg);
  if (status != HDCAL_OK) return fail(status);
  std::fputs(report, stdout);
  std::fprintf(stderr, "artifacts written to %s\n", out_dir);
  hdcal_string_free(report);
  hdcal_string_free(out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    usage(stderr);
    return 2;
  }
  const std::string cmd = argv[1];
  if (cmd == "--help" || cmd == "help") {
    usage(stdout);
    return 0;
  }
  if (cmd == "--version") {
    std::printf("hdcal %s\n", hdcal_version());
    return 0;
  }
  if (cmd == "compare") return run_compare(argc - 2, argv + 2);
  if (cmd == "kernel" || cmd == "classify" || cmd == "graph-recon" || cmd == "node-classify")
    return run_experiment(cmd.c_str(), argc - 2, argv + 2);
  std::fprintf(stderr, "error: unknown subcommand '%s'\n", cmd.c_str());
  usage(stderr);
  return 2;
}
