// riskstream: generate a drifting transaction stream, maintain windowed
// entity profiles, assemble dynamic risk features, train static/dynamic
// models, and compare them.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "riskstream/config.hpp"
#include "riskstream/errors.hpp"
#include "riskstream/pipeline.hpp"
#include "riskstream/rng.hpp"

namespace {

enum class LogLevel { off = 0, error = 1, info = 2, debug = 3 };

LogLevel g_log_level = LogLevel::info;

void log_info(const std::string& message) {
  if (g_log_level >= LogLevel::info) std::fprintf(stderr, "[riskstream] %s\n", message.c_str());
}

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  std::string log_level{"info"};
};

riskstream::RunConfig load_config(const CommonOptions& options) {
  riskstream::RunConfig config = riskstream::RunConfig::from_file(options.config_path);
  if (options.seed_override) {
    config.simulator.seed = *options.seed_override;
    config.model.seed = riskstream::derive_seed(config.simulator.seed, "train");
  }
  config.validate();
  return config;
}

std::filesystem::path output_dir(const CommonOptions& options,
                                 const riskstream::RunConfig& config) {
  return options.out_dir.empty() ? std::filesystem::path(config.output_dir)
                                 : std::filesystem::path(options.out_dir);
}

void apply_log_level(const CommonOptions& options) {
  if (options.log_level == "off") g_log_level = LogLevel::off;
  else if (options.log_level == "error") g_log_level = LogLevel::error;
  else if (options.log_level == "info") g_log_level = LogLevel::info;
  else if (options.log_level == "debug") g_log_level = LogLevel::debug;
  else throw riskstream::ConfigError("unknown --log-level " + options.log_level);
}

void add_common_options(CLI::App* cmd, CommonOptions& options, bool config_required = true) {
  auto* config_opt = cmd->add_option("--config", options.config_path, "Run configuration file");
  if (config_required) config_opt->required();
  cmd->add_option("--out", options.out_dir, "Output directory (default: config output_dir)");
  cmd->add_option("--seed-override", options.seed_override,
                  "Replace the configured stream seed");
  cmd->add_option("--log-level", options.log_level, "off|error|info|debug")
      ->default_val("info");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming fraud scoring with drift-adaptive dynamic risk features"};
  app.require_subcommand(1);

  CommonOptions options;
  std::string at_text;
  bool print_defaults = false;

  CLI::App* simulate = app.add_subcommand("simulate", "Generate the synthetic stream");
  add_common_options(simulate, options);

  CLI::App* profile_dump =
      app.add_subcommand("profile-dump", "Dump both window profiles at a point in time");
  add_common_options(profile_dump, options);
  profile_dump->add_option("--at", at_text,
                           "Dump time as a duration offset, e.g. 98d (default: horizon)");

  CLI::App* assemble =
      app.add_subcommand("assemble", "Build feature frames and the assembled dataset");
  add_common_options(assemble, options);

  CLI::App* train_cmd = app.add_subcommand("train", "Train the static and dynamic models");
  add_common_options(train_cmd, options);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score holdouts and write the summary");
  add_common_options(evaluate, options);

  CLI::App* run = app.add_subcommand("run", "Full pipeline: simulate through evaluate");
  add_common_options(run, options);

  CLI::App* config_cmd = app.add_subcommand("config", "Configuration helpers");
  add_common_options(config_cmd, options, /*config_required=*/false);
  config_cmd->add_flag("--print-defaults", print_defaults, "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    apply_log_level(options);

    if (config_cmd->parsed()) {
      if (print_defaults) {
        std::printf("%s\n", riskstream::RunConfig::defaults().to_json().c_str());
        return 0;
      }
      if (options.config_path.empty()) {
        throw riskstream::ConfigError("config: pass --print-defaults or --config to check");
      }
      load_config(options);
      std::printf("config ok\n");
      return 0;
    }

    const riskstream::RunConfig config = load_config(options);
    const std::filesystem::path out = output_dir(options, config);
    std::filesystem::create_directories(out);

    if (simulate->parsed()) {
      log_info("simulating stream into " + out.string());
      riskstream::run_simulate(config, out);
    } else if (profile_dump->parsed()) {
      std::optional<riskstream::Timestamp> at;
      if (!at_text.empty()) {
        at = riskstream::Timestamp{riskstream::parse_duration(at_text).seconds};
      }
      log_info("dumping window profiles");
      riskstream::run_profile_dump(config, out, at);
    } else if (assemble->parsed()) {
      log_info("assembling dynamic features");
      riskstream::run_assemble(config, out);
    } else if (train_cmd->parsed()) {
      log_info("training static and dynamic models");
      riskstream::run_train(config, out);
    } else if (evaluate->parsed()) {
      log_info("evaluating models");
      riskstream::run_evaluate(config, out);
    } else if (run->parsed()) {
      log_info("running full pipeline into " + out.string());
      riskstream::run_all(config, out);
    }
    log_info("done");
    return 0;
  } catch (const riskstream::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const riskstream::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
}
