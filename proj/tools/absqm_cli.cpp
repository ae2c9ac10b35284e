#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "absqm/absqm.h"

int main(int argc, char** argv) {
  std::vector<std::string> commands;
  for (size_t i = 0; i < absqm_command_count(); ++i) commands.emplace_back(absqm_command_name(i));

  CLI::App app{"Batch runs of the absolute-process lab. Exit status: 0 pass, 2 config or io error, "
               "3 assertion failure, 4 numerical failure."};
  app.set_version_flag("--version", std::string(absqm_version()));

  std::string command, config, out;
  std::uint64_t seed = 0;
  std::string level = "info";
  app.add_option("command", command, "What to run")->required()->check(CLI::IsMember(commands));
  app.add_option("-c,--config", config, "JSON config file; built-in defaults when omitted")->check(CLI::ExistingFile);
  app.add_option("-o,--out", out, "Output directory")->required();
  auto* seed_opt = app.add_option("-s,--seed", seed, "Seed for random states (overrides the config)");
  app.add_option("-l,--log-level", level, "quiet, info or debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::map<std::string, absqm_log_level> levels{
      {"quiet", ABSQM_LOG_QUIET}, {"info", ABSQM_LOG_INFO}, {"debug", ABSQM_LOG_DEBUG}};
  absqm_run_request request{command.c_str(), config.c_str(), out.c_str(), seed_opt->count() > 0 ? 1 : 0, seed,
                            levels.at(level)};
  absqm_run_result* result = nullptr;
  if (absqm_run(&request, &result) != ABSQM_OK) {
    std::fprintf(stderr, "absqm: %s\n", absqm_last_error());
    return 2;
  }
  const int code = absqm_run_result_exit_code(result);
  if (level != "quiet") {
    for (size_t i = 0; i < absqm_run_result_assertion_count(result); ++i) {
      const char* name = nullptr;
      double value = 0, limit = 0, margin = 0;
      int pass = 0;
      absqm_run_result_assertion(result, i, &name, &value, &limit, &margin, &pass);
      std::printf("%s %-32s value %.6e limit %.6e margin %.3e\n", pass ? "ok  " : "FAIL", name, value, limit, margin);
    }
  }
  std::fprintf(code == 0 ? stdout : stderr, "%s: %s\n", command.c_str(), absqm_run_result_message(result));
  absqm_run_result_free(result);
  return code;
}
