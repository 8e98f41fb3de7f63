// ncmin <solve|audit|counterexample|sweep|certify> [--config FILE] [--out DIR]
//       [--seed U64] [--jobs N] [--echo]

#include "ncmin/run.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char **argv)
{
  CLI::App app{"Truncation-scheme minimizers of non-coercive integral functionals"};
  app.require_subcommand(1);

  std::string                  config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t>   jobs;
  bool                         echo_only = false;

  for (const char *name : {"solve", "audit", "counterexample", "sweep", "certify"})
    {
      auto *sub = app.add_subcommand(name);
      sub->add_option("--config,-c", config_path, "YAML configuration file");
      sub->add_option("--out,-o", out_dir, "output directory (overrides output.dir)");
      sub->add_option("--seed", seed, "seed for randomized audits (overrides seed)");
      sub->add_option("--jobs,-j", jobs, "parallel sweep points (overrides jobs)")
        ->check(CLI::PositiveNumber);
      sub->add_flag("--echo", echo_only, "print the completed configuration and exit");
    }

  try
    {
      app.parse(argc, argv);
    }
  catch (const CLI::ParseError &e)
    {
      // --help prints and succeeds; usage errors share the config error status
      const int code = app.exit(e);
      return code == 0 ? 0 : static_cast<int>(ncmin::ExitCode::config_error);
    }
  const std::string name = app.get_subcommands().front()->get_name();

  if (!config_path.empty())
    {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(config_path, ec))
        {
          std::cerr << "error: cannot read config file '" << config_path << "'\n";
          return static_cast<int>(ncmin::ExitCode::io_error);
        }
    }

  ncmin::RunConfig config;
  try
    {
      config = config_path.empty() ? ncmin::parse_config("") : ncmin::load_config(config_path);
    }
  catch (const ncmin::ConfigError &e)
    {
      std::cerr << "config error: " << e.what() << '\n';
      return static_cast<int>(ncmin::ExitCode::config_error);
    }

  const auto sub = *ncmin::subcommand_from_string(name);
  config.subcommand = sub;
  if (!out_dir.empty())
    config.output.dir = out_dir;
  if (seed)
    config.seed = *seed;
  if (jobs)
    config.jobs = *jobs;

  if (echo_only)
    {
      std::cout << ncmin::echo_config(config);
      return 0;
    }

  try
    {
      return static_cast<int>(ncmin::run(config, std::cout));
    }
  catch (const std::exception &e)
    {
      std::cerr << "error: " << e.what() << '\n';
      return static_cast<int>(ncmin::ExitCode::config_error);
    }
}
