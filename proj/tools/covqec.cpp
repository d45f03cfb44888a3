#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "covqec/harness.hpp"

using namespace covqec;

int main(int argc, char** argv) {
  CLI::App app{"covariant QEC measurements and bound checks"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  int jobs = 1;

  struct Sub {
    const char* name;
    const char* help;
    CommandResult (*run)(const Config&, const RunOptions&);
  };
  const Sub subs[] = {
      {"measure", "symmetry, QEC and bound report for one code and noise model", cmd_measure},
      {"fig3", "thermodynamic-code scaling grid and log-log slopes", cmd_fig3},
      {"saturation", "ratios of measured quantities to the global bounds", cmd_saturation},
      {"transversal", "transversal-gate level caps", cmd_transversal},
      {"verify", "run the acceptance criteria", cmd_verify},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    auto* opt = sub->add_option("--config", config_path, "key = value configuration file");
    if (std::string(s.name) != "verify") opt->required();
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    apps.push_back({sub, &s});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? EXIT_OK : EXIT_CONFIG;
  }

  try {
    RunOptions opt;
    opt.format = format;
    opt.jobs = jobs;
    opt.seed = seed_from_env();
    Config cfg = config_path.empty() ? Config::parse("", "<none>") : Config::load(config_path);

    CommandResult res;
    for (const auto& [sub, s] : apps)
      if (sub->parsed()) res = s->run(cfg, opt);

    for (const auto& m : res.messages) std::cerr << m << "\n";
    if (out_path.empty()) {
      std::cout << res.output;
      for (const auto& [suffix, content] : res.sidecars) std::cerr << "# " << suffix << "\n" << content;
    } else {
      std::ofstream f(out_path);
      if (!(f << res.output)) {
        std::cerr << "cannot write " << out_path << "\n";
        return EXIT_CONFIG;
      }
      for (const auto& [suffix, content] : res.sidecars) std::ofstream(out_path + suffix) << content;
    }
    return res.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return EXIT_CONFIG;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_CERTIFICATION;
  }
}
