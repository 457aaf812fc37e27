#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "rpl/errors.hpp"
#include "rpl/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rpl: refined profiles, FGR coefficients and hypothesis checks for radial NLS solitons"};
  app.require_subcommand(1);

  std::string config, out_dir, cache_dir;
  auto* run = app.add_subcommand("run", "run the stages listed in a config file");
  run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "override output.dir");
  run->add_option("--cache", cache_dir, "override output.cache_dir (RPL_CACHE_DIR still wins)");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "summarize <dir>/report.json");
  report->add_option("dir", report_dir, "output directory")->required()->check(CLI::ExistingDirectory);

  std::string clean_dir;
  auto* clean = app.add_subcommand("clean-cache", "remove cache entries from a directory");
  clean->add_option("dir", clean_dir, "cache directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      rpl::PipelineConfig cfg;
      try {
        cfg = rpl::load_config(config);
      } catch (const rpl::Error& e) {
        std::cerr << "config error in " << config << ": " << e.what() << "\n";
        return 2;
      }
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
      auto res = rpl::run_pipeline(cfg);
      std::cout << rpl::summarize_report(cfg.output_dir);
      std::cout << "cache: " << res.cache_hits << " hits, " << res.cache_misses << " misses\n";
      return res.exit_code;
    }
    if (*report) {
      std::cout << rpl::summarize_report(report_dir);
      return 0;
    }
    if (*clean) {
      int n = rpl::clean_cache(clean_dir);
      std::cout << "removed " << n << " cache files from " << clean_dir << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
