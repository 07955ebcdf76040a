#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rde/errors.hpp"
#include "rde/experiment.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> plots;
  bool seed_set = false;
  bool out_set = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "experiment config JSON")->required();
  sub->add_option("--out", o.out_dir, "output directory override")
      ->each([&o](const std::string&) { o.out_set = true; });
  sub->add_option("--seed", o.seed, "master seed override")
      ->each([&o](const std::string&) { o.seed_set = true; });
  sub->add_option("--threads", o.threads, "worker thread count");
  sub->add_option("--plots", o.plots, "plot kinds to emit")->delimiter(',');
}

int resolve_threads(int flag_value, int config_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("RDE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw rde::ConfigError("threads", "RDE_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return config_value;
}

void report_plots(const rde::PlotOutcome& outcome) {
  for (const auto& f : outcome.files) std::cout << "plot: " << f << "\n";
  for (const auto& k : outcome.skipped)
    std::cout << "skipped plot '" << k << "': series not present\n";
}

int run_subcommand(const std::string& kind, const CommonOpts& o) {
  rde::ExperimentConfig cfg = rde::load_experiment_config(o.config_path);
  cfg.kind = rde::experiment_kind_from(kind);
  if (o.out_set) cfg.out_dir = o.out_dir;
  if (o.seed_set) cfg.master_seed = o.seed;
  cfg.threads = resolve_threads(o.threads, cfg.threads);

  const rde::ResultEnvelope envelope = rde::run_experiment(cfg);
  for (const auto& f : envelope.files) std::cout << "wrote: " << f << "\n";
  if (!o.plots.empty()) report_plots(rde::emit_plots(envelope, o.plots));
  std::cout << "config_hash: " << envelope.config_hash << "\n";
  return 0;
}

int run_report(const std::string& dir, const std::vector<std::string>& plots) {
  std::ifstream in(dir + "/summary.json");
  if (!in) throw rde::ConfigError("envelope", "cannot open " + dir + "/summary.json");
  rde::ResultEnvelope envelope;
  try {
    in >> envelope.summary;
  } catch (const nlohmann::json::exception& e) {
    throw rde::ConfigError("envelope", std::string("parse failure: ") + e.what());
  }
  envelope.out_dir = dir;
  report_plots(rde::emit_plots(envelope, plots));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for diffusions in random media"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds{"simulate", "regen",     "velocity",
                                       "zeroone",  "encounter", "oscillation"};
  std::vector<CommonOpts> opts(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i)
    add_common(app.add_subcommand(kinds[i], "run a " + kinds[i] + " experiment"), opts[i]);

  std::string report_dir;
  std::vector<std::string> report_plot_kinds;
  auto* report = app.add_subcommand("report", "emit plots from a finished run");
  report->add_option("--envelope", report_dir, "directory holding summary.json")
      ->required();
  report->add_option("--plots", report_plot_kinds, "plot kinds to emit")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (report->parsed()) return run_report(report_dir, report_plot_kinds);
    for (std::size_t i = 0; i < kinds.size(); ++i)
      if (app.get_subcommand(kinds[i])->parsed()) return run_subcommand(kinds[i], opts[i]);
    std::cerr << "config error: no subcommand\n";
    return 2;
  } catch (const rde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rde::CouplingError& e) {
    std::cerr << "coupling error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}
