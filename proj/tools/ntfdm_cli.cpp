// ntfdm: simulate benchmark signals, analyze a record, run efficiency grids.
//
// Exit codes: 0 success, 2 bad configuration, 3 ingestion error,
// 4 numerical failure, 1 anything else.

#include <cstdio>
#include <exception>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#ifdef NTFDM_SYSTEM_CLI11
#include <CLI/CLI.hpp>
#else
#include "CLI11.hpp"
#endif
#include "ntfdm/ntfdm.hpp"

namespace {

struct SimFlags {
  ntfdm::SimConfig cfg;
  void add(CLI::App* app) {
    app->add_option("--aci", cfg.soi.amplitude, "Cyclic impulse amplitude A_CI")->capture_default_str();
    app->add_option("--anci", cfg.impulses.amplitude_scale, "Non-cyclic impulse amplitude scale A_NCI")
        ->capture_default_str();
    app->add_option("--sigma", cfg.gaussian_sigma, "Gaussian noise standard deviation")->capture_default_str();
    app->add_option("--soi-carrier", cfg.soi.carrier_frequency, "SOI carrier frequency [Hz]")->capture_default_str();
    app->add_option("--soi-decay", cfg.soi.decay, "SOI decay factor [1/s]")->capture_default_str();
    app->add_option("--nci-carrier", cfg.impulses.carrier_frequency, "Non-cyclic carrier frequency [Hz]")
        ->capture_default_str();
    app->add_option("--nci-decay", cfg.impulses.decay, "Non-cyclic decay factor [1/s]")->capture_default_str();
    app->add_option("--nci-rate", cfg.impulses.expected_count_per_second, "Expected non-cyclic impulses per second")
        ->capture_default_str();
    app->add_option("--duration", cfg.duration, "Signal duration [s]")->capture_default_str();
  }
};

struct AnalysisFlags {
  std::size_t segments = 30;
  std::vector<double> betas;
  std::size_t rank = 4;
  std::size_t max_iter = 1000;
  double tolerance = 1e-8;
  std::size_t restarts = 1;
  std::vector<std::string> selectors;
  std::size_t harmonics = 5;
  std::optional<double> harmonic_tolerance;
  std::optional<double> band_top;
  double threshold = ntfdm::kDefaultDecisionThreshold;

  void add(CLI::App* app) {
    app->add_option("--segments", segments, "Number of segments M")->capture_default_str();
    app->add_option("--beta", betas, "NTF beta (-1, 0, 1 or > 0); repeatable [default: -1 0 1]");
    app->add_option("--rank", rank, "NTF rank K")->capture_default_str();
    app->add_option("--max-iter", max_iter, "NTF iteration limit")->capture_default_str();
    app->add_option("--tolerance", tolerance, "NTF relative objective tolerance")->capture_default_str();
    app->add_option("--restarts", restarts, "NTF restarts (lowest objective kept)")->capture_default_str();
    app->add_option("--selectors", selectors, "Methods: kurtosis, alpha, cv, pearson, ntf [default: all]")
        ->delimiter(',');
    app->add_option("--harmonics", harmonics, "Harmonics R1 in ENVSI")->capture_default_str();
    app->add_option("--harmonic-tolerance", harmonic_tolerance, "Half-width of each harmonic window [Hz]");
    app->add_option("--band-top", band_top, "Top of the ENVSI energy band [Hz]");
    app->add_option("--threshold", threshold, "ENVSI decision threshold")->capture_default_str();
  }

  void apply(ntfdm::RunConfig& rc, double fault_freq, std::uint64_t seed) const {
    rc.segments = segments;
    if (!betas.empty()) rc.betas = betas;
    rc.ntf.rank = rank;
    rc.ntf.max_iterations = max_iter;
    rc.ntf.tolerance = tolerance;
    rc.ntf.restarts = restarts;
    rc.ntf.seed = seed;
    if (!selectors.empty()) {
      rc.methods.clear();
      for (const auto& s : selectors) rc.methods.push_back(ntfdm::parse_method(s));
    }
    rc.envsi.fault_frequency = fault_freq;
    rc.envsi.harmonic_count = harmonics;
    rc.envsi.harmonic_tolerance = harmonic_tolerance;
    rc.envsi.total_band_top = band_top;
    rc.decision_threshold = threshold;
  }
};

void print_summary(const ntfdm::AnalysisResult& r) {
  for (const auto& run : r.ntf_runs) {
    std::printf("ntf beta=%-3s  class=%zu  ENVSI=%.4f  %s  (%zu iterations)\n", ntfdm::beta_label(run.beta).c_str(),
                run.report.chosen_class, run.report.max_envsi(), run.report.faulty ? "faulty" : "healthy",
                run.factors.iterations_run);
  }
  for (const auto& c : r.comparisons) {
    std::printf("%-9s ENVSI=%.4f  %s\n", ntfdm::method_name(c.method).c_str(), c.evaluation.envsi,
                c.faulty ? "faulty" : "healthy");
  }
}

// Keys outside any section belong to the subcommand being run, so a flat file
// can be passed as `ntfdm analyze --config run.ini`.
class SubcommandConfig : public CLI::ConfigTOML {
 public:
  std::string target;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    if (!target.empty())
      for (auto& item : items)
        if (item.parents.empty()) item.parents.push_back(target);
    return items;
  }
};

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ntfdm::IngestionError*>(&e)) return 3;
  if (dynamic_cast<const ntfdm::NumericalError*>(&e)) return 4;
  if (dynamic_cast<const ntfdm::Error*>(&e)) return 2;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bearing fault detection with dependence-map tensor factorization"};
  app.require_subcommand(1);
  app.fallthrough();
  auto config = std::make_shared<SubcommandConfig>();
  app.config_formatter(config);
  app.set_config("--config", "", "key = value file mirroring the long flags");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Write a synthetic benchmark signal and a JSON sidecar");
  SimFlags sim_flags;
  sim_flags.add(sim);
  std::string sim_out;
  std::string sim_format = "csv";
  double sim_fault = sim_flags.cfg.soi.fault_frequency;
  std::uint64_t sim_seed = 0;
  sim->add_option("--out", sim_out, "Output file (the sidecar is written to <out>.json)")->required();
  sim->add_option("--format", sim_format, "csv, wav or f32le")->capture_default_str();
  sim->add_option("--sample-rate", sim_flags.cfg.sample_rate, "Sampling rate [Hz]")->capture_default_str();
  sim->add_option("--fault-freq", sim_fault, "Fault (impulse repetition) frequency [Hz]")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();

  // analyze
  auto* ana = app.add_subcommand("analyze", "Run the detection pipeline on a file or a simulated signal");
  SimFlags ana_sim;
  ana_sim.add(ana);
  AnalysisFlags ana_flags;
  ana_flags.add(ana);
  std::optional<std::string> input;
  std::string ana_format = "csv";
  std::optional<double> ana_rate;
  double ana_fault = ana_sim.cfg.soi.fault_frequency;
  std::uint64_t ana_seed = 0;
  std::string ana_out;
  std::vector<std::size_t> slices;
  bool dump_filtered = false;
  ana->add_option("--input", input, "Signal file; a simulated signal is used when omitted");
  ana->add_option("--format", ana_format, "csv, wav or f32le")->capture_default_str();
  ana->add_option("--sample-rate", ana_rate, "Sampling rate [Hz] (required for csv and f32le)");
  ana->add_option("--fault-freq", ana_fault, "Expected fault frequency [Hz]")->capture_default_str();
  ana->add_option("--seed", ana_seed, "Seed for simulation and NTF initialization")->capture_default_str();
  ana->add_option("--out", ana_out, "Run directory for report.json and CSV artifacts");
  ana->add_option("--dump-slices", slices, "Tensor slice indices to export")->delimiter(',');
  ana->add_flag("--dump-filtered", dump_filtered, "Export the filtered signal of each chosen selector");

  // efficiency
  auto* eff = app.add_subcommand("efficiency", "Monte-Carlo success rates over an (A_CI, A_NCI) grid");
  SimFlags eff_sim;
  eff_sim.add(eff);
  AnalysisFlags eff_flags;
  eff_flags.max_iter = 300;
  eff_flags.add(eff);
  ntfdm::EfficiencyConfig eff_cfg;
  double eff_fault = eff_sim.cfg.soi.fault_frequency;
  std::string eff_out;
  std::string rule = "centroid";
  eff->add_option("--trials", eff_cfg.trials, "Trials per cell")->capture_default_str();
  eff->add_option("--first-trial", eff_cfg.first_trial, "Index of the first trial (for split runs)")
      ->capture_default_str();
  eff->add_option("--grid-aci", eff_cfg.aci, "A_CI axis")->delimiter(',');
  eff->add_option("--grid-anci", eff_cfg.anci, "A_NCI axis")->delimiter(',');
  eff->add_option("--fault-freq", eff_fault, "Fault frequency [Hz]")->capture_default_str();
  eff->add_option("--seed", eff_cfg.master_seed, "Master seed")->capture_default_str();
  eff->add_option("--success-rule", rule, "centroid or peak")->capture_default_str();
  eff->add_option("--band-half-width", eff_cfg.band_half_width, "Accepted distance from the SOI carrier [Hz]")
      ->capture_default_str();
  eff->add_option("--out", eff_out, "Directory for efficiency.json and per-method CSV tables");

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "simulate" || arg == "analyze" || arg == "efficiency") {
      config->target = arg;
      break;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      ntfdm::SimConfig cfg = sim_flags.cfg;
      cfg.soi.fault_frequency = sim_fault;
      cfg.rng_seed = sim_seed;
      const auto format = ntfdm::io::parse_format(sim_format);
      const ntfdm::Signal s = ntfdm::simulate(cfg);
      ntfdm::io::write_signal(sim_out, format, s);
      auto side = ntfdm::io::open_output(sim_out + ".json");
      side << ntfdm::simulation_sidecar(cfg, s.size(), format).dump(2) << '\n';
      std::printf("wrote %zu samples to %s\n", s.size(), sim_out.c_str());
    } else if (*ana) {
      ntfdm::RunConfig rc;
      rc.simulation = ana_sim.cfg;
      rc.simulation.soi.fault_frequency = ana_fault;
      rc.simulation.rng_seed = ana_seed;
      rc.input_path = input;
      rc.format = ntfdm::io::parse_format(ana_format);
      rc.sample_rate = ana_rate;
      rc.output_dir = ana_out;
      rc.dump_slices = slices;
      rc.dump_filtered = dump_filtered;
      ana_flags.apply(rc, ana_fault, ana_seed);
      const auto result = ntfdm::analyze(rc);
      print_summary(result);
      if (!ana_out.empty()) std::printf("report: %s/report.json\n", ana_out.c_str());
    } else if (*eff) {
      eff_cfg.base = eff_sim.cfg;
      eff_cfg.base.soi.fault_frequency = eff_fault;
      eff_cfg.rule = ntfdm::parse_success_rule(rule);
      if (eff_flags.betas.empty()) eff_flags.betas = {-1.0};
      eff_flags.apply(eff_cfg.run, eff_fault, eff_cfg.master_seed);
      const auto grid = ntfdm::efficiency(eff_cfg, [](std::size_t done, std::size_t total) {
        std::fprintf(stderr, "\rtrial %zu/%zu", done, total);
        if (done == total) std::fputc('\n', stderr);
      });
      for (std::size_t m = 0; m < grid.methods.size(); ++m) {
        std::printf("%s (success %%)\n  A_CI \\ A_NCI", grid.methods[m].c_str());
        for (double n : grid.anci) std::printf(" %7g", n);
        std::printf("\n");
        for (std::size_t a = 0; a < grid.aci.size(); ++a) {
          std::printf("  %13g", grid.aci[a]);
          for (std::size_t n = 0; n < grid.anci.size(); ++n) std::printf(" %7.1f", grid.percent(m, a, n));
          std::printf("\n");
        }
      }
      if (!eff_out.empty()) ntfdm::write_efficiency(grid, eff_cfg, eff_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}
