#pragma once

// End-to-end runs: tensor -> NTF (per β) -> diagnosis, the comparison
// selectors through the same filter/SES/ENVSI path, run-directory artifacts,
// and Monte-Carlo efficiency grids.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntfdm/dependence.hpp"
#include "ntfdm/diagnosis.hpp"
#include "ntfdm/errors.hpp"
#include "ntfdm/io.hpp"
#include "ntfdm/ntf.hpp"
#include "ntfdm/selectors.hpp"
#include "ntfdm/signal.hpp"
#include "ntfdm/simulate.hpp"
#include "ntfdm/spectral.hpp"

namespace ntfdm {

using Json = nlohmann::ordered_json;

enum class Method { kurtosis, alpha, cv, pearson, ntf };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::kurtosis: return "kurtosis";
    case Method::alpha: return "alpha";
    case Method::cv: return "cv";
    case Method::pearson: return "pearson";
    case Method::ntf: return "ntf";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  for (Method m : {Method::kurtosis, Method::alpha, Method::cv, Method::pearson, Method::ntf})
    if (name == method_name(m)) return m;
  throw ParameterError("unknown selector '" + std::string(name) +
                       "' (expected kurtosis, alpha, cv, pearson or ntf)");
}

/// Compact β label used in file names and method tags: -1, 0, 1, 0.5, ...
inline std::string beta_label(double beta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", beta);
  return buf;
}

/// Rethrows any library error with `stage` prepended, keeping its type.
template <class Fn>
decltype(auto) in_stage(std::string_view stage, Fn&& fn) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    return fn();
  } catch (const ParameterError& e) {
    throw ParameterError(prefix + e.what());
  } catch (const SizeError& e) {
    throw SizeError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const IngestionError& e) {
    throw IngestionError(prefix + e.what());
  }
}

/// How an efficiency trial is judged correct.
enum class SuccessRule {
  centroid,  // ENVSI > threshold and Σf·v²/Σv² within carrier ± half width
  peak,      // ENVSI > threshold and the curve maximum within carrier ± half width
};

inline SuccessRule parse_success_rule(std::string_view s) {
  if (s == "centroid") return SuccessRule::centroid;
  if (s == "peak") return SuccessRule::peak;
  throw ParameterError("unknown success rule '" + std::string(s) + "' (expected centroid or peak)");
}

inline std::string success_rule_name(SuccessRule r) { return r == SuccessRule::centroid ? "centroid" : "peak"; }

/// Frequency of the curve maximum (first bin on ties); 0 for an all-zero curve.
inline double peak_frequency(const SelectorCurve& curve) {
  const auto it = std::max_element(curve.values.begin(), curve.values.end());
  if (it == curve.values.end() || !(*it > 0.0)) return 0.0;
  return curve.freq_bins[static_cast<std::size_t>(it - curve.values.begin())];
}

struct RunConfig {
  // Input: a file when input_path is set, otherwise `simulation`.
  std::optional<std::string> input_path;
  io::Format format = io::Format::csv;
  std::optional<double> sample_rate;
  SimConfig simulation;

  StftConfig stft;
  std::size_t segments = 30;
  std::vector<double> betas = {-1.0, 0.0, 1.0};
  NtfConfig ntf;  // beta is taken from `betas`
  EnvsiConfig envsi;
  double decision_threshold = kDefaultDecisionThreshold;
  std::vector<Method> methods = {Method::ntf, Method::kurtosis, Method::alpha, Method::cv, Method::pearson};

  std::string output_dir;                  // empty: nothing written
  std::vector<std::size_t> dump_slices;    // tensor slices to export
  bool dump_filtered = false;              // filtered signal of each chosen selector
  double ses_export_max_hz = 500.0;        // SES CSVs stop here (or at the ENVSI band top if higher)
};

inline bool has_method(const RunConfig& c, Method m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

inline void validate(const RunConfig& c) {
  if (c.methods.empty()) throw ParameterError("at least one selector method must be enabled");
  if (has_method(c, Method::ntf) && c.betas.empty()) throw ParameterError("NTF enabled but no beta given");
  for (double b : c.betas) validate_beta(b);
  if (c.segments < 1) throw ParameterError("segment count must be >= 1");
  if (!(c.decision_threshold >= 0.0)) throw ParameterError("decision threshold must be >= 0");
  validate(c.stft);
  NtfConfig probe = c.ntf;
  probe.beta = c.betas.empty() ? -1.0 : c.betas.front();
  validate(probe);
  if (!c.input_path) validate(c.simulation);
}

struct NtfRun {
  double beta = 0.0;
  NtfFactors factors;
  DiagnosisReport report;
};

struct ComparisonRun {
  Method method = Method::kurtosis;
  SelectorEvaluation evaluation;
  bool faulty = false;
};

struct AnalysisResult {
  Signal signal;
  std::vector<double> freq_bins;
  std::vector<NtfRun> ntf_runs;
  std::vector<ComparisonRun> comparisons;

  /// The NTF run with the largest ENVSI (first on ties); nullptr without NTF.
  const NtfRun* best_ntf() const {
    const NtfRun* best = nullptr;
    for (const auto& r : ntf_runs)
      if (!best || r.report.max_envsi() > best->report.max_envsi()) best = &r;
    return best;
  }
};

inline Signal load_input(const RunConfig& c) {
  if (c.input_path) {
    return in_stage("ingest", [&] {
      Signal s = io::ingest(*c.input_path, c.format, c.sample_rate);
      validate(s);
      return s;
    });
  }
  return in_stage("simulate", [&] { return simulate(c.simulation); });
}

inline SelectorCurve comparison_curve(Method m, const Spectrogram& spec) {
  switch (m) {
    case Method::kurtosis: return spectral_kurtosis(spec);
    case Method::alpha: return alpha_selector(spec);
    case Method::cv: return cv_selector(spec);
    case Method::pearson: return pearson_selector(dependence_map(spec));
    case Method::ntf: break;
  }
  throw ParameterError("not a comparison selector: " + method_name(m));
}

/// The analysis proper, on an already loaded signal. Nothing is written.
inline AnalysisResult analyze_signal(const Signal& signal, const RunConfig& c) {
  validate(c);
  AnalysisResult out;
  out.signal = signal;
  if (has_method(c, Method::ntf)) {
    const DependenceTensor tensor = in_stage("tensor", [&] { return build_tensor(signal, c.segments, c.stft); });
    out.freq_bins = tensor.freq_bins;
    for (double beta : c.betas) {
      const std::string stage = "ntf(beta=" + beta_label(beta) + ")";
      NtfRun run;
      run.beta = beta;
      NtfConfig nc = c.ntf;
      nc.beta = beta;
      run.factors = in_stage(stage, [&] { return decompose(tensor.values, nc); });
      run.report = in_stage("diagnose(beta=" + beta_label(beta) + ")", [&] {
        return diagnose(signal, run.factors, tensor.freq_bins, c.envsi, beta, c.decision_threshold);
      });
      out.ntf_runs.push_back(std::move(run));
    }
  }
  const bool any_comparison = std::any_of(c.methods.begin(), c.methods.end(),
                                          [](Method m) { return m != Method::ntf; });
  if (any_comparison) {
    const Spectrogram spec = in_stage("spectrogram", [&] { return stft_spectrogram(signal, c.stft); });
    if (out.freq_bins.empty()) out.freq_bins = spec.freq_bins;
    for (Method m : {Method::kurtosis, Method::alpha, Method::cv, Method::pearson}) {
      if (!has_method(c, m)) continue;
      ComparisonRun run;
      run.method = m;
      run.evaluation = in_stage("selector(" + method_name(m) + ")", [&] {
        return evaluate_selector(signal, comparison_curve(m, spec), c.envsi);
      });
      run.faulty = run.evaluation.envsi > c.decision_threshold;
      out.comparisons.push_back(std::move(run));
    }
  }
  return out;
}

// ---------------------------------------------------------------- reporting

namespace detail {

inline Json evaluation_json(const SelectorEvaluation& e) {
  return Json{{"envsi", e.envsi},
              {"energy_centroid_hz", energy_centroid(e.curve)},
              {"peak_hz", peak_frequency(e.curve)},
              {"all_zero_curve", e.all_zero_curve}};
}

inline Json simulation_json(const SimConfig& s) {
  return Json{{"soi",
               {{"amplitude", s.soi.amplitude},
                {"fault_frequency_hz", s.soi.fault_frequency},
                {"carrier_frequency_hz", s.soi.carrier_frequency},
                {"decay_per_s", s.soi.decay},
                {"phase_origin_s", s.soi.phase_origin}}},
              {"impulses",
               {{"amplitude_scale", s.impulses.amplitude_scale},
                {"carrier_frequency_hz", s.impulses.carrier_frequency},
                {"decay_per_s", s.impulses.decay},
                {"expected_count_per_second", s.impulses.expected_count_per_second}}},
              {"gaussian_sigma", s.gaussian_sigma},
              {"sample_rate_hz", s.sample_rate},
              {"duration_s", s.duration},
              {"seed", s.rng_seed}};
}

inline std::string window_name(WindowKind w) {
  switch (w) {
    case WindowKind::hamming: return "hamming";
    case WindowKind::hann: return "hann";
    case WindowKind::rectangular: return "rectangular";
  }
  return "?";
}

}  // namespace detail

inline Json simulation_sidecar(const SimConfig& s, std::size_t samples, io::Format format) {
  Json j = detail::simulation_json(s);
  j["samples"] = samples;
  j["format"] = io::format_name(format);
  return j;
}

/// The report.json document. Contains no timings or paths beyond the input
/// path so that identical configurations give identical bytes.
inline Json report_json(const AnalysisResult& r, const RunConfig& c) {
  Json j;
  Json input{{"source", c.input_path ? "file" : "simulation"},
             {"sample_rate_hz", r.signal.sample_rate},
             {"samples", r.signal.size()}};
  if (c.input_path) {
    input["path"] = *c.input_path;
    input["format"] = io::format_name(c.format);
  } else {
    input["simulation"] = detail::simulation_json(c.simulation);
  }
  j["input"] = input;
  j["stft"] = {{"window", detail::window_name(c.stft.window)},
               {"window_length", c.stft.window_length},
               {"overlap", c.stft.overlap},
               {"fft_length", c.stft.fft_length},
               {"hop", c.stft.hop()}};
  j["segments"] = c.segments;
  const EnvsiConfig& e = c.envsi;
  j["envsi"] = {{"fault_frequency_hz", e.fault_frequency},
                {"harmonic_count", e.harmonic_count},
                {"harmonic_tolerance_hz", e.harmonic_tolerance ? Json(*e.harmonic_tolerance) : Json("auto")},
                {"total_band_top_hz", e.total_band_top ? Json(*e.total_band_top) : Json("auto")},
                {"decision_threshold", c.decision_threshold}};

  Json runs = Json::array();
  for (const auto& run : r.ntf_runs) {
    Json classes = Json::array();
    for (std::size_t k = 0; k < run.report.classes.size(); ++k) {
      Json cls = detail::evaluation_json(run.report.classes[k]);
      cls["index"] = k;
      classes.push_back(cls);
    }
    runs.push_back({{"beta", run.beta},
                    {"rank", run.factors.rank()},
                    {"seed", c.ntf.seed},
                    {"restarts", c.ntf.restarts},
                    {"iterations", run.factors.iterations_run},
                    {"final_objective", run.factors.final_objective()},
                    {"chosen_class", run.report.chosen_class},
                    {"max_envsi", run.report.max_envsi()},
                    {"faulty", run.report.faulty},
                    {"classes", classes}});
  }
  j["ntf"] = runs;

  Json comps = Json::array();
  for (const auto& cr : r.comparisons) {
    Json x = {{"method", method_name(cr.method)}};
    x.update(detail::evaluation_json(cr.evaluation));
    x["faulty"] = cr.faulty;
    comps.push_back(x);
  }
  j["selectors"] = comps;

  if (const NtfRun* best = r.best_ntf()) {
    j["verdict"] = {{"method", "ntf"},
                    {"beta", best->beta},
                    {"class", best->report.chosen_class},
                    {"envsi", best->report.max_envsi()},
                    {"faulty", best->report.faulty}};
  } else if (!r.comparisons.empty()) {
    const auto it = std::max_element(r.comparisons.begin(), r.comparisons.end(),
                                     [](const auto& a, const auto& b) { return a.evaluation.envsi < b.evaluation.envsi; });
    j["verdict"] = {{"method", method_name(it->method)}, {"envsi", it->evaluation.envsi}, {"faulty", it->faulty}};
  }
  return j;
}

namespace detail {

inline void write_ses(const std::string& path, const EnvelopeSpectrum& ses, double max_hz) {
  std::size_t n = 0;
  while (n < ses.freq_bins.size() && ses.freq_bins[n] <= max_hz) ++n;
  io::write_columns(path, "freq_hz,amplitude", std::span(ses.freq_bins).first(n),
                    std::span(ses.amplitudes).first(n));
}

inline void write_json(const std::string& path, const Json& j) {
  auto out = io::open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace detail

inline void write_factors(const std::string& dir, const std::string& stem, const NtfRun& run,
                          const NtfConfig& cfg) {
  io::write_matrix(dir + "/" + stem + "_W.csv", run.factors.w);
  io::write_matrix(dir + "/" + stem + "_H.csv", run.factors.h);
  io::write_matrix(dir + "/" + stem + "_Q.csv", run.factors.q);
  detail::write_json(dir + "/" + stem + ".json", Json{{"beta", run.beta},
                                                      {"rank", run.factors.rank()},
                                                      {"seed", cfg.seed},
                                                      {"restarts", cfg.restarts},
                                                      {"iterations", run.factors.iterations_run},
                                                      {"final_objective", run.factors.final_objective()},
                                                      {"objective_trace", run.factors.objective_trace}});
}

/// Writes report.json plus the CSV artifacts into c.output_dir.
inline void write_artifacts(const AnalysisResult& r, const RunConfig& c,
                            const std::optional<DependenceTensor>& tensor = std::nullopt) {
  const std::string& dir = c.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ParameterError(dir + ": cannot create output directory: " + ec.message());

  const double ses_top = std::max(c.ses_export_max_hz, c.envsi.total_band_top.value_or(0.0));
  for (const auto& run : r.ntf_runs) {
    const std::string b = "beta" + beta_label(run.beta);
    for (std::size_t k = 0; k < run.report.classes.size(); ++k) {
      const auto& curve = run.report.classes[k].curve;
      io::write_columns(dir + "/selector_ntf_" + b + "_class" + std::to_string(k) + ".csv", "freq_hz,value",
                        curve.freq_bins, curve.values);
    }
    const auto& chosen = run.report.chosen();
    detail::write_ses(dir + "/ses_ntf_" + b + ".csv", chosen.ses, ses_top);
    if (c.dump_filtered) io::write_csv(dir + "/filtered_ntf_" + b + ".csv", chosen.filtered.samples);
    write_factors(dir, "factors_" + b, run, c.ntf);
  }
  for (const auto& cr : r.comparisons) {
    const std::string name = method_name(cr.method);
    const auto& curve = cr.evaluation.curve;
    io::write_columns(dir + "/selector_" + name + ".csv", "freq_hz,value", curve.freq_bins, curve.values);
    detail::write_ses(dir + "/ses_" + name + ".csv", cr.evaluation.ses, ses_top);
    if (c.dump_filtered) io::write_csv(dir + "/filtered_" + name + ".csv", cr.evaluation.filtered.samples);
  }
  if (tensor) {
    for (std::size_t m : c.dump_slices) {
      const DependenceMap slice = tensor_slice(*tensor, m);
      Matrix mat(slice.bins, slice.bins);
      mat.data = slice.values;
      io::write_matrix(dir + "/slice_" + std::to_string(m) + ".csv", mat);
    }
  }
  detail::write_json(dir + "/report.json", report_json(r, c));
}

/// Load, analyze, and (when output_dir is set) write the run directory.
inline AnalysisResult analyze(const RunConfig& c) {
  validate(c);
  for (std::size_t m : c.dump_slices)
    if (m >= c.segments) throw ParameterError("slice index " + std::to_string(m) + " >= segment count");
  const Signal signal = load_input(c);
  AnalysisResult result = analyze_signal(signal, c);
  if (!c.output_dir.empty()) {
    std::optional<DependenceTensor> tensor;
    if (!c.dump_slices.empty()) tensor = build_tensor(signal, c.segments, c.stft);
    write_artifacts(result, c, tensor);
  }
  return result;
}

// --------------------------------------------------------------- efficiency

/// SplitMix64 finalizer; maps (master seed, trial index) to a trial seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(trial)));
}

struct EfficiencyConfig {
  std::vector<double> aci = {1.0, 2.0, 4.0};
  std::vector<double> anci = {10.0, 20.0, 30.0};
  std::size_t trials = 10;
  std::size_t first_trial = 0;  // trial indices first_trial .. first_trial + trials - 1
  std::uint64_t master_seed = 0;
  SimConfig base;               // amplitudes and seed are overwritten per trial
  RunConfig run;                // methods, betas, NTF, STFT and ENVSI settings
  SuccessRule rule = SuccessRule::centroid;
  double band_half_width = 500.0;  // Hz around the SOI carrier
};

/// One column per method label ("ntf_beta-1", "kurtosis", ...); success
/// counts indexed [method][aci][anci].
struct EfficiencyGrid {
  std::vector<double> aci;
  std::vector<double> anci;
  std::size_t trials = 0;
  std::vector<std::string> methods;
  std::vector<std::vector<std::vector<std::size_t>>> successes;

  double percent(std::size_t method, std::size_t a, std::size_t n) const {
    return trials == 0 ? 0.0 : 100.0 * static_cast<double>(successes[method][a][n]) / static_cast<double>(trials);
  }
  std::size_t method_index(std::string_view label) const {
    const auto it = std::find(methods.begin(), methods.end(), label);
    if (it == methods.end()) throw ParameterError("no method '" + std::string(label) + "' in grid");
    return static_cast<std::size_t>(it - methods.begin());
  }
};

inline bool trial_success(const SelectorEvaluation& e, double threshold, double carrier, const EfficiencyConfig& c) {
  if (!(e.envsi > threshold)) return false;
  const double f = c.rule == SuccessRule::centroid ? energy_centroid(e.curve) : peak_frequency(e.curve);
  return std::abs(f - carrier) <= c.band_half_width;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;
/// Sees every trial's full result; a and n index the grid axes.
using TrialObserver = std::function<void(std::size_t a, std::size_t n, std::size_t trial, const AnalysisResult&)>;

inline EfficiencyGrid efficiency(const EfficiencyConfig& c, const ProgressFn& progress = {},
                                 const TrialObserver& observer = {}) {
  if (c.trials < 1) throw ParameterError("efficiency: trials must be >= 1");
  if (c.aci.empty() || c.anci.empty()) throw ParameterError("efficiency: empty grid axis");
  validate(c.run);

  EfficiencyGrid g;
  g.aci = c.aci;
  g.anci = c.anci;
  g.trials = c.trials;
  if (has_method(c.run, Method::ntf))
    for (double b : c.run.betas) g.methods.push_back("ntf_beta" + beta_label(b));
  for (Method m : {Method::kurtosis, Method::alpha, Method::cv, Method::pearson})
    if (has_method(c.run, m)) g.methods.push_back(method_name(m));
  g.successes.assign(g.methods.size(),
                     std::vector<std::vector<std::size_t>>(c.aci.size(), std::vector<std::size_t>(c.anci.size(), 0)));

  const std::size_t total = c.aci.size() * c.anci.size() * c.trials;
  std::size_t done = 0;
  for (std::size_t a = 0; a < c.aci.size(); ++a) {
    for (std::size_t n = 0; n < c.anci.size(); ++n) {
      for (std::size_t t = 0; t < c.trials; ++t) {
        const std::uint64_t seed = trial_seed(c.master_seed, c.first_trial + t);
        SimConfig sim = c.base;
        sim.soi.amplitude = c.aci[a];
        sim.impulses.amplitude_scale = c.anci[n];
        sim.rng_seed = seed;
        RunConfig rc = c.run;
        rc.ntf.seed = seed;
        const Signal signal = in_stage("simulate", [&] { return simulate(sim); });
        const AnalysisResult r = analyze_signal(signal, rc);
        std::size_t col = 0;
        for (const auto& run : r.ntf_runs) {
          if (trial_success(run.report.chosen(), rc.decision_threshold, sim.soi.carrier_frequency, c))
            ++g.successes[col][a][n];
          ++col;
        }
        for (const auto& cr : r.comparisons) {
          if (trial_success(cr.evaluation, rc.decision_threshold, sim.soi.carrier_frequency, c))
            ++g.successes[col][a][n];
          ++col;
        }
        if (observer) observer(a, n, c.first_trial + t, r);
        if (progress) progress(++done, total);
      }
    }
  }
  return g;
}

inline Json efficiency_json(const EfficiencyGrid& g, const EfficiencyConfig& c) {
  Json methods = Json::object();
  for (std::size_t m = 0; m < g.methods.size(); ++m) {
    Json rows = Json::array();
    for (std::size_t a = 0; a < g.aci.size(); ++a) {
      Json row = Json::array();
      for (std::size_t n = 0; n < g.anci.size(); ++n) row.push_back(g.percent(m, a, n));
      rows.push_back(row);
    }
    methods[g.methods[m]] = {{"success_percent", rows}, {"successes", g.successes[m]}};
  }
  return Json{{"aci", g.aci},
              {"anci", g.anci},
              {"trials", g.trials},
              {"first_trial", c.first_trial},
              {"master_seed", c.master_seed},
              {"success_rule", success_rule_name(c.rule)},
              {"band_half_width_hz", c.band_half_width},
              {"ntf_max_iterations", c.run.ntf.max_iterations},
              {"methods", methods}};
}

/// efficiency.json plus one CSV table per method (rows A_CI, columns A_NCI).
inline void write_efficiency(const EfficiencyGrid& g, const EfficiencyConfig& c, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ParameterError(dir + ": cannot create output directory: " + ec.message());
  for (std::size_t m = 0; m < g.methods.size(); ++m) {
    auto out = io::open_output(dir + "/efficiency_" + g.methods[m] + ".csv");
    out << "aci";
    for (double n : g.anci) out << ",anci_" << io::format_double(n);
    out << '\n';
    for (std::size_t a = 0; a < g.aci.size(); ++a) {
      out << io::format_double(g.aci[a]);
      for (std::size_t n = 0; n < g.anci.size(); ++n) out << ',' << io::format_double(g.percent(m, a, n));
      out << '\n';
    }
  }
  detail::write_json(dir + "/efficiency.json", efficiency_json(g, c));
}

}  // namespace ntfdm
