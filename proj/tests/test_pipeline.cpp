#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "ntfdm/pipeline.hpp"

using namespace ntfdm;
namespace fs = std::filesystem;

namespace {

RunConfig small_run() {
  RunConfig c;
  c.simulation.duration = 3.0;
  c.simulation.rng_seed = 5;
  c.segments = 10;
  c.ntf.max_iterations = 30;
  c.betas = {-1.0, 1.0};
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ntfdm_pipeline_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Pipeline, MethodNames) {
  for (Method m : {Method::kurtosis, Method::alpha, Method::cv, Method::pearson, Method::ntf})
    EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("fastkurtogram"), ParameterError);
  EXPECT_EQ(beta_label(-1.0), "-1");
  EXPECT_EQ(beta_label(0.5), "0.5");
}

TEST(Pipeline, StagePrefixKeepsErrorType) {
  EXPECT_THROW(in_stage("x", []() -> int { throw SizeError("short"); }), SizeError);
  try {
    in_stage("tensor", []() -> int { throw NumericalError("nan"); });
  } catch (const NumericalError& e) {
    EXPECT_EQ(std::string(e.what()), "tensor: nan");
  }
}

TEST(Pipeline, ValidatesRunConfig) {
  RunConfig c = small_run();
  c.methods.clear();
  EXPECT_THROW(analyze_signal(simulate(c.simulation), c), ParameterError);
  c = small_run();
  c.betas = {-2.0};
  EXPECT_THROW(validate(c), ParameterError);
  c = small_run();
  c.dump_slices = {10};
  EXPECT_THROW(analyze(c), ParameterError);
}

TEST(Pipeline, AnalyzeProducesAllMethods) {
  const RunConfig c = small_run();
  const AnalysisResult r = analyze(c);
  ASSERT_EQ(r.ntf_runs.size(), 2u);
  ASSERT_EQ(r.comparisons.size(), 4u);
  EXPECT_EQ(r.freq_bins.size(), 257u);
  for (const auto& run : r.ntf_runs) {
    EXPECT_EQ(run.report.classes.size(), 4u);
    EXPECT_EQ(run.factors.iterations_run, 30u);
    EXPECT_GE(run.report.max_envsi(), 0.0);
    EXPECT_LE(run.report.max_envsi(), 1.0);
    for (const auto& cls : run.report.classes) EXPECT_LE(cls.envsi, run.report.max_envsi());
  }
  // Strong fault: some NTF class must find it.
  EXPECT_TRUE(r.best_ntf()->report.faulty);
  EXPECT_EQ(r.comparisons[0].method, Method::kurtosis);
  EXPECT_EQ(r.comparisons[3].method, Method::pearson);
}

TEST(Pipeline, FileInputMatchesSimulatedInput) {
  RunConfig c = small_run();
  c.methods = {Method::kurtosis};
  const Signal s = simulate(c.simulation);
  const fs::path d = fresh_dir("file");
  fs::create_directories(d);
  io::write_csv((d / "x.csv").string(), s.samples);
  RunConfig from_file = c;
  from_file.input_path = (d / "x.csv").string();
  from_file.sample_rate = s.sample_rate;
  EXPECT_EQ(analyze(c).comparisons[0].evaluation.envsi, analyze(from_file).comparisons[0].evaluation.envsi);
  from_file.sample_rate.reset();
  EXPECT_THROW(analyze(from_file), IngestionError);
}

TEST(Pipeline, ArtifactsAndDeterministicReport) {
  RunConfig c = small_run();
  c.dump_slices = {0, 9};
  c.dump_filtered = true;
  c.output_dir = fresh_dir("a").string();
  analyze(c);
  RunConfig again = c;
  again.output_dir = fresh_dir("b").string();
  analyze(again);

  const fs::path a = c.output_dir, b = again.output_dir;
  for (const char* f : {"report.json", "selector_ntf_beta-1_class0.csv", "selector_ntf_beta1_class3.csv",
                        "ses_ntf_beta-1.csv", "selector_kurtosis.csv", "ses_pearson.csv", "slice_0.csv",
                        "slice_9.csv", "filtered_cv.csv", "filtered_ntf_beta1.csv", "factors_beta-1_W.csv",
                        "factors_beta1.json"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "factors_beta-1_H.csv"), slurp(b / "factors_beta-1_H.csv"));

  const Json j = Json::parse(slurp(a / "report.json"));
  EXPECT_EQ(j["segments"], 10);
  EXPECT_EQ(j["ntf"].size(), 2u);
  EXPECT_EQ(j["ntf"][0]["classes"].size(), 4u);
  EXPECT_EQ(j["selectors"].size(), 4u);
  EXPECT_TRUE(j.contains("verdict"));
  EXPECT_EQ(j["verdict"]["method"], "ntf");

  // SES export stops at 500 Hz; slices are F x F.
  std::ifstream ses(a / "ses_ntf_beta-1.csv");
  std::string line, last;
  while (std::getline(ses, line)) last = line;
  EXPECT_LE(std::stod(last.substr(0, last.find(','))), 500.0);
  std::ifstream slice(a / "slice_0.csv");
  std::getline(slice, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 256);
}

TEST(Efficiency, TrialSeedsAreDistinct) {
  std::set<std::uint64_t> seeds;
  for (std::size_t t = 0; t < 1000; ++t) seeds.insert(trial_seed(42, t));
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
}

TEST(Efficiency, SplitRunsAddUp) {
  EfficiencyConfig c;
  c.aci = {4.0};
  c.anci = {20.0};
  c.base.duration = 3.0;
  c.run = small_run();
  c.run.methods = {Method::kurtosis, Method::ntf};
  c.run.betas = {1.0};
  c.run.ntf.max_iterations = 10;
  c.master_seed = 9;
  c.trials = 4;
  std::size_t calls = 0;
  const EfficiencyGrid whole = efficiency(c, [&](std::size_t done, std::size_t total) {
    ++calls;
    EXPECT_LE(done, total);
  });
  EXPECT_EQ(calls, 4u);
  EXPECT_EQ(whole.methods, (std::vector<std::string>{"ntf_beta1", "kurtosis"}));

  EfficiencyConfig first = c, second = c;
  first.trials = 2;
  second.trials = 2;
  second.first_trial = 2;
  const EfficiencyGrid g1 = efficiency(first), g2 = efficiency(second);
  for (std::size_t m = 0; m < whole.methods.size(); ++m)
    EXPECT_EQ(whole.successes[m][0][0], g1.successes[m][0][0] + g2.successes[m][0][0]);
  EXPECT_EQ(whole.method_index("kurtosis"), 1u);
  EXPECT_THROW(whole.method_index("cv"), ParameterError);

  const fs::path d = fresh_dir("eff");
  write_efficiency(whole, c, d.string());
  EXPECT_TRUE(fs::exists(d / "efficiency.json"));
  EXPECT_TRUE(fs::exists(d / "efficiency_ntf_beta1.csv"));
}

TEST(Efficiency, SuccessRules) {
  SelectorEvaluation e;
  e.envsi = 0.5;
  e.curve.freq_bins = {0, 2500, 6000, 12500};
  e.curve.values = {0, 1.0, 0.9, 0};
  EfficiencyConfig c;
  c.rule = SuccessRule::peak;
  EXPECT_TRUE(trial_success(e, 0.1, 2500.0, c));
  c.rule = SuccessRule::centroid;  // centroid ≈ 4153 Hz
  EXPECT_FALSE(trial_success(e, 0.1, 2500.0, c));
  e.curve.values[2] = 0.0;
  EXPECT_TRUE(trial_success(e, 0.1, 2500.0, c));
  e.envsi = 0.1;
  EXPECT_FALSE(trial_success(e, 0.1, 2500.0, c));
  EXPECT_EQ(parse_success_rule("peak"), SuccessRule::peak);
  EXPECT_THROW(parse_success_rule("median"), ParameterError);
}
