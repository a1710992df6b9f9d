#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isocal/calibrate.hpp"
#include "isocal/cox.hpp"
#include "isocal/metrics.hpp"
#include "isocal/types.hpp"

namespace isocal {

// Pre-split datasets on disk instead of a synthetic setting. The seed then
// only tags outputs. test_truths is optional and enables oracle-mode metrics.
struct DatasetPaths {
  std::string train;
  std::string cal;
  std::string test;
  std::string test_truths;
};

struct ExperimentConfig {
  int setting = 1;
  std::optional<DatasetPaths> files;  // overrides `setting` when set
  int n_train = 2500;
  int n_cal = 2500;
  int n_test = 5000;
  std::vector<std::uint64_t> seeds{0};
  // "cox" evaluates the uncalibrated fit; the rest name isotonic calibrators.
  std::vector<std::string> methods{"cox", "dr"};
  std::vector<EvalMode> modes{EvalMode::ipcw};
  std::vector<double> taus{0.1, 0.5, 0.9};
  int grid_density = 10000;
  double clip_floor = 1e-4;
  // Projection tolerance scales with the problem: tol = isr_rms * sqrt(n*K),
  // i.e. a fixed root-mean-square movement per cell.
  double isr_rms = 1e-4;
  double ridge = 0.0;
  std::string dataset_tag;  // defaults to "setting-<id>" or "files"
  std::string out_dir;      // empty: keep results in memory only

  std::string tag() const;
  void validate() const;
};

// Nuisance grids injected in place of the in-process Cox predictions (the
// external-model ingestion path). Any null member keeps the fitted one. All
// grids must live on the pipeline's evaluation grid.
struct NuisanceOverride {
  const SurvivalProbabilityGrid* s_cal = nullptr;
  const SurvivalProbabilityGrid* g_cal = nullptr;
  const SurvivalProbabilityGrid* g_test = nullptr;
};

// One method's test-set prediction curves; calibrators also carry their
// fitted surface (the raw Cox baseline has none).
struct MethodPredictions {
  std::string method;
  PredictionCurves curves;
  std::optional<CalibratedSurface> surface;
};

// Everything one seed produces short of metric evaluation.
struct SeedPipeline {
  std::uint64_t seed = 0;
  SurvivalDataset train, cal, test;
  std::vector<double> test_truths;  // empty when unavailable
  CoxModel event_model, censoring_model;
  std::vector<double> cal_risks, test_risks;
  TimeGrid grid;
  SurvivalProbabilityGrid s_cal, g_cal;  // nuisances fed to the calibrators
  SurvivalProbabilityGrid g_test;        // censoring curves for ipcw metrics
  std::vector<MethodPredictions> methods;
};

// simulate (or load) -> fit event and censoring models on train -> risk
// scores -> evaluation grid -> nuisance grids -> calibrate each method ->
// test-set curves. Deterministic given (cfg, seed).
SeedPipeline build_seed_pipeline(const ExperimentConfig& cfg,
                                 std::uint64_t seed,
                                 const NuisanceOverride* nuisance = nullptr);

// Metric reports for every (method, mode), methods-major in config order.
// Quantile inclusion is decided jointly: a subject excluded by any method at
// some tau is excluded for all of them.
std::vector<MetricReport> evaluate_seed(const ExperimentConfig& cfg,
                                        const SeedPipeline& pipe);

struct SeedRunResult {
  std::uint64_t seed = 0;
  std::vector<MetricReport> reports;
};

SeedRunResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                       const NuisanceOverride* nuisance = nullptr);

// Runs every configured seed. Seeds are distributed over worker threads
// (capped by ISOCAL_THREADS) and each seed's pipeline runs sequentially
// inside its worker; results and files come out in seed order regardless of
// scheduling. With out_dir set, writes report_s<seed>_<method>_<mode>.json
// per report plus one aggregate metrics.csv.
std::vector<SeedRunResult> run_experiment(const ExperimentConfig& cfg);

// Missing or ill-formed command input that should read as a usage error
// (exit 1) rather than data validation (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CLI subcommand bodies. Each validates inputs before writing anything,
// reports failures on stderr, and returns the process exit code: 0 success
// (including metrics reported null with a reason), 1 usage, 2 invalid data,
// 3 numerical failure.
struct SimulateArgs {
  int setting = 1;
  int n = 0;                // ignored when split is given
  std::vector<int> split;   // empty, or {train, cal, test}
  std::uint64_t seed = 0;
  std::string out;
};
int cmd_simulate(const SimulateArgs& a);

struct FitArgs {
  std::string data;
  std::string role = "event";       // or "censoring"
  std::vector<std::string> score;   // extra datasets to write risks for
  double ridge = 0.0;
  std::string out;
};
int cmd_fit(const FitArgs& a);

// Nuisance curves come from probability-grid files (s_hat/g_hat, the
// external-model route) or are predicted from Cox model files (s_model/
// g_model). With no grid file to define the time axis, the evaluation grid
// is built from the training and calibration times, which needs `train`.
struct CalibrateArgs {
  std::string data;
  std::string risks;
  std::string s_hat;    // required by dr (or s_model instead)
  std::string g_hat;
  std::string s_model;
  std::string g_model;
  std::string train;
  int grid_density = 10000;
  std::string method = "dr";
  double clip_floor = 1e-4;
  double isr_rms = 1e-4;
  std::string out;
};
int cmd_calibrate(const CalibrateArgs& a);

struct EvaluateArgs {
  std::vector<std::string> surfaces;
  std::string model;   // evaluates the Cox fit as method "cox"
  std::string data;
  std::string risks;    // test-set risks; optional when model is given
  std::string g_hat;    // censoring grid for mode ipcw...
  std::string g_model;  // ...or a censoring Cox model to predict it from
  std::string truths;   // simulation truths, needed for mode oracle
  std::vector<std::string> modes{"ipcw"};
  std::vector<double> taus{0.1, 0.5, 0.9};
  double t_max = 0.0;  // evaluation horizon; 0 means the end of the grid
  double clip_floor = 1e-4;
  std::uint64_t seed = 0;
  std::string dataset_tag;
  std::string out;
};
int cmd_evaluate(const EvaluateArgs& a);

struct ReportArgs {
  std::string dir;
  std::string out;  // defaults to dir
};
int cmd_report(const ReportArgs& a);

}  // namespace isocal
