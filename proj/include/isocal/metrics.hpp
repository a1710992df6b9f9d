#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "isocal/types.hpp"

namespace isocal {

// Per-subject predicted survival curves on a shared grid, interpreted as
// right-continuous step functions: S(t) is the value at the largest grid
// time <= t and 1 before the first grid time. Unlike SurvivalProbabilityGrid
// this admits exact zeros, which calibrated surfaces can reach.
struct PredictionCurves {
  TimeGrid grid;
  std::vector<std::string> subjects;
  std::vector<double> values;  // row-major n x K, rows non-increasing, [0,1]

  int n() const { return static_cast<int>(subjects.size()); }
  double at(int i, int k) const {
    return values[static_cast<size_t>(i) * grid.size() + k];
  }
  void validate() const;
};

// Nuisance grids are step curves too; this just relabels one.
PredictionCurves curves_from_grid(const SurvivalProbabilityGrid& g);

// Evaluates a calibrated surface for each subject at every grid time. The
// risk direction uses the surface's own interpolation; between grid times
// the result is read as a step function like every other predictor here.
PredictionCurves curves_from_surface(const CalibratedSurface& surf,
                                     const std::vector<std::string>& subject_ids,
                                     const std::vector<double>& risks,
                                     const TimeGrid& grid);

// How observed outcomes and censoring enter the metrics:
//   ipcw   - observed (Y, delta) with inverse censoring-survival weights;
//   naive  - observed (Y, delta), censoring ignored (G = 1);
//   oracle - latent event times, every subject an event (simulation only).
enum class EvalMode { ipcw, naive, oracle };

std::string eval_mode_name(EvalMode m);
EvalMode eval_mode_from_name(const std::string& name);

struct MetricInputs {
  const SurvivalDataset* test = nullptr;
  const PredictionCurves* predicted = nullptr;
  // Censoring survival per test subject; required in ipcw mode. May live on
  // its own grid, but subjects must match the test set.
  const SurvivalProbabilityGrid* censoring = nullptr;
  // Latent event times aligned with the test set; required in oracle mode.
  const std::vector<double>* true_event_times = nullptr;
  EvalMode mode = EvalMode::ipcw;
};

// Harrell's concordance index. A pair is comparable when the earlier subject
// is an observed event strictly before the other's time; risk ties count
// one half. Throws std::runtime_error when no pair is comparable.
double c_index(const std::vector<double>& risks,
               const std::vector<double>& times,
               const std::vector<std::uint8_t>& events);

// Unsigned area between the weighted empirical CDF of the PIT values
// 1 - S(outcome time | x) and the uniform CDF, i.e. the Wasserstein-1
// distance to uniform; always in [0, 1/2]. Throws std::runtime_error when
// the total outcome weight is zero (no uncensored subjects).
double aupit(const MetricInputs& in);

struct QuantileScoreResult {
  double score = 0.0;
  std::vector<std::uint8_t> included;
  int n_included = 0;
  int n_excluded = 0;
};

// 1 where the step curve reaches 1 - tau at some grid time <= t_max, i.e.
// where the tau-quantile is defined.
std::vector<std::uint8_t> quantile_inclusion(const PredictionCurves& pred,
                                             double tau, double t_max);

// Inclusion masks for many levels in one pass over the curves. Skips the
// per-call value validation, so multi-method joint-exclusion loops stay
// linear in the grid size.
std::vector<std::vector<std::uint8_t>> quantile_inclusion_masks(
    const PredictionCurves& pred, const std::vector<double>& taus,
    double t_max);

// Censoring-corrected pinball loss at level tau averaged over included
// subjects: the predicted quantile is the smallest grid time at which the
// curve is <= 1 - tau, the overestimation leg weights the observed-event
// indicator by 1/G(Y|X) and the underestimation leg integrates the at-risk
// indicator weighted by 1/G(t|X) up to t_max, both exactly over the step
// segments. joint_mask, when given, further restricts the average (used to
// score several methods over a common inclusion set). Throws
// std::runtime_error when no subject is included.
QuantileScoreResult quantile_score(const MetricInputs& in, double tau,
                                   double t_max,
                                   const std::vector<std::uint8_t>* joint_mask = nullptr);

// Integrated Brier score: time average over [0, t_max] of the weighted
// squared error of the survival curve, both legs integrated exactly over
// the step segments, plain mean over subjects.
double ibs(const MetricInputs& in, double t_max);

struct QuantileScoreEntry {
  double score = 0.0;  // NaN when the level was undefined
  int n_included = 0;
  int n_excluded = 0;
};

struct MetricReport {
  std::string dataset;
  std::string method;
  EvalMode mode = EvalMode::ipcw;
  std::uint64_t seed = 0;
  int n_test = 0;
  double t_max = 0.0;
  double c_index = 0.0;
  double aupit = 0.0;
  double ibs = 0.0;
  std::vector<std::pair<double, QuantileScoreEntry>> quantile_scores;
  std::vector<std::string> notes;  // reasons for any undefined entries

  // Range checks plus: per level, included + excluded == n_test.
  void validate() const;
};

// Computes every metric in one pass. Undefined metrics become NaN with a
// reason appended to notes (matching the report-nulls-and-continue CLI
// contract). tau_masks, when given, is aligned with taus and supplies joint
// inclusion masks for method comparisons. Tags (dataset, method, seed) are
// left for the caller.
MetricReport compute_metric_report(
    const MetricInputs& in, const std::vector<double>& risk_values,
    const std::vector<double>& taus, double t_max,
    const std::vector<std::vector<std::uint8_t>>* tau_masks = nullptr);

std::string metric_report_to_json(const MetricReport& r);
MetricReport metric_report_from_json(const std::string& text);

// Flat row for cross-seed aggregation; the header depends on the tau list.
std::string metric_report_csv_header(const MetricReport& r);
std::string metric_report_csv_row(const MetricReport& r);

}  // namespace isocal
