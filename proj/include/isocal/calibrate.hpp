#pragma once

#include <vector>

#include "isocal/isotonic.hpp"
#include "isocal/types.hpp"

namespace isocal {

// Sorted, deduplicated union of the even lattice {k * t_max_cal / n_dense,
// k = 1..n_dense} and every observed time in train and cal. t_max_cal is the
// largest observed calibration time.
TimeGrid build_time_grid(const SurvivalDataset& train, const SurvivalDataset& cal,
                         int n_dense = 10000);

// Everything a calibrator needs, borrowed from the caller. All probability
// grids must share the evaluation grid and the calibration subject order.
// s_hat (event survival) is only required by the doubly robust estimator.
struct CalibrationInputs {
  const SurvivalDataset* cal_data = nullptr;
  const RiskScores* cal_risks = nullptr;
  const SurvivalProbabilityGrid* s_hat = nullptr;
  const SurvivalProbabilityGrid* g_hat = nullptr;
  const TimeGrid* grid = nullptr;
  double clip_floor = 1e-4;
};

// Censoring survival of one subject at an arbitrary time by step lookup:
// 1 before the first grid time, last value carried forward elsewhere.
double step_lookup(const SurvivalProbabilityGrid& g, int subject, double t);

// Time-constant inverse-censoring weights delta_i / max(G(Y_i|X_i), floor);
// censored subjects get 0.
std::vector<double> rw_weights(const SurvivalDataset& cal,
                               const SurvivalProbabilityGrid& g_hat,
                               double clip_floor);

// Time-varying variant at horizon t:
//   1[Y > t] / max(G(t|X), floor) + delta * 1[Y <= t] / max(G(Y|X), floor).
std::vector<double> rw_plus_weights(const SurvivalDataset& cal,
                                    const SurvivalProbabilityGrid& g_hat,
                                    double t, double clip_floor);

// Per-subject pseudo-outcome columns over the grid (times by subjects).
//   HT:  delta * 1[Y > t] / max(G(Y|X), floor)
//   HT+: 1[Y > t] / max(G(t|X), floor)
//   DR:  S(t) corrected by the cumulative martingale residual of the observed
//        time against the discrete hazard 1 - S(t_i)/S(t_{i-1}); observed
//        times must be grid members (exact match), else alignment error.
PseudoOutcomeMatrix ht_pseudo_outcomes(const CalibrationInputs& in);
PseudoOutcomeMatrix ht_plus_pseudo_outcomes(const CalibrationInputs& in);
PseudoOutcomeMatrix dr_pseudo_outcomes(const CalibrationInputs& in);

// Reweighted isotonic fit (variant rw or rw_plus): per grid time, weighted
// non-increasing PAVA of 1[Y_i > t] on risk-sorted subjects, tied risks
// pooled. rw weights are time-constant, so the surface is non-increasing in
// time by monotonicity of isotonic regression in its targets; rw_plus routes
// through one doubly-monotone projection to repair the time direction.
// Throws std::invalid_argument naming the first grid time where every weight
// vanishes. diag, when given, receives the projection iteration count (zero
// for the plain rw variant, which never projects).
CalibratedSurface fit_rw_isr(const CalibrationInputs& in, Estimator variant,
                             const DoublyMonotoneOptions& opt = {},
                             DoublyMonotoneResult* diag = nullptr);

// Isotonic fit of pseudo-outcomes (variant ht, ht_plus or dr): transpose to
// subjects-by-times in risk order, average rows across tied risks, project
// onto the doubly monotone cone, clamp to [0,1]. Dykstra non-convergence
// propagates.
CalibratedSurface fit_pseudo_isr(const CalibrationInputs& in, Estimator variant,
                                 const DoublyMonotoneOptions& opt = {},
                                 DoublyMonotoneResult* diag = nullptr);

// Evaluate a fitted surface at (risk, t). Risks clamp to the calibration
// range; t <= 0 gives 1; t beyond the grid is constant at the last column;
// t below the first grid time interpolates from (0, 1). Bilinear surfaces
// interpolate inside cells, step surfaces carry the lower lattice value
// forward. Non-increasing in both arguments.
double predict(const CalibratedSurface& surface, double risk, double t);

}  // namespace isocal
