#pragma once

#include <vector>

#include "isocal/types.hpp"

namespace isocal {

struct CoxOptions {
  double tol = 1e-8;   // infinity norm of the score at convergence
  int max_iter = 100;
  double ridge = 0.0;  // coefficient of the ||theta||^2 penalty
};

struct CoxModel {
  std::vector<double> coef;
  StepCumulativeHazard baseline;
  double ridge = 0.0;
  // fit diagnostics
  double loglik = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  std::vector<double> stderrs;  // from the unpenalized observed information
};

// Proportional-hazards fit, Breslow tie handling, Newton steps with step
// halving. Throws std::invalid_argument when the sample has no events (or
// fails dataset validation) and std::runtime_error on separation (any
// |coef| > 50; the message recommends a ridge penalty) or non-convergence.
CoxModel fit_cox(const SurvivalDataset& ds, const CoxOptions& opt = {});

// Same fit with the event flag flipped, so the "event" is being censored.
CoxModel fit_censoring(const SurvivalDataset& ds, const CoxOptions& opt = {});

// Breslow cumulative baseline hazard for fixed linear predictors: one jump
// per distinct event time with increment d_j / sum_{Y_i >= t_j} exp(risk_i).
StepCumulativeHazard breslow_baseline(const SurvivalDataset& ds,
                                      const std::vector<double>& risk);

// Linear predictors theta' x for each subject.
std::vector<double> risk_scores(const CoxModel& m, const SurvivalDataset& ds);

// S(t | r) = exp(-Lambda0(t) * exp(r)) clipped below at clip_floor;
// equals 1 before the first baseline jump and is constant after the last.
double predict_survival_at(const CoxModel& m, double risk, double t,
                           double clip_floor = 1e-4);

// Per-subject survival probabilities on a grid.
SurvivalProbabilityGrid predict_survival(const CoxModel& m,
                                         const SurvivalDataset& subjects,
                                         const TimeGrid& grid, GridRole role,
                                         double clip_floor = 1e-4);

}  // namespace isocal
