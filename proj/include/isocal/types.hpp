#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace isocal {

// Right-censored sample: observed time = min(event time, censor time),
// event flag = 1 when the event was observed. Covariates are row-major n x p
// (p may be 0). Immutable by convention: every consumer takes const refs.
struct SurvivalDataset {
  std::vector<std::string> id;
  std::vector<double> time;
  std::vector<std::uint8_t> event;
  std::vector<double> x;
  int p = 0;

  int n() const { return static_cast<int>(time.size()); }
  const double* row(int i) const { return x.data() + static_cast<size_t>(i) * p; }
  // Throws std::invalid_argument when an invariant fails: empty sample,
  // duplicate or empty ids, non-positive or non-finite times, flags outside
  // {0,1}, covariate shape mismatch or non-finite covariates.
  void validate() const;
};

// Strictly increasing positive evaluation times.
struct TimeGrid {
  std::vector<double> times;

  int size() const { return static_cast<int>(times.size()); }
  double t_max() const { return times.back(); }
  void validate() const;
};

// Risk scores aligned with a dataset by position; ids carried for I/O.
struct RiskScores {
  std::vector<std::string> id;
  std::vector<double> value;

  int n() const { return static_cast<int>(value.size()); }
  void validate() const;
};

// Step cumulative hazard: jumps at strictly increasing times.
struct StepCumulativeHazard {
  std::vector<double> times;
  std::vector<double> increments;

  void validate() const;
  // Sum of increments at jump times <= t; 0 before the first jump, constant
  // after the last.
  double value_at(double t) const;
};

enum class GridRole { survival, censoring };

// Per-subject survival (or censoring-survival) probabilities evaluated on a
// shared grid, row-major n x K. Rows must be non-increasing within 1e-12 and
// entries must lie in (0,1].
struct SurvivalProbabilityGrid {
  GridRole role = GridRole::survival;
  TimeGrid grid;
  std::vector<std::string> subjects;
  std::vector<double> probs;

  int n() const { return static_cast<int>(subjects.size()); }
  double at(int i, int k) const {
    return probs[static_cast<size_t>(i) * grid.size() + k];
  }
  void validate() const;
};

enum class Estimator { rw, rw_plus, ht, ht_plus, dr };
std::string estimator_name(Estimator e);
Estimator estimator_from_name(const std::string& name);

// Unprojected per-subject pseudo-outcome columns, row-major K x n
// (times by subjects). Values may fall outside [0,1] by construction.
struct PseudoOutcomeMatrix {
  Estimator estimator = Estimator::dr;
  TimeGrid grid;
  std::vector<std::string> subjects;
  std::vector<double> values;

  int n() const { return static_cast<int>(subjects.size()); }
  double at(int k, int j) const {
    return values[static_cast<size_t>(k) * subjects.size() + j];
  }
  void validate() const;
};

enum class Interpolation { step, bilinear };

// Calibrated survival surface: rows indexed by non-decreasing risks, columns
// by grid times; entries in [0,1], non-increasing down columns (risk) and
// across rows (time) within 1e-8.
struct CalibratedSurface {
  std::string method;
  std::vector<double> risks;
  TimeGrid grid;
  std::vector<double> surface;
  Interpolation interpolation = Interpolation::bilinear;

  int n() const { return static_cast<int>(risks.size()); }
  double at(int i, int k) const {
    return surface[static_cast<size_t>(i) * grid.size() + k];
  }
  void validate() const;
};

// Latent simulation truths kept beside generated datasets.
struct SimulationTruths {
  std::vector<std::string> id;
  std::vector<double> true_time;
  std::vector<double> censor_time;
  std::vector<double> mu;
  std::vector<double> sigma;

  int n() const { return static_cast<int>(id.size()); }
};

}  // namespace isocal
