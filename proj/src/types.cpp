#include "isocal/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace isocal {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_unique_ids(const std::vector<std::string>& ids,
                      const std::string& what) {
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (const auto& s : ids) {
    require(!s.empty(), what + ": empty id");
    require(seen.insert(s).second, what + ": duplicate id '" + s + "'");
  }
}

}  // namespace

void SurvivalDataset::validate() const {
  require(!time.empty(), "dataset: needs at least one subject");
  require(id.size() == time.size() && event.size() == time.size(),
          "dataset: column lengths differ");
  require(p >= 0 && x.size() == static_cast<size_t>(p) * time.size(),
          "dataset: covariate block has wrong shape");
  check_unique_ids(id, "dataset");
  for (size_t i = 0; i < time.size(); ++i) {
    require(std::isfinite(time[i]) && time[i] > 0.0,
            "dataset: time must be positive and finite (row " +
                std::to_string(i + 1) + ")");
    require(event[i] == 0 || event[i] == 1,
            "dataset: event flag must be 0 or 1 (row " + std::to_string(i + 1) +
                ")");
  }
  for (double v : x) require(std::isfinite(v), "dataset: non-finite covariate");
}

void TimeGrid::validate() const {
  require(!times.empty(), "time grid: empty");
  double prev = 0.0;
  for (double t : times) {
    require(std::isfinite(t) && t > prev, "time grid: times must be positive, finite and strictly increasing");
    prev = t;
  }
}

void RiskScores::validate() const {
  require(!value.empty() && id.size() == value.size(),
          "risk scores: column lengths differ or empty");
  check_unique_ids(id, "risk scores");
  for (double v : value) require(std::isfinite(v), "risk scores: non-finite value");
}

void StepCumulativeHazard::validate() const {
  require(times.size() == increments.size(), "cumulative hazard: length mismatch");
  double prev = 0.0;
  for (size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]) && times[i] > prev,
            "cumulative hazard: jump times must be positive and strictly increasing");
    prev = times[i];
    require(std::isfinite(increments[i]) && increments[i] >= 0.0,
            "cumulative hazard: increments must be >= 0");
  }
}

double StepCumulativeHazard::value_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  double s = 0.0;
  for (size_t i = 0; i < static_cast<size_t>(it - times.begin()); ++i) {
    s += increments[i];
  }
  return s;
}

void SurvivalProbabilityGrid::validate() const {
  grid.validate();
  require(!subjects.empty(), "probability grid: no subjects");
  check_unique_ids(subjects, "probability grid");
  const int K = grid.size();
  require(probs.size() == static_cast<size_t>(subjects.size()) * K,
          "probability grid: matrix shape mismatch");
  for (size_t i = 0; i < subjects.size(); ++i) {
    const double* row = probs.data() + i * K;
    for (int k = 0; k < K; ++k) {
      require(std::isfinite(row[k]) && row[k] > 0.0 && row[k] <= 1.0,
              "probability grid: entries must lie in (0,1] (subject '" +
                  subjects[i] + "')");
      if (k > 0) {
        require(row[k] <= row[k - 1] + 1e-12,
                "probability grid: row increases in time (subject '" +
                    subjects[i] + "')");
      }
    }
  }
}

std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::rw: return "rw";
    case Estimator::rw_plus: return "rw+";
    case Estimator::ht: return "ht";
    case Estimator::ht_plus: return "ht+";
    case Estimator::dr: return "dr";
  }
  throw std::invalid_argument("estimator_name: bad enum value");
}

Estimator estimator_from_name(const std::string& name) {
  if (name == "rw") return Estimator::rw;
  if (name == "rw+") return Estimator::rw_plus;
  if (name == "ht") return Estimator::ht;
  if (name == "ht+") return Estimator::ht_plus;
  if (name == "dr") return Estimator::dr;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

void PseudoOutcomeMatrix::validate() const {
  grid.validate();
  require(!subjects.empty(), "pseudo outcomes: no subjects");
  require(values.size() == static_cast<size_t>(grid.size()) * subjects.size(),
          "pseudo outcomes: matrix shape mismatch");
  for (double v : values) {
    require(std::isfinite(v), "pseudo outcomes: non-finite value");
  }
}

void CalibratedSurface::validate() const {
  grid.validate();
  require(!risks.empty(), "surface: no risk rows");
  require(surface.size() == static_cast<size_t>(risks.size()) * grid.size(),
          "surface: matrix shape mismatch");
  for (size_t i = 0; i + 1 < risks.size(); ++i) {
    require(risks[i] <= risks[i + 1], "surface: risks must be sorted ascending");
  }
  for (double r : risks) require(std::isfinite(r), "surface: non-finite risk");
  const int K = grid.size();
  const int nr = n();
  for (int i = 0; i < nr; ++i) {
    const double* row = surface.data() + static_cast<size_t>(i) * K;
    for (int k = 0; k < K; ++k) {
      require(std::isfinite(row[k]) && row[k] >= 0.0 && row[k] <= 1.0,
              "surface: entries must lie in [0,1]");
      if (k > 0) {
        require(row[k] <= row[k - 1] + 1e-8, "surface: row increases in time");
      }
    }
  }
  for (int i = 0; i + 1 < nr; ++i) {
    const double* a = surface.data() + static_cast<size_t>(i) * K;
    const double* b = a + K;
    for (int k = 0; k < K; ++k) {
      require(b[k] <= a[k] + 1e-8, "surface: column increases in risk");
    }
  }
}

}  // namespace isocal
