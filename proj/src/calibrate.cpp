#include "isocal/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "isocal/io.hpp"
#include "isocal/threads.hpp"

namespace isocal {

namespace {

double clipped(double v, double floor) { return v < floor ? floor : v; }

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Largest index with times[k] <= t, or -1 when t precedes the grid.
int step_index(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<int>(it - times.begin()) - 1;
}

void check_aligned(const SurvivalProbabilityGrid& g, const CalibrationInputs& in,
                   GridRole role, const char* what) {
  if (g.role != role)
    throw std::invalid_argument(std::string("calibrate: ") + what +
                                " has the wrong grid role");
  if (g.grid.times != in.grid->times)
    throw std::invalid_argument(std::string("calibrate: ") + what +
                                " is not evaluated on the shared time grid");
  if (g.subjects != in.cal_data->id)
    throw std::invalid_argument(std::string("calibrate: ") + what +
                                " rows are not aligned with the calibration "
                                "subjects");
}

void check_inputs(const CalibrationInputs& in, bool need_s) {
  if (!in.cal_data || !in.cal_risks || !in.g_hat || !in.grid)
    throw std::invalid_argument(
        "calibrate: cal_data, cal_risks, g_hat and grid are all required");
  in.grid->validate();
  if (in.cal_risks->id != in.cal_data->id)
    throw std::invalid_argument(
        "calibrate: risk scores are not aligned with the calibration data");
  if (!(in.clip_floor > 0.0) || !(in.clip_floor < 1.0))
    throw std::invalid_argument("calibrate: clip_floor must lie in (0,1)");
  check_aligned(*in.g_hat, in, GridRole::censoring, "g_hat");
  if (need_s) {
    if (!in.s_hat)
      throw std::invalid_argument(
          "calibrate: the doubly robust estimator needs an event-survival "
          "grid (s_hat)");
    check_aligned(*in.s_hat, in, GridRole::survival, "s_hat");
  }
}

// Ascending stable risk order with tie groups (exact equality).
struct RiskOrder {
  std::vector<int> order;         // position -> subject index
  std::vector<double> sorted;     // risk per position
  std::vector<int> group_of;      // position -> group id
  std::vector<int> group_start;   // group id -> first position, plus sentinel
};

RiskOrder sort_by_risk(const RiskScores& risks) {
  const int n = risks.n();
  RiskOrder ro;
  ro.order.resize(n);
  std::iota(ro.order.begin(), ro.order.end(), 0);
  std::stable_sort(ro.order.begin(), ro.order.end(), [&](int a, int b) {
    return risks.value[a] < risks.value[b];
  });
  ro.sorted.resize(n);
  ro.group_of.resize(n);
  for (int pos = 0; pos < n; ++pos) {
    ro.sorted[pos] = risks.value[ro.order[pos]];
    if (pos == 0 || ro.sorted[pos] != ro.sorted[pos - 1])
      ro.group_start.push_back(pos);
    ro.group_of[pos] = static_cast<int>(ro.group_start.size()) - 1;
  }
  ro.group_start.push_back(n);
  return ro;
}

// Exact grid position of every observed time; the grid is built to contain
// them, so a miss is a data error, not a tolerance question.
std::vector<int> observed_grid_index(const SurvivalDataset& cal,
                                     const std::vector<double>& times) {
  std::vector<int> idx(cal.n());
  for (int j = 0; j < cal.n(); ++j) {
    auto it = std::lower_bound(times.begin(), times.end(), cal.time[j]);
    if (it == times.end() || *it != cal.time[j])
      throw std::invalid_argument(
          "calibrate: observed time " + format_double(cal.time[j]) +
          " of subject " + cal.id[j] + " is not a member of the time grid");
    idx[j] = static_cast<int>(it - times.begin());
  }
  return idx;
}

// Replace every tied-risk row of the subjects-by-times matrix with the group
// mean. Averaging rows that sit between their monotone neighbours preserves
// both monotone directions, and makes tied risks share one curve exactly.
void pool_tied_rows(std::vector<double>& S, int K, const RiskOrder& ro) {
  const int ngroups = static_cast<int>(ro.group_start.size()) - 1;
  std::vector<double> mean(K);
  for (int g = 0; g < ngroups; ++g) {
    const int lo = ro.group_start[g], hi = ro.group_start[g + 1];
    if (hi - lo < 2) continue;
    std::fill(mean.begin(), mean.end(), 0.0);
    for (int pos = lo; pos < hi; ++pos)
      for (int k = 0; k < K; ++k) mean[k] += S[static_cast<size_t>(pos) * K + k];
    for (int k = 0; k < K; ++k) mean[k] /= (hi - lo);
    for (int pos = lo; pos < hi; ++pos)
      std::copy(mean.begin(), mean.end(), S.begin() + static_cast<size_t>(pos) * K);
  }
}

PseudoOutcomeMatrix make_matrix(const CalibrationInputs& in, Estimator which) {
  PseudoOutcomeMatrix m;
  m.estimator = which;
  m.grid = *in.grid;
  m.subjects = in.cal_data->id;
  m.values.assign(static_cast<size_t>(in.grid->size()) * in.cal_data->n(), 0.0);
  return m;
}

}  // namespace

TimeGrid build_time_grid(const SurvivalDataset& train, const SurvivalDataset& cal,
                         int n_dense) {
  if (n_dense < 1)
    throw std::invalid_argument("build_time_grid: n_dense must be positive");
  if (train.n() == 0 || cal.n() == 0)
    throw std::invalid_argument("build_time_grid: empty dataset");
  const double t_max = *std::max_element(cal.time.begin(), cal.time.end());
  if (!(t_max > 0.0))
    throw std::invalid_argument(
        "build_time_grid: degenerate calibration sample, maximum observed "
        "time is not positive");
  std::vector<double> ts;
  ts.reserve(static_cast<size_t>(n_dense) + train.n() + cal.n());
  for (int k = 1; k <= n_dense; ++k)
    ts.push_back(t_max * (static_cast<double>(k) / n_dense));
  ts.insert(ts.end(), train.time.begin(), train.time.end());
  ts.insert(ts.end(), cal.time.begin(), cal.time.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  TimeGrid grid{std::move(ts)};
  grid.validate();
  return grid;
}

double step_lookup(const SurvivalProbabilityGrid& g, int subject, double t) {
  const int k = step_index(g.grid.times, t);
  return k < 0 ? 1.0 : g.at(subject, k);
}

std::vector<double> rw_weights(const SurvivalDataset& cal,
                               const SurvivalProbabilityGrid& g_hat,
                               double clip_floor) {
  if (g_hat.n() != cal.n())
    throw std::invalid_argument("rw_weights: grid/data size mismatch");
  std::vector<double> w(cal.n());
  for (int i = 0; i < cal.n(); ++i)
    w[i] = cal.event[i]
               ? 1.0 / clipped(step_lookup(g_hat, i, cal.time[i]), clip_floor)
               : 0.0;
  return w;
}

std::vector<double> rw_plus_weights(const SurvivalDataset& cal,
                                    const SurvivalProbabilityGrid& g_hat,
                                    double t, double clip_floor) {
  if (g_hat.n() != cal.n())
    throw std::invalid_argument("rw_plus_weights: grid/data size mismatch");
  std::vector<double> w(cal.n());
  for (int i = 0; i < cal.n(); ++i) {
    if (cal.time[i] > t)
      w[i] = 1.0 / clipped(step_lookup(g_hat, i, t), clip_floor);
    else
      w[i] = cal.event[i]
                 ? 1.0 / clipped(step_lookup(g_hat, i, cal.time[i]), clip_floor)
                 : 0.0;
  }
  return w;
}

PseudoOutcomeMatrix ht_pseudo_outcomes(const CalibrationInputs& in) {
  check_inputs(in, false);
  const int n = in.cal_data->n(), K = in.grid->size();
  const auto& times = in.grid->times;
  PseudoOutcomeMatrix m = make_matrix(in, Estimator::ht);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int j = 0; j < n; ++j) {
    if (!in.cal_data->event[j]) continue;
    const double y = in.cal_data->time[j];
    const double wj =
        1.0 / clipped(step_lookup(*in.g_hat, j, y), in.clip_floor);
    for (int k = 0; k < K && times[k] < y; ++k)
      m.values[static_cast<size_t>(k) * n + j] = wj;
  }
  return m;
}

PseudoOutcomeMatrix ht_plus_pseudo_outcomes(const CalibrationInputs& in) {
  check_inputs(in, false);
  const int n = in.cal_data->n(), K = in.grid->size();
  const auto& times = in.grid->times;
  PseudoOutcomeMatrix m = make_matrix(in, Estimator::ht_plus);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int j = 0; j < n; ++j) {
    const double y = in.cal_data->time[j];
    for (int k = 0; k < K && times[k] < y; ++k)
      m.values[static_cast<size_t>(k) * n + j] =
          1.0 / clipped(in.g_hat->at(j, k), in.clip_floor);
  }
  return m;
}

PseudoOutcomeMatrix dr_pseudo_outcomes(const CalibrationInputs& in) {
  check_inputs(in, true);
  const int n = in.cal_data->n(), K = in.grid->size();
  const std::vector<int> yidx = observed_grid_index(*in.cal_data, in.grid->times);
  PseudoOutcomeMatrix m = make_matrix(in, Estimator::dr);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int j = 0; j < n; ++j) {
    const int yk = yidx[j];
    const double dj = in.cal_data->event[j] ? 1.0 : 0.0;
    double prev_s = 1.0;  // survival before the first grid time
    double corr = 0.0;    // running sum of dM(t_k) / (S(t_k) G(t_k))
    for (int k = 0; k < K; ++k) {
      const double sk = clipped(in.s_hat->at(j, k), in.clip_floor);
      if (k <= yk) {
        const double gk = clipped(in.g_hat->at(j, k), in.clip_floor);
        const double dlam = 1.0 - sk / prev_s;
        const double dm = (k == yk ? dj : 0.0) - (k < yk ? dlam : 0.0);
        corr += dm / (sk * gk);
      }
      m.values[static_cast<size_t>(k) * n + j] = sk * (1.0 - corr);
      prev_s = sk;
    }
  }
  return m;
}

CalibratedSurface fit_rw_isr(const CalibrationInputs& in, Estimator variant,
                             const DoublyMonotoneOptions& opt,
                             DoublyMonotoneResult* diag) {
  if (variant != Estimator::rw && variant != Estimator::rw_plus)
    throw std::invalid_argument("fit_rw_isr handles variants rw and rw+ only");
  if (diag) *diag = {};
  check_inputs(in, false);
  const SurvivalDataset& cal = *in.cal_data;
  const int n = cal.n(), K = in.grid->size();
  const auto& times = in.grid->times;
  const RiskOrder ro = sort_by_risk(*in.cal_risks);
  const int ngroups = static_cast<int>(ro.group_start.size()) - 1;

  // Degenerate-time detection. Uncensored subjects carry positive weight at
  // every horizon under both variants, so all weights can only vanish when
  // the calibration sample has no events at all.
  if (std::find(cal.event.begin(), cal.event.end(), std::uint8_t{1}) ==
      cal.event.end()) {
    const double y_max = *std::max_element(cal.time.begin(), cal.time.end());
    const int k0 = variant == Estimator::rw
                       ? 0
                       : static_cast<int>(std::lower_bound(times.begin(),
                                                           times.end(), y_max) -
                                          times.begin());
    if (k0 < K)
      throw std::invalid_argument(
          "fit_rw_isr: every weight is zero at grid time t=" +
          format_double(times[k0]) +
          " (no uncensored calibration subjects)");
  }

  // Time-constant pieces: weight of the "observed outcome" branch per subject.
  std::vector<double> inv_gy(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (cal.event[i])
      inv_gy[i] =
          1.0 / clipped(step_lookup(*in.g_hat, i, cal.time[i]), in.clip_floor);

  std::vector<int> group_len(ngroups);
  for (int g = 0; g < ngroups; ++g)
    group_len[g] = ro.group_start[g + 1] - ro.group_start[g];

  std::vector<double> S(static_cast<size_t>(n) * K);
#pragma omp parallel num_threads(max_threads())
  {
    PavaWorkspace ws;
    ws.resize(ngroups);
    std::vector<double> gw(ngroups), gwy(ngroups), gsy(ngroups), y(ngroups),
        w(ngroups), fit(ngroups);
#pragma omp for schedule(static)
    for (int k = 0; k < K; ++k) {
      std::fill(gw.begin(), gw.end(), 0.0);
      std::fill(gwy.begin(), gwy.end(), 0.0);
      std::fill(gsy.begin(), gsy.end(), 0.0);
      for (int pos = 0; pos < n; ++pos) {
        const int i = ro.order[pos];
        const double target = cal.time[i] > times[k] ? 1.0 : 0.0;
        double wi;
        if (variant == Estimator::rw)
          wi = inv_gy[i];
        else
          wi = cal.time[i] > times[k]
                   ? 1.0 / clipped(in.g_hat->at(i, k), in.clip_floor)
                   : inv_gy[i];
        const int g = ro.group_of[pos];
        gw[g] += wi;
        gwy[g] += wi * target;
        gsy[g] += target;
      }
      for (int g = 0; g < ngroups; ++g) {
        w[g] = gw[g];
        y[g] = gw[g] > 0.0 ? gwy[g] / gw[g] : gsy[g] / group_len[g];
      }
      pava_nonincreasing_run(y.data(), w.data(), ngroups, fit.data(), ws);
      for (int pos = 0; pos < n; ++pos)
        S[static_cast<size_t>(pos) * K + k] = fit[ro.group_of[pos]];
    }
  }

  if (variant == Estimator::rw) {
    // Time-constant weights with targets non-increasing in t make every row
    // non-increasing already; anything beyond pooling round-off is a bug.
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 1; k < K; ++k)
        worst = std::max(worst, S[static_cast<size_t>(i) * K + k] -
                                    S[static_cast<size_t>(i) * K + k - 1]);
    if (worst > 1e-10)
      throw std::runtime_error(
          "fit_rw_isr: internal error, rw surface is not non-increasing in "
          "time (violation " +
          format_double(worst) + ")");
    for (int i = 0; i < n; ++i)
      for (int k = 1; k < K; ++k) {
        double* row = S.data() + static_cast<size_t>(i) * K;
        if (row[k] > row[k - 1]) row[k] = row[k - 1];
      }
  } else {
    auto res = project_doubly_monotone(S, n, K, opt);
    if (diag) *diag = res;
  }
  for (double& v : S) v = clamp01(v);

  CalibratedSurface cs;
  cs.method = estimator_name(variant);
  cs.risks = ro.sorted;
  cs.grid = *in.grid;
  cs.surface = std::move(S);
  cs.interpolation = Interpolation::bilinear;
  cs.validate();
  return cs;
}

CalibratedSurface fit_pseudo_isr(const CalibrationInputs& in, Estimator variant,
                                 const DoublyMonotoneOptions& opt,
                                 DoublyMonotoneResult* diag) {
  PseudoOutcomeMatrix m;
  switch (variant) {
    case Estimator::ht:
      m = ht_pseudo_outcomes(in);
      break;
    case Estimator::ht_plus:
      m = ht_plus_pseudo_outcomes(in);
      break;
    case Estimator::dr:
      m = dr_pseudo_outcomes(in);
      break;
    default:
      throw std::invalid_argument(
          "fit_pseudo_isr handles variants ht, ht+ and dr only");
  }
  const int n = in.cal_data->n(), K = in.grid->size();
  const RiskOrder ro = sort_by_risk(*in.cal_risks);

  std::vector<double> S(static_cast<size_t>(n) * K);
  for (int pos = 0; pos < n; ++pos) {
    const int j = ro.order[pos];
    for (int k = 0; k < K; ++k)
      S[static_cast<size_t>(pos) * K + k] =
          m.values[static_cast<size_t>(k) * n + j];
  }
  pool_tied_rows(S, K, ro);
  auto res = project_doubly_monotone(S, n, K, opt);
  if (diag) *diag = res;
  for (double& v : S) v = clamp01(v);
  pool_tied_rows(S, K, ro);

  CalibratedSurface cs;
  cs.method = estimator_name(variant);
  cs.risks = ro.sorted;
  cs.grid = *in.grid;
  cs.surface = std::move(S);
  cs.interpolation = Interpolation::bilinear;
  cs.validate();
  return cs;
}

double predict(const CalibratedSurface& s, double risk, double t) {
  if (!std::isfinite(risk) || !std::isfinite(t) || t < 0.0)
    throw std::invalid_argument("predict: risk must be finite and t >= 0");
  const int n = s.n(), K = s.grid.size();
  const auto& times = s.grid.times;
  if (t <= 0.0) return 1.0;

  // One row evaluated at t. Interpolated values are clamped into the cell's
  // own range so that queries stay monotone across cell boundaries.
  auto row_at = [&](int i) {
    const double* row = s.surface.data() + static_cast<size_t>(i) * K;
    if (s.interpolation == Interpolation::step) {
      const int k = step_index(times, t);
      return k < 0 ? 1.0 : row[k];
    }
    if (t >= times[K - 1]) return row[K - 1];
    const int hi = static_cast<int>(
        std::lower_bound(times.begin(), times.end(), t) - times.begin());
    if (times[hi] == t) return row[hi];
    const double t_lo = hi == 0 ? 0.0 : times[hi - 1];
    const double v_lo = hi == 0 ? 1.0 : row[hi - 1];
    const double v_hi = row[hi];
    const double v = v_lo + (t - t_lo) / (times[hi] - t_lo) * (v_hi - v_lo);
    return std::min(v_lo, std::max(v_hi, v));
  };

  const double r = std::min(std::max(risk, s.risks.front()), s.risks.back());
  if (s.interpolation == Interpolation::step) {
    const int i = static_cast<int>(
        std::upper_bound(s.risks.begin(), s.risks.end(), r) - s.risks.begin() -
        1);
    return row_at(i);
  }
  const int hi = static_cast<int>(
      std::lower_bound(s.risks.begin(), s.risks.end(), r) - s.risks.begin());
  if (s.risks[hi] == r) return row_at(hi);
  const double v_lo = row_at(hi - 1);
  const double v_hi = row_at(hi);
  const double a = (r - s.risks[hi - 1]) / (s.risks[hi] - s.risks[hi - 1]);
  const double v = v_lo + a * (v_hi - v_lo);
  (void)n;
  return std::min(v_lo, std::max(v_hi, v));
}

}  // namespace isocal
