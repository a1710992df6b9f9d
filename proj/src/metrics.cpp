#include "isocal/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "isocal/calibrate.hpp"
#include "isocal/io.hpp"
#include "isocal/threads.hpp"

namespace isocal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest index with times[k] <= t, or -1 when t precedes the grid.
int step_index(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<int>(it - times.begin()) - 1;
}

double step_value(const std::vector<double>& times, const double* row,
                  double t) {
  const int k = step_index(times, t);
  return k < 0 ? 1.0 : row[k];
}

// Observed outcome as each evaluation mode sees it: an outcome time, an
// event indicator, and the inverse-censoring mass attached to the event leg.
struct Outcome {
  double time = 0.0;
  bool event = false;
  double mass = 0.0;  // weight on the event leg; already includes the flag
};

struct Checked {
  int n = 0;
  bool ipcw = false;
};

// Cheap structural checks: presence, alignment and roles.
Checked check_shallow(const MetricInputs& in) {
  if (!in.test || !in.predicted)
    throw std::invalid_argument("metrics: test data and predictions are required");
  if (in.predicted->subjects != in.test->id)
    throw std::invalid_argument(
        "metrics: prediction rows are not aligned with the test subjects");
  Checked c;
  c.n = in.test->n();
  c.ipcw = in.mode == EvalMode::ipcw;
  if (c.ipcw) {
    if (!in.censoring)
      throw std::invalid_argument(
          "metrics: ipcw mode needs a censoring-survival grid");
    if (in.censoring->role != GridRole::censoring)
      throw std::invalid_argument("metrics: censoring grid has the wrong role");
    if (in.censoring->subjects != in.test->id)
      throw std::invalid_argument(
          "metrics: censoring rows are not aligned with the test subjects");
  }
  if (in.mode == EvalMode::oracle) {
    if (!in.true_event_times)
      throw std::invalid_argument("metrics: oracle mode needs true event times");
    if (static_cast<int>(in.true_event_times->size()) != c.n)
      throw std::invalid_argument(
          "metrics: true event times are not aligned with the test subjects");
  }
  return c;
}

// Full value validation, O(n x K); done once per metric call but only once
// per report, since a report makes a dozen passes over the same inputs.
Checked check_common(const MetricInputs& in) {
  const Checked c = check_shallow(in);
  in.test->validate();
  in.predicted->validate();
  if (c.ipcw) in.censoring->validate();
  if (in.mode == EvalMode::oracle) {
    for (double t : *in.true_event_times)
      if (!std::isfinite(t) || t <= 0.0)
        throw std::invalid_argument("metrics: true event times must be positive");
  }
  return c;
}

Outcome outcome_for(const MetricInputs& in, int i) {
  Outcome o;
  switch (in.mode) {
    case EvalMode::oracle:
      o.time = (*in.true_event_times)[i];
      o.event = true;
      o.mass = 1.0;
      break;
    case EvalMode::naive:
      o.time = in.test->time[i];
      o.event = in.test->event[i] != 0;
      o.mass = o.event ? 1.0 : 0.0;
      break;
    case EvalMode::ipcw: {
      o.time = in.test->time[i];
      o.event = in.test->event[i] != 0;
      const auto& g = *in.censoring;
      const double* row = g.probs.data() + static_cast<size_t>(i) * g.grid.size();
      o.mass = o.event ? 1.0 / step_value(g.grid.times, row, o.time) : 0.0;
      break;
    }
  }
  return o;
}

// Integral of 1/G over [lo, hi) for one subject's step censoring curve;
// 1 outside ipcw mode.
double inverse_g_integral(const MetricInputs& in, int i, double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (in.mode != EvalMode::ipcw) return hi - lo;
  const auto& g = *in.censoring;
  const auto& gt = g.grid.times;
  const int K = g.grid.size();
  const double* row = g.probs.data() + static_cast<size_t>(i) * K;
  double acc = 0.0, a = lo;
  int j = step_index(gt, lo);
  while (true) {
    const double b = (j + 1 < K && gt[j + 1] < hi) ? gt[j + 1] : hi;
    acc += (b - a) / (j < 0 ? 1.0 : row[j]);
    if (b >= hi) return acc;
    a = b;
    ++j;
  }
}

void check_t_max(double t_max, const char* who) {
  if (!std::isfinite(t_max) || t_max <= 0.0)
    throw std::invalid_argument(std::string(who) + ": t_max must be positive");
}

// Index of the predicted tau-quantile in the curve's grid, or -1 when the
// curve never reaches 1 - tau at a grid time <= t_max.
int quantile_index(const PredictionCurves& pred, int i, double tau,
                   double t_max) {
  const int K = pred.grid.size();
  const auto& times = pred.grid.times;
  const double* row = pred.values.data() + static_cast<size_t>(i) * K;
  const double level = 1.0 - tau;
  for (int k = 0; k < K && times[k] <= t_max; ++k)
    if (row[k] <= level) return k;
  return -1;
}

std::string no_comma(const std::string& s, const char* what) {
  if (s.find(',') != std::string::npos || s.find('"') != std::string::npos ||
      s.find('\n') != std::string::npos)
    throw std::invalid_argument(std::string("metric report: ") + what +
                                " tag may not contain commas, quotes or "
                                "newlines");
  return s;
}

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double null_or_number(const nlohmann::json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

}  // namespace

void PredictionCurves::validate() const {
  grid.validate();
  if (subjects.empty()) throw std::invalid_argument("prediction curves: no subjects");
  const int K = grid.size();
  if (values.size() != subjects.size() * static_cast<size_t>(K))
    throw std::invalid_argument("prediction curves: value count does not match n x K");
  for (int i = 0; i < n(); ++i) {
    for (int k = 0; k < K; ++k) {
      const double v = at(i, k);
      if (!std::isfinite(v) || v < -1e-12 || v > 1.0 + 1e-12)
        throw std::invalid_argument(
            "prediction curves: values must lie in [0,1]");
      if (k > 0 && v > at(i, k - 1) + 1e-8)
        throw std::invalid_argument(
            "prediction curves: row " + subjects[i] + " increases over time");
    }
  }
}

PredictionCurves curves_from_grid(const SurvivalProbabilityGrid& g) {
  g.validate();
  PredictionCurves c;
  c.grid = g.grid;
  c.subjects = g.subjects;
  c.values = g.probs;
  return c;
}

PredictionCurves curves_from_surface(const CalibratedSurface& surf,
                                     const std::vector<std::string>& subject_ids,
                                     const std::vector<double>& risks,
                                     const TimeGrid& grid) {
  surf.validate();
  grid.validate();
  if (subject_ids.size() != risks.size())
    throw std::invalid_argument(
        "curves_from_surface: one risk per subject id is required");
  const int n = static_cast<int>(risks.size());
  const int K = grid.size();
  for (double r : risks)
    if (!std::isfinite(r))
      throw std::invalid_argument("curves_from_surface: risks must be finite");
  PredictionCurves out;
  out.grid = grid;
  out.subjects = subject_ids;
  out.values.resize(static_cast<size_t>(n) * K);

  const bool same_grid = grid.times == surf.grid.times;
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int i = 0; i < n; ++i) {
    double* dst = out.values.data() + static_cast<size_t>(i) * K;
    if (same_grid) {
      // At grid nodes the time direction is exact, so only the risk
      // direction of predict() remains; replicate its clamped lerp.
      const double r =
          std::min(std::max(risks[i], surf.risks.front()), surf.risks.back());
      int hi;
      if (surf.interpolation == Interpolation::step) {
        hi = static_cast<int>(std::upper_bound(surf.risks.begin(),
                                               surf.risks.end(), r) -
                              surf.risks.begin() - 1);
        const double* row = surf.surface.data() + static_cast<size_t>(hi) * K;
        std::copy(row, row + K, dst);
        continue;
      }
      hi = static_cast<int>(
          std::lower_bound(surf.risks.begin(), surf.risks.end(), r) -
          surf.risks.begin());
      const double* rh = surf.surface.data() + static_cast<size_t>(hi) * K;
      if (surf.risks[hi] == r) {
        std::copy(rh, rh + K, dst);
        continue;
      }
      const double* rl = rh - K;
      const double a =
          (r - surf.risks[hi - 1]) / (surf.risks[hi] - surf.risks[hi - 1]);
      for (int k = 0; k < K; ++k) {
        const double v = rl[k] + a * (rh[k] - rl[k]);
        dst[k] = std::min(rl[k], std::max(rh[k], v));
      }
    } else {
      for (int k = 0; k < K; ++k) dst[k] = predict(surf, risks[i], grid.times[k]);
    }
  }
  out.validate();
  return out;
}

std::string eval_mode_name(EvalMode m) {
  switch (m) {
    case EvalMode::ipcw: return "ipcw";
    case EvalMode::naive: return "naive";
    case EvalMode::oracle: return "oracle";
  }
  throw std::logic_error("unknown evaluation mode");
}

EvalMode eval_mode_from_name(const std::string& name) {
  if (name == "ipcw") return EvalMode::ipcw;
  if (name == "naive") return EvalMode::naive;
  if (name == "oracle") return EvalMode::oracle;
  throw std::invalid_argument("unknown evaluation mode: " + name);
}

double c_index(const std::vector<double>& risks,
               const std::vector<double>& times,
               const std::vector<std::uint8_t>& events) {
  const int n = static_cast<int>(times.size());
  if (n < 2 || risks.size() != times.size() || events.size() != times.size())
    throw std::invalid_argument(
        "c_index: needs >= 2 subjects with aligned risks, times and events");
  // Half-units keep the tally integral, so the result is exact and the
  // parallel reduction order cannot matter.
  std::int64_t numer2 = 0, pairs = 0;
#pragma omp parallel for schedule(static) num_threads(max_threads()) reduction(+ : numer2, pairs)
  for (int i = 0; i < n; ++i) {
    if (!events[i]) continue;
    for (int j = 0; j < n; ++j) {
      if (times[i] >= times[j]) continue;
      ++pairs;
      if (risks[i] > risks[j])
        numer2 += 2;
      else if (risks[i] == risks[j])
        numer2 += 1;
    }
  }
  if (pairs == 0) throw std::runtime_error("c_index: no comparable pairs");
  return static_cast<double>(numer2) / (2.0 * static_cast<double>(pairs));
}

namespace {

double aupit_impl(const MetricInputs& in, const Checked& c) {
  const auto& pt = in.predicted->grid.times;
  const int K = in.predicted->grid.size();

  std::vector<double> pit(c.n), w(c.n);
  for (int i = 0; i < c.n; ++i) {
    const Outcome o = outcome_for(in, i);
    const double* row = in.predicted->values.data() + static_cast<size_t>(i) * K;
    pit[i] = 1.0 - step_value(pt, row, o.time);
    w[i] = o.mass;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0))
    throw std::runtime_error(
        "aupit: every outcome weight is zero (no uncensored subjects)");

  std::vector<int> order(c.n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pit[a] < pit[b]; });

  // Exact area between the weighted step CDF and the diagonal:
  // q(x) = x|x|/2 antiderives |u - cdf| on each constant piece.
  auto q = [](double x) { return 0.5 * x * std::abs(x); };
  double area = 0.0, a = 0.0, cdf = 0.0;
  for (int idx : order) {
    area += q(pit[idx] - cdf) - q(a - cdf);
    a = pit[idx];
    cdf += w[idx] / total;
  }
  area += q(1.0 - cdf) - q(a - cdf);
  return area;
}

QuantileScoreResult quantile_score_impl(const MetricInputs& in, double tau,
                                        double t_max, const Checked& c,
                                        const std::vector<std::uint8_t>* joint_mask) {
  if (!(tau > 0.0) || !(tau < 1.0))
    throw std::invalid_argument("quantile_score: tau must lie in (0,1)");
  check_t_max(t_max, "quantile_score");
  if (joint_mask && static_cast<int>(joint_mask->size()) != c.n)
    throw std::invalid_argument(
        "quantile_score: joint mask is not aligned with the test subjects");

  QuantileScoreResult res;
  res.included.assign(c.n, 0);
  std::vector<double> loss(c.n, 0.0);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int i = 0; i < c.n; ++i) {
    if (joint_mask && !(*joint_mask)[i]) continue;
    const int k = quantile_index(*in.predicted, i, tau, t_max);
    if (k < 0) continue;
    res.included[i] = 1;
    const double qhat = in.predicted->grid.times[k];
    const Outcome o = outcome_for(in, i);
    const double over =
        (1.0 - tau) * o.mass * std::max(0.0, qhat - o.time);
    const double under =
        tau * inverse_g_integral(in, i, qhat, std::min(o.time, t_max));
    loss[i] = over + under;
  }
  double sum = 0.0;
  for (int i = 0; i < c.n; ++i) {
    if (res.included[i]) {
      ++res.n_included;
      sum += loss[i];
    }
  }
  res.n_excluded = c.n - res.n_included;
  if (res.n_included == 0)
    throw std::runtime_error(
        "quantile_score: no curve reaches level " + format_double(1.0 - tau) +
        " by t_max=" + format_double(t_max));
  res.score = sum / res.n_included;
  return res;
}

double ibs_impl(const MetricInputs& in, double t_max, const Checked& c) {
  const auto& pt = in.predicted->grid.times;
  const int Kp = in.predicted->grid.size();

  std::vector<double> integral(c.n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int i = 0; i < c.n; ++i) {
    const Outcome o = outcome_for(in, i);
    const double* srow =
        in.predicted->values.data() + static_cast<size_t>(i) * Kp;
    const double cut = std::min(o.time, t_max);
    double acc = 0.0;

    // Event leg: mass * integral of S^2 from the outcome time to t_max.
    if (o.mass > 0.0 && o.time <= t_max) {
      double a = o.time;
      int j = step_index(pt, a);
      while (a < t_max) {
        const double b = (j + 1 < Kp && pt[j + 1] < t_max) ? pt[j + 1] : t_max;
        const double s = j < 0 ? 1.0 : srow[j];
        acc += o.mass * (b - a) * s * s;
        a = b;
        ++j;
      }
    }

    // At-risk leg: integral of (1-S)^2 / G over [0, min(outcome, t_max)),
    // walking the merged knots of the prediction and censoring grids.
    const bool ipcw = c.ipcw;
    const std::vector<double>* gt = ipcw ? &in.censoring->grid.times : nullptr;
    const int Kg = ipcw ? in.censoring->grid.size() : 0;
    const double* grow =
        ipcw ? in.censoring->probs.data() + static_cast<size_t>(i) * Kg : nullptr;
    double a = 0.0;
    int jp = -1, jg = -1;
    while (a < cut) {
      const double next_p = jp + 1 < Kp ? pt[jp + 1] : kInf;
      const double next_g = ipcw && jg + 1 < Kg ? (*gt)[jg + 1] : kInf;
      const double b = std::min(std::min(next_p, next_g), cut);
      const double s = jp < 0 ? 1.0 : srow[jp];
      const double g = jg < 0 ? 1.0 : grow[jg];
      acc += (b - a) * (1.0 - s) * (1.0 - s) / g;
      if (b == next_p) ++jp;
      if (b == next_g) ++jg;
      a = b;
    }
    integral[i] = acc;
  }
  const double sum = std::accumulate(integral.begin(), integral.end(), 0.0);
  return sum / (static_cast<double>(c.n) * t_max);
}

}  // namespace

double aupit(const MetricInputs& in) {
  return aupit_impl(in, check_common(in));
}

std::vector<std::uint8_t> quantile_inclusion(const PredictionCurves& pred,
                                             double tau, double t_max) {
  pred.validate();
  auto masks = quantile_inclusion_masks(pred, {tau}, t_max);
  return std::move(masks.front());
}

std::vector<std::vector<std::uint8_t>> quantile_inclusion_masks(
    const PredictionCurves& pred, const std::vector<double>& taus,
    double t_max) {
  for (double tau : taus)
    if (!(tau > 0.0) || !(tau < 1.0))
      throw std::invalid_argument("quantile_inclusion: tau must lie in (0,1)");
  check_t_max(t_max, "quantile_inclusion");
  std::vector<std::vector<std::uint8_t>> masks(taus.size());
  for (auto& m : masks) m.assign(pred.n(), 0);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int i = 0; i < pred.n(); ++i)
    for (size_t ti = 0; ti < taus.size(); ++ti)
      masks[ti][i] = quantile_index(pred, i, taus[ti], t_max) >= 0 ? 1 : 0;
  return masks;
}

QuantileScoreResult quantile_score(const MetricInputs& in, double tau,
                                   double t_max,
                                   const std::vector<std::uint8_t>* joint_mask) {
  return quantile_score_impl(in, tau, t_max, check_common(in), joint_mask);
}

double ibs(const MetricInputs& in, double t_max) {
  check_t_max(t_max, "ibs");
  return ibs_impl(in, t_max, check_common(in));
}

void MetricReport::validate() const {
  no_comma(dataset, "dataset");
  no_comma(method, "method");
  if (n_test < 1) throw std::invalid_argument("metric report: n_test must be >= 1");
  if (!(t_max > 0.0)) throw std::invalid_argument("metric report: t_max must be positive");
  if (!std::isnan(c_index) && (c_index < 0.0 || c_index > 1.0))
    throw std::invalid_argument("metric report: c_index outside [0,1]");
  if (!std::isnan(aupit) && (aupit < 0.0 || aupit > 0.5 + 1e-12))
    throw std::invalid_argument("metric report: aupit outside [0,1/2]");
  if (!std::isnan(ibs) && ibs < 0.0)
    throw std::invalid_argument("metric report: ibs must be >= 0");
  double prev = 0.0;
  for (const auto& [tau, entry] : quantile_scores) {
    if (!(tau > prev) || !(tau < 1.0))
      throw std::invalid_argument(
          "metric report: tau levels must be strictly increasing in (0,1)");
    prev = tau;
    if (entry.n_included < 0 || entry.n_excluded < 0 ||
        entry.n_included + entry.n_excluded != n_test)
      throw std::invalid_argument(
          "metric report: inclusion counts at tau=" + format_double(tau) +
          " do not sum to the test size");
    if (!std::isnan(entry.score) && entry.score < 0.0)
      throw std::invalid_argument("metric report: quantile scores must be >= 0");
  }
}

MetricReport compute_metric_report(
    const MetricInputs& in, const std::vector<double>& risk_values,
    const std::vector<double>& taus, double t_max,
    const std::vector<std::vector<std::uint8_t>>* tau_masks) {
  check_t_max(t_max, "compute_metric_report");
  const Checked c = check_common(in);
  if (static_cast<int>(risk_values.size()) != c.n)
    throw std::invalid_argument(
        "compute_metric_report: risks are not aligned with the test subjects");
  if (tau_masks && tau_masks->size() != taus.size())
    throw std::invalid_argument(
        "compute_metric_report: one joint mask per tau level is required");

  MetricReport r;
  r.mode = in.mode;
  r.n_test = c.n;
  r.t_max = t_max;

  std::vector<std::uint8_t> ones;
  const std::vector<std::uint8_t>* events = &in.test->event;
  const std::vector<double>* times = &in.test->time;
  if (in.mode == EvalMode::oracle) {
    ones.assign(c.n, 1);
    events = &ones;
    times = in.true_event_times;
  }
  try {
    r.c_index = c_index(risk_values, *times, *events);
  } catch (const std::runtime_error& e) {
    r.c_index = kNaN;
    r.notes.push_back(std::string("c_index: ") + e.what());
  }
  try {
    r.aupit = aupit_impl(in, c);
  } catch (const std::runtime_error& e) {
    r.aupit = kNaN;
    r.notes.push_back(std::string("aupit: ") + e.what());
  }
  r.ibs = ibs_impl(in, t_max, c);
  for (size_t ti = 0; ti < taus.size(); ++ti) {
    QuantileScoreEntry entry;
    try {
      const auto* mask = tau_masks ? &(*tau_masks)[ti] : nullptr;
      const QuantileScoreResult qs =
          quantile_score_impl(in, taus[ti], t_max, c, mask);
      entry.score = qs.score;
      entry.n_included = qs.n_included;
      entry.n_excluded = qs.n_excluded;
    } catch (const std::runtime_error& e) {
      entry.score = kNaN;
      entry.n_included = 0;
      entry.n_excluded = c.n;
      r.notes.push_back("quantile_score tau=" + format_double(taus[ti]) + ": " +
                        e.what());
    }
    r.quantile_scores.emplace_back(taus[ti], entry);
  }
  r.validate();
  return r;
}

std::string metric_report_to_json(const MetricReport& r) {
  r.validate();
  nlohmann::json j;
  j["dataset"] = r.dataset;
  j["method"] = r.method;
  j["mode"] = eval_mode_name(r.mode);
  j["seed"] = r.seed;
  j["n_test"] = r.n_test;
  j["t_max"] = r.t_max;
  j["c_index"] = number_or_null(r.c_index);
  j["aupit"] = number_or_null(r.aupit);
  j["ibs"] = number_or_null(r.ibs);
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& [tau, entry] : r.quantile_scores) {
    qs.push_back({{"tau", tau},
                  {"score", number_or_null(entry.score)},
                  {"n_included", entry.n_included},
                  {"n_excluded", entry.n_excluded}});
  }
  j["quantile_scores"] = std::move(qs);
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

MetricReport metric_report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("metric report: bad JSON: ") +
                                e.what());
  }
  MetricReport r;
  try {
    r.dataset = j.at("dataset").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.mode = eval_mode_from_name(j.at("mode").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n_test = j.at("n_test").get<int>();
    r.t_max = j.at("t_max").get<double>();
    r.c_index = null_or_number(j.at("c_index"));
    r.aupit = null_or_number(j.at("aupit"));
    r.ibs = null_or_number(j.at("ibs"));
    for (const auto& q : j.at("quantile_scores")) {
      QuantileScoreEntry entry;
      entry.score = null_or_number(q.at("score"));
      entry.n_included = q.at("n_included").get<int>();
      entry.n_excluded = q.at("n_excluded").get<int>();
      r.quantile_scores.emplace_back(q.at("tau").get<double>(), entry);
    }
    if (j.contains("notes"))
      r.notes = j.at("notes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("metric report: bad field: ") +
                                e.what());
  }
  r.validate();
  return r;
}

std::string metric_report_csv_header(const MetricReport& r) {
  std::ostringstream out;
  out << "dataset,method,mode,seed,n_test,t_max,c_index,aupit,ibs";
  for (const auto& [tau, entry] : r.quantile_scores) {
    (void)entry;
    const std::string t = format_double(tau);
    out << ",qs_" << t << ",qs_" << t << "_included,qs_" << t << "_excluded";
  }
  return out.str();
}

std::string metric_report_csv_row(const MetricReport& r) {
  r.validate();
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  std::ostringstream out;
  out << r.dataset << ',' << r.method << ',' << eval_mode_name(r.mode) << ','
      << r.seed << ',' << r.n_test << ',' << format_double(r.t_max) << ','
      << cell(r.c_index) << ',' << cell(r.aupit) << ',' << cell(r.ibs);
  for (const auto& [tau, entry] : r.quantile_scores) {
    (void)tau;
    out << ',' << cell(entry.score) << ',' << entry.n_included << ','
        << entry.n_excluded;
  }
  return out.str();
}

}  // namespace isocal
