#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "isocal/calibrate.hpp"
#include "isocal/metrics.hpp"
#include "isocal/rng.hpp"
#include "isocal/simulate.hpp"
#include "isocal/types.hpp"

using namespace isocal;

namespace {

std::vector<std::string> make_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "m%02d", i);
    ids.push_back(buf);
  }
  return ids;
}

SurvivalDataset make_data(const std::vector<double>& t,
                          const std::vector<int>& e) {
  SurvivalDataset d;
  d.p = 0;
  d.id = make_ids(static_cast<int>(t.size()));
  d.time = t;
  for (int v : e) d.event.push_back(static_cast<std::uint8_t>(v));
  return d;
}

PredictionCurves make_pred(const std::vector<double>& times,
                           const std::vector<std::vector<double>>& rows) {
  PredictionCurves p;
  p.grid.times = times;
  p.subjects = make_ids(static_cast<int>(rows.size()));
  for (const auto& r : rows) p.values.insert(p.values.end(), r.begin(), r.end());
  return p;
}

SurvivalProbabilityGrid make_cens(const std::vector<double>& times,
                                  const std::vector<std::vector<double>>& rows) {
  SurvivalProbabilityGrid g;
  g.role = GridRole::censoring;
  g.grid.times = times;
  g.subjects = make_ids(static_cast<int>(rows.size()));
  for (const auto& r : rows) g.probs.insert(g.probs.end(), r.begin(), r.end());
  return g;
}

// Seven-subject censored batch with exact-decimal curves; every expected
// value below was computed by exact piecewise integration of the step
// functions, independently of the implementation.
struct CensoredBatch {
  std::vector<double> pt{0.5, 1.0, 1.5, 2.5, 3.0, 4.0, 5.5, 7.0, 9.0};
  std::vector<std::vector<double>> s{
      {1.00, 0.90, 0.80, 0.70, 0.60, 0.50, 0.40, 0.30, 0.20},
      {0.95, 0.85, 0.80, 0.75, 0.55, 0.45, 0.35, 0.25, 0.10},
      {0.90, 0.80, 0.64, 0.50, 0.36, 0.25, 0.16, 0.09, 0.04},
      {1.00, 1.00, 0.95, 0.90, 0.85, 0.80, 0.75, 0.70, 0.65},
      {0.70, 0.60, 0.50, 0.40, 0.30, 0.20, 0.15, 0.10, 0.05},
      {0.98, 0.96, 0.94, 0.92, 0.90, 0.88, 0.86, 0.84, 0.82},
      {0.85, 0.75, 0.65, 0.55, 0.45, 0.35, 0.25, 0.15, 0.05}};
  std::vector<double> gt{0.8, 2.0, 3.5, 6.0, 8.5};
  std::vector<std::vector<double>> g{{0.95, 0.85, 0.70, 0.55, 0.40},
                                     {0.90, 0.80, 0.65, 0.50, 0.35},
                                     {0.92, 0.84, 0.76, 0.68, 0.60},
                                     {0.88, 0.77, 0.66, 0.55, 0.44},
                                     {0.96, 0.90, 0.82, 0.74, 0.66},
                                     {0.94, 0.86, 0.78, 0.70, 0.62},
                                     {0.91, 0.83, 0.73, 0.63, 0.53}};
  std::vector<double> y{1.2, 3.2, 2.5, 6.5, 0.4, 8.0, 4.2};
  std::vector<int> d{1, 0, 1, 0, 1, 1, 1};
  std::vector<double> truth{1.0, 4.5, 2.5, 9.5, 0.6, 8.0, 4.0};
  double t_max = 7.0;

  SurvivalDataset data;
  PredictionCurves pred;
  SurvivalProbabilityGrid cens;

  CensoredBatch() {
    data = make_data(y, d);
    pred = make_pred(pt, s);
    cens = make_cens(gt, g);
  }

  MetricInputs inputs(EvalMode mode) const {
    MetricInputs in;
    in.test = &data;
    in.predicted = &pred;
    in.censoring = &cens;
    in.true_event_times = &truth;
    in.mode = mode;
    return in;
  }
};

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("c-index: hand enumeration, ties and degenerate cases") {
  // One censored subject; 4 comparable pairs, one risk tie.
  CHECK(c_index({1.0, 3.0, 2.0, 2.0}, {1, 2, 3, 4}, {1, 0, 1, 1}) == 0.125);
  // Higher risk always fails earlier.
  CHECK(c_index({4, 3, 2, 1}, {1, 2, 3, 4}, {1, 1, 1, 1}) == 1.0);
  // Equal risks: every pair is a half-win.
  CHECK(c_index({2, 2, 2, 2}, {1, 2, 3, 4}, {1, 1, 1, 1}) == 0.5);
  // Tied times are not comparable.
  CHECK(c_index({3, 2, 1}, {1, 1, 2}, {1, 1, 1}) == 1.0);
  // Strictly increasing transforms cannot change the value.
  const std::vector<double> r{2.0, 1.5, 3.0, 0.5, 3.5, 0.8, 2.4};
  const std::vector<double> t{1.2, 3.2, 2.5, 6.5, 0.4, 8.0, 4.2};
  const std::vector<std::uint8_t> e{1, 0, 1, 0, 1, 1, 1};
  const double base = c_index(r, t, e);
  CHECK(base == 15.0 / 17.0);
  std::vector<double> warped;
  for (double v : r) warped.push_back(std::exp(0.3 * v) - 7.0);
  CHECK(c_index(warped, t, e) == base);

  CHECK_THROWS_AS(c_index({1.0}, {1.0}, {1}), std::invalid_argument);
  // All censored: nobody can serve as the earlier event.
  CHECK_THROWS_AS(c_index({1, 2}, {1, 2}, {0, 0}), std::runtime_error);
}

TEST_CASE("aupit: frozen small cases") {
  // PITs {0.2,0.4,0.6,0.8}, unweighted.
  auto data = make_data({2, 2, 2, 2}, {1, 1, 1, 1});
  auto pred = make_pred({1.0}, {{0.8}, {0.6}, {0.4}, {0.2}});
  MetricInputs in;
  in.test = &data;
  in.predicted = &pred;
  in.mode = EvalMode::naive;
  CHECK(aupit(in) == doctest::Approx(0.075).epsilon(1e-14));
  CHECK(aupit(in) <= 1.0 / 5.0);  // near-uniform bound m/(m+1)

  // Every PIT 0.5: area is two triangles of 1/8.
  auto data6 = make_data({2, 2, 2, 2, 2, 2}, {1, 1, 1, 1, 1, 1});
  auto pred6 = make_pred({1.0}, {{0.5}, {0.5}, {0.5}, {0.5}, {0.5}, {0.5}});
  MetricInputs in6;
  in6.test = &data6;
  in6.predicted = &pred6;
  in6.mode = EvalMode::naive;
  CHECK(aupit(in6) == doctest::Approx(0.25).epsilon(1e-14));

  // IPCW masses 1/G(Y) = {1,2,3,2} on PITs {0.1,0.5,0.5,0.9}.
  auto predw = make_pred({1.0}, {{0.9}, {0.5}, {0.5}, {0.1}});
  auto censw = make_cens({1.0}, {{1.0}, {0.5}, {1.0 / 3.0}, {0.5}});
  MetricInputs inw;
  inw.test = &data;
  inw.predicted = &predw;
  inw.censoring = &censw;
  inw.mode = EvalMode::ipcw;
  CHECK(aupit(inw) == doctest::Approx(0.123125).epsilon(1e-12));

  // No uncensored subjects: undefined in ipcw/naive, fine in oracle mode.
  auto cens_only = make_data({2, 3}, {0, 0});
  auto pred2 = make_pred({1.0}, {{0.8}, {0.4}});
  auto cens2 = make_cens({1.0}, {{0.9}, {0.9}});
  std::vector<double> truths{1.5, 2.5};
  MetricInputs inc;
  inc.test = &cens_only;
  inc.predicted = &pred2;
  inc.censoring = &cens2;
  inc.true_event_times = &truths;
  inc.mode = EvalMode::ipcw;
  CHECK_THROWS_AS(aupit(inc), std::runtime_error);
  inc.mode = EvalMode::naive;
  CHECK_THROWS_AS(aupit(inc), std::runtime_error);
  inc.mode = EvalMode::oracle;
  CHECK(aupit(inc) >= 0.0);
}

TEST_CASE("censored batch: frozen values across all three modes") {
  CensoredBatch b;

  CHECK(aupit(b.inputs(EvalMode::ipcw)) ==
        doctest::Approx(0.19883788329961585).epsilon(1e-12));
  CHECK(aupit(b.inputs(EvalMode::naive)) ==
        doctest::Approx(0.218).epsilon(1e-12));
  CHECK(aupit(b.inputs(EvalMode::oracle)) ==
        doctest::Approx(0.13764081632653061).epsilon(1e-12));

  CHECK(ibs(b.inputs(EvalMode::ipcw), b.t_max) ==
        doctest::Approx(0.11278719757055081).epsilon(1e-12));
  CHECK(ibs(b.inputs(EvalMode::naive), b.t_max) ==
        doctest::Approx(0.10075306122448979).epsilon(1e-12));
  CHECK(ibs(b.inputs(EvalMode::oracle), b.t_max) ==
        doctest::Approx(0.11485).epsilon(1e-12));

  const std::vector<std::uint8_t> mask30{1, 1, 1, 1, 1, 0, 1};
  const std::vector<std::uint8_t> mask50{1, 1, 1, 0, 1, 0, 1};
  const std::vector<std::uint8_t> mask75{0, 1, 1, 0, 1, 0, 1};

  auto qs30 = quantile_score(b.inputs(EvalMode::ipcw), 0.3, b.t_max);
  CHECK(qs30.score == doctest::Approx(0.4065307860141793).epsilon(1e-12));
  CHECK(qs30.included == mask30);
  CHECK(qs30.n_included == 6);
  CHECK(qs30.n_excluded == 1);
  CHECK(quantile_score(b.inputs(EvalMode::oracle), 0.3, b.t_max).score ==
        doctest::Approx(0.43).epsilon(1e-12));

  auto qs50 = quantile_score(b.inputs(EvalMode::ipcw), 0.5, b.t_max);
  CHECK(qs50.score == doctest::Approx(0.56086821691958899).epsilon(1e-12));
  CHECK(qs50.included == mask50);
  CHECK(quantile_score(b.inputs(EvalMode::oracle), 0.5, b.t_max).score ==
        doctest::Approx(0.54).epsilon(1e-12));

  auto qs75 = quantile_score(b.inputs(EvalMode::ipcw), 0.75, b.t_max);
  CHECK(qs75.score == doctest::Approx(0.44790851272015658).epsilon(1e-12));
  CHECK(qs75.included == mask75);
  CHECK(quantile_score(b.inputs(EvalMode::oracle), 0.75, b.t_max).score ==
        doctest::Approx(0.55625).epsilon(1e-12));

  CHECK(quantile_inclusion(b.pred, 0.5, b.t_max) == mask50);
  auto masks = quantile_inclusion_masks(b.pred, {0.3, 0.5, 0.75}, b.t_max);
  CHECK(masks[0] == mask30);
  CHECK(masks[1] == mask50);
  CHECK(masks[2] == mask75);

  // Nobody's curve reaches 0.05 by t=7.
  CHECK_THROWS_AS(quantile_score(b.inputs(EvalMode::ipcw), 0.95, b.t_max),
                  std::runtime_error);
}

TEST_CASE("quantile score decomposes over subjects (joint masks)") {
  CensoredBatch b;
  // Restrict to subjects 1 and 2 via the joint mask...
  std::vector<std::uint8_t> keep{0, 1, 1, 0, 0, 0, 0};
  auto masked = quantile_score(b.inputs(EvalMode::ipcw), 0.5, b.t_max, &keep);
  CHECK(masked.n_included == 2);

  // ...which must equal scoring a dataset holding only those two rows.
  SurvivalDataset sub = make_data({b.y[1], b.y[2]}, {b.d[1], b.d[2]});
  sub.id = {b.data.id[1], b.data.id[2]};
  PredictionCurves spred = b.pred;
  spred.subjects = sub.id;
  spred.values.assign(b.pred.values.begin() + 9, b.pred.values.begin() + 27);
  SurvivalProbabilityGrid scens = b.cens;
  scens.subjects = sub.id;
  scens.probs.assign(b.cens.probs.begin() + 5, b.cens.probs.begin() + 15);
  MetricInputs in;
  in.test = &sub;
  in.predicted = &spred;
  in.censoring = &scens;
  in.mode = EvalMode::ipcw;
  CHECK(quantile_score(in, 0.5, b.t_max).score ==
        doctest::Approx(masked.score).epsilon(1e-15));
}

TEST_CASE("quantile score: single-subject hand case") {
  // q-hat = 6, Y = 4 uncensored, G = 1: overestimation leg (1-tau)(6-4),
  // underestimation empty.
  auto data = make_data({4.0}, {1});
  auto pred = make_pred({2.0, 6.0, 10.0}, {{0.9, 0.4, 0.2}});
  auto cens = make_cens({1.0}, {{1.0}});
  MetricInputs in;
  in.test = &data;
  in.predicted = &pred;
  in.censoring = &cens;
  in.mode = EvalMode::ipcw;
  auto qs = quantile_score(in, 0.5, 10.0);
  CHECK(qs.score == 1.0);
  CHECK(qs.n_included == 1);
}

TEST_CASE("step predictors: metrics invariant to refining the grid") {
  CensoredBatch b;
  // Insert knots carrying the left value (and 1 before the first knot);
  // the step function is unchanged, so every metric must be too.
  PredictionCurves fine;
  fine.subjects = b.pred.subjects;
  std::vector<double> ft;
  ft.push_back(0.25);
  for (size_t k = 0; k < b.pt.size(); ++k) {
    ft.push_back(b.pt[k]);
    if (k + 1 < b.pt.size()) ft.push_back(0.5 * (b.pt[k] + b.pt[k + 1]));
  }
  fine.grid.times = ft;
  for (int i = 0; i < 7; ++i) {
    fine.values.push_back(1.0);
    for (size_t k = 0; k < b.pt.size(); ++k) {
      fine.values.push_back(b.s[i][k]);
      if (k + 1 < b.pt.size()) fine.values.push_back(b.s[i][k]);
    }
  }
  MetricInputs in = b.inputs(EvalMode::ipcw);
  MetricInputs inf_ = b.inputs(EvalMode::ipcw);
  inf_.predicted = &fine;
  CHECK(quantile_score(inf_, 0.5, b.t_max).score ==
        doctest::Approx(quantile_score(in, 0.5, b.t_max).score).epsilon(1e-14));
  CHECK(quantile_score(inf_, 0.5, b.t_max).included ==
        quantile_score(in, 0.5, b.t_max).included);
  CHECK(ibs(inf_, b.t_max) == doctest::Approx(ibs(in, b.t_max)).epsilon(1e-14));
  CHECK(aupit(inf_) == doctest::Approx(aupit(in)).epsilon(1e-14));
}

TEST_CASE("ibs: constant half curve and zero-weight numerator invariance") {
  // S = 1/2 over effectively all of [0, t_max], one uncensored subject
  // halfway: both legs integrate to 1/4.
  auto data = make_data({5.0}, {1});
  auto pred = make_pred({1e-9}, {{0.5}});
  MetricInputs in;
  in.test = &data;
  in.predicted = &pred;
  in.mode = EvalMode::naive;
  CHECK(ibs(in, 10.0) == doctest::Approx(0.25).epsilon(1e-8));

  // A subject censored before every knot has zero mass on both legs, so the
  // summed integrand is unchanged (the plain mean shifts by the count).
  CensoredBatch b;
  const double base = ibs(b.inputs(EvalMode::ipcw), b.t_max);
  CensoredBatch aug;
  aug.data.id.push_back("m07");
  aug.data.time.push_back(0.1);
  aug.data.event.push_back(0);
  aug.pred.subjects.push_back("m07");
  aug.pred.values.insert(aug.pred.values.end(), 9, 1.0);
  aug.cens.subjects.push_back("m07");
  aug.cens.probs.insert(aug.cens.probs.end(), 5, 1.0);
  const double grown = ibs(aug.inputs(EvalMode::ipcw), aug.t_max);
  CHECK(grown * 8.0 == doctest::Approx(base * 7.0).epsilon(1e-13));
}

TEST_CASE("ibs equals the integrated quantile score when quantiles close") {
  // Censor-free batch whose curves reach exactly zero at t_max, so every
  // tau-quantile is defined and the identity holds up to quadrature error.
  const int n = 12, K = 200;
  const double t_max = 10.0;
  std::vector<double> times(K);
  // Divide last: knot 6 must compare equal to the literal 0.3 used in ys.
  for (int k = 0; k < K; ++k) times[k] = t_max * (k + 1) / K;
  std::vector<std::vector<double>> rows(n, std::vector<double>(K));
  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) {
    const double a = 0.4 + 0.3 * i;
    for (int k = 0; k < K; ++k)
      rows[i][k] = std::pow(1.0 - times[k] / t_max, a);
    rows[i][K - 1] = 0.0;
    ys[i] = 0.3 + 0.473 * i;
  }
  auto data = make_data(ys, std::vector<int>(n, 1));
  auto pred = make_pred(times, rows);
  auto cens = make_cens({2.0, 5.0, 8.0},
                        std::vector<std::vector<double>>(n, {1.0, 1.0, 1.0}));
  MetricInputs in;
  in.test = &data;
  in.predicted = &pred;
  in.censoring = &cens;
  in.mode = EvalMode::ipcw;

  const double v = ibs(in, t_max);
  CHECK(v == doctest::Approx(0.18638672202511244).epsilon(1e-7));
  CHECK(quantile_score(in, 0.5, t_max).score ==
        doctest::Approx(1.4303333333333332).epsilon(1e-9));
  CHECK(aupit(in) == doctest::Approx(0.048743598285572932).epsilon(1e-7));

  double integral = 0.0;
  for (int k = 1; k <= 99; ++k) {
    auto qs = quantile_score(in, k / 100.0, t_max);
    CHECK(qs.n_excluded == 0);
    integral += qs.score / 100.0;
  }
  CHECK(std::abs(v - 2.0 / t_max * integral) < 1e-3);
}

TEST_CASE("curves from a surface match predict() and copy exact rows") {
  CalibratedSurface surf;
  surf.method = "dr";
  surf.risks = {1.0, 2.0};
  surf.grid.times = {2.0, 4.0};
  surf.surface = {0.8, 0.4, 0.6, 0.2};
  surf.interpolation = Interpolation::bilinear;
  surf.validate();

  const std::vector<double> risks{0.5, 1.0, 1.25, 2.0, 3.0};
  // Same grid: the fast path must agree with predict at every node.
  auto same = curves_from_surface(surf, make_ids(5), risks, surf.grid);
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 2; ++k)
      CHECK(same.at(i, k) == predict(surf, risks[i], surf.grid.times[k]));
  CHECK(same.at(1, 0) == 0.8);  // exact risk hit copies the row
  CHECK(same.at(3, 1) == 0.2);

  // Finer grid goes through predict directly.
  TimeGrid finer;
  finer.times = {1.0, 2.0, 3.0, 4.0, 5.0};
  auto gen = curves_from_surface(surf, make_ids(5), risks, finer);
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 5; ++k)
      CHECK(gen.at(i, k) == predict(surf, risks[i], finer.times[k]));

  surf.interpolation = Interpolation::step;
  auto stepped = curves_from_surface(surf, make_ids(2), {1.0, 1.7}, surf.grid);
  CHECK(stepped.at(0, 0) == 0.8);
  CHECK(stepped.at(1, 0) == 0.8);  // 1.7 steps down to the risk-1 row
  CHECK(stepped.at(1, 1) == 0.4);
}

TEST_CASE("input validation") {
  CensoredBatch b;
  auto in = b.inputs(EvalMode::ipcw);
  in.censoring = nullptr;
  CHECK_THROWS_WITH_AS(aupit(in), doctest::Contains("censoring"),
                       std::invalid_argument);
  in = b.inputs(EvalMode::oracle);
  in.true_event_times = nullptr;
  CHECK_THROWS_WITH_AS(ibs(in, b.t_max), doctest::Contains("true event times"),
                       std::invalid_argument);

  auto misnamed = b.pred;
  misnamed.subjects[2] = "zz";
  in = b.inputs(EvalMode::naive);
  in.predicted = &misnamed;
  CHECK_THROWS_WITH_AS(aupit(in), doctest::Contains("aligned"),
                       std::invalid_argument);

  in = b.inputs(EvalMode::ipcw);
  CHECK_THROWS_AS(quantile_score(in, 0.0, b.t_max), std::invalid_argument);
  CHECK_THROWS_AS(quantile_score(in, 1.0, b.t_max), std::invalid_argument);
  CHECK_THROWS_AS(quantile_score(in, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ibs(in, -1.0), std::invalid_argument);
  std::vector<std::uint8_t> short_mask{1, 1};
  CHECK_THROWS_AS(quantile_score(in, 0.5, b.t_max, &short_mask),
                  std::invalid_argument);

  auto wrong_role = b.cens;
  wrong_role.role = GridRole::survival;
  in = b.inputs(EvalMode::ipcw);
  in.censoring = &wrong_role;
  CHECK_THROWS_WITH_AS(ibs(in, b.t_max), doctest::Contains("role"),
                       std::invalid_argument);
}

TEST_CASE("metric report: assembly, serialization round trip, rails") {
  CensoredBatch b;
  const std::vector<double> risks{2.0, 1.5, 3.0, 0.5, 3.5, 0.8, 2.4};
  const std::vector<double> taus{0.3, 0.5, 0.75, 0.95};
  auto in = b.inputs(EvalMode::ipcw);
  MetricReport r = compute_metric_report(in, risks, taus, b.t_max);
  r.dataset = "batch-a";
  r.method = "dr";
  r.seed = 11;

  CHECK(r.c_index == 15.0 / 17.0);
  CHECK(r.aupit == aupit(in));
  CHECK(r.ibs == ibs(in, b.t_max));
  CHECK(r.n_test == 7);
  CHECK(r.quantile_scores.size() == 4);
  CHECK(r.quantile_scores[0].second.score ==
        quantile_score(in, 0.3, b.t_max).score);
  CHECK(r.quantile_scores[1].second.n_included == 5);
  // tau = 0.95 is undefined here: null score, everyone excluded, a reason.
  CHECK(std::isnan(r.quantile_scores[3].second.score));
  CHECK(r.quantile_scores[3].second.n_excluded == 7);
  REQUIRE(r.notes.size() == 1);
  CHECK(r.notes[0].find("quantile_score") != std::string::npos);

  // Oracle mode swaps in latent times for the concordance ranking too.
  auto ino = b.inputs(EvalMode::oracle);
  MetricReport ro = compute_metric_report(ino, risks, {0.5}, b.t_max);
  CHECK(ro.c_index ==
        c_index(risks, b.truth, std::vector<std::uint8_t>(7, 1)));

  const std::string text = metric_report_to_json(r);
  MetricReport back = metric_report_from_json(text);
  CHECK(back.dataset == r.dataset);
  CHECK(back.method == r.method);
  CHECK(back.mode == r.mode);
  CHECK(back.seed == r.seed);
  CHECK(back.n_test == r.n_test);
  CHECK(back.t_max == r.t_max);
  CHECK(back.c_index == r.c_index);
  CHECK(back.aupit == r.aupit);
  CHECK(back.ibs == r.ibs);
  REQUIRE(back.quantile_scores.size() == r.quantile_scores.size());
  for (size_t i = 0; i < r.quantile_scores.size(); ++i) {
    CHECK(back.quantile_scores[i].first == r.quantile_scores[i].first);
    const auto& be = back.quantile_scores[i].second;
    const auto& re = r.quantile_scores[i].second;
    CHECK((std::isnan(be.score) ? std::isnan(re.score) : be.score == re.score));
    CHECK(be.n_included == re.n_included);
    CHECK(be.n_excluded == re.n_excluded);
  }
  CHECK(back.notes == r.notes);

  const std::string header = metric_report_csv_header(r);
  CHECK(header ==
        "dataset,method,mode,seed,n_test,t_max,c_index,aupit,ibs,"
        "qs_0.3,qs_0.3_included,qs_0.3_excluded,"
        "qs_0.5,qs_0.5_included,qs_0.5_excluded,"
        "qs_0.75,qs_0.75_included,qs_0.75_excluded,"
        "qs_0.95,qs_0.95_included,qs_0.95_excluded");
  const std::string row = metric_report_csv_row(r);
  CHECK(row.find("batch-a,dr,ipcw,11,7,7,") == 0);
  // the undefined tau=0.95 score serializes as an empty cell
  CHECK(row.substr(row.size() - 4) == ",0,7");
  CHECK(row.find(",,0,7") != std::string::npos);

  MetricReport bad = r;
  bad.aupit = 0.7;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = r;
  bad.quantile_scores[1].second.n_excluded += 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = r;
  bad.quantile_scores[1].first = 0.3;  // duplicate level
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = r;
  bad.method = "a,b";
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(metric_report_from_json("{"), std::invalid_argument);
}

TEST_CASE("ipcw metrics with the true censoring model approach oracle values") {
  // Bounded event times keep the inverse censoring weights bounded, so the
  // ipcw and oracle estimates of the same functional should close in on each
  // other as the sample grows.
  const double cap = 25.0, rate = 0.1, t_max = 25.0;
  const int K = 250;
  TimeGrid grid;
  for (int k = 1; k <= K; ++k) grid.times.push_back(cap * k / K);

  auto run = [&](int n, std::uint64_t seed, double* d_aupit, double* d_ibs) {
    SurvivalDataset data;
    data.p = 1;
    std::vector<double> truths(n);
    PredictionCurves pred;
    pred.grid = grid;
    SurvivalProbabilityGrid cens;
    cens.role = GridRole::censoring;
    cens.grid = grid;
    pred.values.resize(static_cast<size_t>(n) * K);
    cens.probs.resize(static_cast<size_t>(n) * K);
    for (int i = 0; i < n; ++i) {
      auto rng = substream(seed, static_cast<std::uint64_t>(i));
      const double x = rng.uniform(0.0, 4.0);
      const double t_raw =
          std::exp(setting_mu(2, &x) + 0.5 * rng.normal());
      const double t = std::min(t_raw, cap);
      const double c = rng.exponential(rate);
      char buf[16];
      std::snprintf(buf, sizeof buf, "v%06d", i);
      data.id.push_back(buf);
      data.time.push_back(std::min(t, c));
      data.event.push_back(t <= c ? 1 : 0);
      data.x.push_back(x);
      truths[i] = t;
      // Deliberately miscalibrated predictor: true curve to the power 0.8.
      for (int k = 0; k < K; ++k) {
        const double tt = grid.times[k];
        const double s = tt >= cap ? 0.0 : oracle_survival(2, &x, tt);
        pred.values[static_cast<size_t>(i) * K + k] = std::pow(s, 0.8);
        cens.probs[static_cast<size_t>(i) * K + k] = std::exp(-rate * tt);
      }
    }
    pred.subjects = data.id;
    cens.subjects = data.id;
    MetricInputs in;
    in.test = &data;
    in.predicted = &pred;
    in.censoring = &cens;
    in.true_event_times = &truths;
    in.mode = EvalMode::ipcw;
    const double a_i = aupit(in), b_i = ibs(in, t_max);
    in.mode = EvalMode::oracle;
    *d_aupit = std::abs(a_i - aupit(in));
    *d_ibs = std::abs(b_i - ibs(in, t_max));
  };

  double gap_small_a = 0.0, gap_small_b = 0.0;
  double gap_big_a = 0.0, gap_big_b = 0.0;
  for (std::uint64_t seed = 11; seed < 19; ++seed) {
    double da, db;
    run(1000, seed, &da, &db);
    gap_small_a += da;
    gap_small_b += db;
    run(10000, seed, &da, &db);
    gap_big_a += da;
    gap_big_b += db;
  }
  CHECK(gap_big_a < gap_small_a);
  CHECK(gap_big_b < gap_small_b);
}

}  // TEST_SUITE
