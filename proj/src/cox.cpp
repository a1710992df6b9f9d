#include "isocal/cox.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "isocal/threads.hpp"

namespace isocal {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SortedView {
  std::vector<int> desc;  // indices sorted by descending observed time
  int n_events = 0;
};

SortedView sort_by_time(const SurvivalDataset& ds) {
  SortedView v;
  v.desc.resize(ds.n());
  std::iota(v.desc.begin(), v.desc.end(), 0);
  std::stable_sort(v.desc.begin(), v.desc.end(), [&](int a, int b) {
    return ds.time[a] > ds.time[b];
  });
  for (int i = 0; i < ds.n(); ++i) v.n_events += ds.event[i];
  return v;
}

// Breslow partial log likelihood with optional score / negative Hessian.
// Walks descending time so the risk-set sums are plain accumulations; ties
// join the risk set before their event group is scored.
double partial_loglik(const SurvivalDataset& ds, const SortedView& sv,
                      const VectorXd& theta, VectorXd* score, MatrixXd* nhess) {
  const int p = ds.p;
  const int n = ds.n();
  double ll = 0.0;
  double s0 = 0.0;
  VectorXd s1 = VectorXd::Zero(p);
  MatrixXd s2 = MatrixXd::Zero(p, p);
  if (score) score->setZero();
  if (nhess) nhess->setZero();
  VectorXd xi(p), mu(p);
  int i = 0;
  while (i < n) {
    int j = i;
    const double t = ds.time[sv.desc[i]];
    while (j < n && ds.time[sv.desc[j]] == t) {
      const int idx = sv.desc[j];
      for (int k = 0; k < p; ++k) xi[k] = ds.row(idx)[k];
      const double eta = p > 0 ? theta.dot(xi) : 0.0;
      const double w = std::exp(eta);
      s0 += w;
      if (p > 0) {
        s1.noalias() += w * xi;
        if (nhess) s2.noalias() += w * xi * xi.transpose();
      }
      ++j;
    }
    int d = 0;
    double sum_eta = 0.0;
    VectorXd sum_x = VectorXd::Zero(p);
    for (int k = i; k < j; ++k) {
      const int idx = sv.desc[k];
      if (!ds.event[idx]) continue;
      ++d;
      for (int q = 0; q < p; ++q) sum_x[q] += ds.row(idx)[q];
      sum_eta += p > 0 ? theta.dot(Eigen::Map<const VectorXd>(ds.row(idx), p))
                       : 0.0;
    }
    if (d > 0) {
      ll += sum_eta - d * std::log(s0);
      if (p > 0) {
        mu = s1 / s0;
        if (score) score->noalias() += sum_x - d * mu;
        if (nhess) nhess->noalias() += d * (s2 / s0 - mu * mu.transpose());
      }
    }
    i = j;
  }
  return ll;
}

}  // namespace

CoxModel fit_cox(const SurvivalDataset& ds, const CoxOptions& opt) {
  ds.validate();
  if (!(opt.tol > 0.0) || opt.max_iter < 1 || opt.ridge < 0.0) {
    throw std::invalid_argument("fit_cox: bad options");
  }
  SortedView sv = sort_by_time(ds);
  if (sv.n_events == 0) {
    throw std::invalid_argument("fit_cox: sample contains no events, model is unfittable");
  }
  const int p = ds.p;
  CoxModel model;
  model.ridge = opt.ridge;

  VectorXd theta = VectorXd::Zero(p);
  if (p > 0) {
    VectorXd g(p);
    MatrixXd H(p, p);
    double ll = 0.0;
    bool converged = false;
    for (int it = 0; it <= opt.max_iter; ++it) {
      ll = partial_loglik(ds, sv, theta, &g, &H);
      ll -= opt.ridge * theta.squaredNorm();
      g.noalias() -= 2.0 * opt.ridge * theta;
      H.diagonal().array() += 2.0 * opt.ridge;
      model.grad_norm = g.lpNorm<Eigen::Infinity>();
      model.iterations = it;
      if (model.grad_norm < opt.tol) {
        converged = true;
        break;
      }
      if (it == opt.max_iter) break;
      VectorXd step = H.ldlt().solve(g);
      if (!step.allFinite()) {
        throw std::runtime_error(
            "fit_cox: singular information matrix; set ridge > 0");
      }
      double lambda = 1.0;
      bool accepted = false;
      // near the optimum the true improvement can fall below the double
      // resolution of the log likelihood, so allow a tiny non-increase
      const double slack = 1e-9 * (std::fabs(ll) + 1.0);
      for (int h = 0; h < 40; ++h) {
        VectorXd cand = theta + lambda * step;
        double ll_cand = partial_loglik(ds, sv, cand, nullptr, nullptr) -
                         opt.ridge * cand.squaredNorm();
        if (std::isfinite(ll_cand) && ll_cand > ll - slack) {
          theta = cand;
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) {
        throw std::runtime_error(
            "fit_cox: step halving failed to improve the likelihood");
      }
      for (int k = 0; k < p; ++k) {
        if (std::fabs(theta[k]) > 50.0) {
          throw std::runtime_error(
              "fit_cox: coefficient " + std::to_string(k + 1) +
              " diverged (|theta| > 50), data are separated; set ridge > 0");
        }
      }
    }
    if (!converged) {
      throw std::runtime_error("fit_cox: no convergence after " +
                               std::to_string(opt.max_iter) +
                               " Newton iterations");
    }
    model.loglik = ll;
    model.coef.assign(theta.data(), theta.data() + p);
    // standard errors from the unpenalized observed information
    MatrixXd info(p, p);
    partial_loglik(ds, sv, theta, &g, &info);
    MatrixXd cov = info.ldlt().solve(MatrixXd::Identity(p, p));
    model.stderrs.resize(p);
    for (int k = 0; k < p; ++k) {
      const double v = cov(k, k);
      model.stderrs[k] = v > 0.0 && std::isfinite(v)
                             ? std::sqrt(v)
                             : std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    model.loglik = partial_loglik(ds, sv, theta, nullptr, nullptr);
  }

  std::vector<double> risks(ds.n(), 0.0);
  for (int i = 0; i < ds.n(); ++i) {
    double eta = 0.0;
    for (int k = 0; k < p; ++k) eta += model.coef[k] * ds.row(i)[k];
    risks[i] = eta;
  }
  model.baseline = breslow_baseline(ds, risks);
  return model;
}

CoxModel fit_censoring(const SurvivalDataset& ds, const CoxOptions& opt) {
  SurvivalDataset flipped = ds;
  for (auto& e : flipped.event) e = e ? 0 : 1;
  try {
    return fit_cox(flipped, opt);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("fit_censoring: ") + e.what());
  }
}

StepCumulativeHazard breslow_baseline(const SurvivalDataset& ds,
                                      const std::vector<double>& risk) {
  ds.validate();
  if (risk.size() != static_cast<size_t>(ds.n())) {
    throw std::invalid_argument("breslow_baseline: risk length mismatch");
  }
  SortedView sv = sort_by_time(ds);
  const int n = ds.n();
  StepCumulativeHazard h;
  double s0 = 0.0;
  int i = 0;
  // descending walk; increments collected in reverse order
  while (i < n) {
    int j = i;
    const double t = ds.time[sv.desc[i]];
    int d = 0;
    while (j < n && ds.time[sv.desc[j]] == t) {
      s0 += std::exp(risk[sv.desc[j]]);
      d += ds.event[sv.desc[j]];
      ++j;
    }
    if (d > 0) {
      h.times.push_back(t);
      h.increments.push_back(d / s0);
    }
    i = j;
  }
  std::reverse(h.times.begin(), h.times.end());
  std::reverse(h.increments.begin(), h.increments.end());
  h.validate();
  return h;
}

std::vector<double> risk_scores(const CoxModel& m, const SurvivalDataset& ds) {
  if (m.coef.size() != static_cast<size_t>(ds.p)) {
    throw std::invalid_argument("risk_scores: model has " +
                                std::to_string(m.coef.size()) +
                                " coefficients but data has p=" +
                                std::to_string(ds.p));
  }
  std::vector<double> out(ds.n(), 0.0);
  for (int i = 0; i < ds.n(); ++i) {
    double eta = 0.0;
    for (int k = 0; k < ds.p; ++k) eta += m.coef[k] * ds.row(i)[k];
    out[i] = eta;
  }
  return out;
}

double predict_survival_at(const CoxModel& m, double risk, double t,
                           double clip_floor) {
  const double cum = m.baseline.value_at(t);
  const double s = std::exp(-cum * std::exp(risk));
  return s < clip_floor ? clip_floor : s;
}

SurvivalProbabilityGrid predict_survival(const CoxModel& m,
                                         const SurvivalDataset& subjects,
                                         const TimeGrid& grid, GridRole role,
                                         double clip_floor) {
  grid.validate();
  if (!(clip_floor > 0.0) || clip_floor >= 1.0) {
    throw std::invalid_argument("predict_survival: clip_floor must lie in (0,1)");
  }
  const int K = grid.size();
  // cumulative baseline hazard at each grid time via one merged walk
  std::vector<double> cum(K);
  {
    double acc = 0.0;
    size_t j = 0;
    for (int k = 0; k < K; ++k) {
      while (j < m.baseline.times.size() &&
             m.baseline.times[j] <= grid.times[k]) {
        acc += m.baseline.increments[j];
        ++j;
      }
      cum[k] = acc;
    }
  }
  const std::vector<double> risks = risk_scores(m, subjects);
  SurvivalProbabilityGrid g;
  g.role = role;
  g.grid = grid;
  g.subjects = subjects.id;
  g.probs.resize(static_cast<size_t>(subjects.n()) * K);
  const int T = max_threads();
#pragma omp parallel for schedule(static) num_threads(T)
  for (int i = 0; i < subjects.n(); ++i) {
    const double er = std::exp(risks[i]);
    double* row = g.probs.data() + static_cast<size_t>(i) * K;
    for (int k = 0; k < K; ++k) {
      const double s = std::exp(-cum[k] * er);
      row[k] = s < clip_floor ? clip_floor : s;
    }
  }
  g.validate();
  return g;
}

}  // namespace isocal
