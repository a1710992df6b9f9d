#include "isocal/isotonic.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "isocal/threads.hpp"

namespace isocal {

void pava_nonincreasing_run(const double* y, const double* w, int m,
                            double* out, PavaWorkspace& ws) {
  double* value = ws.value.data();
  double* wsum = ws.wsum.data();
  double* wysum = ws.wysum.data();
  double* ysum = ws.ysum.data();
  int* len = ws.len.data();
  int nb = 0;
  for (int i = 0; i < m; ++i) {
    const double wi = w ? w[i] : 1.0;
    value[nb] = y[i];
    wsum[nb] = wi;
    wysum[nb] = wi * y[i];
    ysum[nb] = y[i];
    len[nb] = 1;
    ++nb;
    while (nb > 1 && value[nb - 1] > value[nb - 2]) {
      wsum[nb - 2] += wsum[nb - 1];
      wysum[nb - 2] += wysum[nb - 1];
      ysum[nb - 2] += ysum[nb - 1];
      len[nb - 2] += len[nb - 1];
      value[nb - 2] = wsum[nb - 2] > 0.0 ? wysum[nb - 2] / wsum[nb - 2]
                                         : ysum[nb - 2] / len[nb - 2];
      --nb;
    }
  }
  int pos = 0;
  for (int b = 0; b < nb; ++b) {
    for (int k = 0; k < len[b]; ++k) out[pos++] = value[b];
  }
}

namespace {

void validate_pava_inputs(const std::vector<double>& y,
                          const std::vector<double>* w) {
  if (y.empty()) throw std::invalid_argument("pava: empty target vector");
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("pava: non-finite target");
  }
  if (w) {
    if (w->size() != y.size()) {
      throw std::invalid_argument("pava: weight length mismatch");
    }
    double total = 0.0;
    for (double v : *w) {
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("pava: weights must be finite and >= 0");
      }
      total += v;
    }
    if (total <= 0.0) {
      throw std::invalid_argument("pava: all weights are zero");
    }
  }
}

}  // namespace

std::vector<double> pava_nonincreasing(const std::vector<double>& y) {
  validate_pava_inputs(y, nullptr);
  std::vector<double> out(y.size());
  PavaWorkspace ws;
  ws.resize(static_cast<int>(y.size()));
  pava_nonincreasing_run(y.data(), nullptr, static_cast<int>(y.size()),
                         out.data(), ws);
  return out;
}

std::vector<double> pava_nonincreasing(const std::vector<double>& y,
                                       const std::vector<double>& w) {
  validate_pava_inputs(y, &w);
  std::vector<double> out(y.size());
  PavaWorkspace ws;
  ws.resize(static_cast<int>(y.size()));
  pava_nonincreasing_run(y.data(), w.data(), static_cast<int>(y.size()),
                         out.data(), ws);
  return out;
}

double max_column_violation(const std::vector<double>& S, int n_rows,
                            int n_cols) {
  double worst = 0.0;
  for (int i = 0; i + 1 < n_rows; ++i) {
    const double* a = S.data() + static_cast<size_t>(i) * n_cols;
    const double* b = a + n_cols;
    for (int j = 0; j < n_cols; ++j) {
      double v = b[j] - a[j];
      if (v > worst) worst = v;
    }
  }
  return worst;
}

double max_row_violation(const std::vector<double>& S, int n_rows,
                         int n_cols) {
  double worst = 0.0;
  for (int i = 0; i < n_rows; ++i) {
    const double* r = S.data() + static_cast<size_t>(i) * n_cols;
    for (int j = 0; j + 1 < n_cols; ++j) {
      double v = r[j + 1] - r[j];
      if (v > worst) worst = v;
    }
  }
  return worst;
}

namespace {

constexpr int kColBlock = 8;

void validate_matrix(const std::vector<double>& S, int n_rows, int n_cols,
                     const DoublyMonotoneOptions& opt) {
  if (n_rows < 1 || n_cols < 1 ||
      S.size() != static_cast<size_t>(n_rows) * n_cols) {
    throw std::invalid_argument("project_doubly_monotone: bad dimensions");
  }
  if (!(opt.tol > 0.0) || opt.max_iter < 1) {
    throw std::invalid_argument("project_doubly_monotone: bad options");
  }
  for (double v : S) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("project_doubly_monotone: non-finite entry");
    }
  }
}

// Column-direction Dykstra half step on a block of columns [j0, j0+nb):
// u = S + eps, S = pava(u), eps = u - S, gathered through a contiguous
// scratch so the strided walk stays cache-friendly.
void column_halfstep_block(double* S, double* eps, int n_rows, int n_cols,
                           int j0, int nb, double* u, double* fit,
                           PavaWorkspace& ws) {
  for (int i = 0; i < n_rows; ++i) {
    const size_t off = static_cast<size_t>(i) * n_cols + j0;
    for (int b = 0; b < nb; ++b) u[static_cast<size_t>(b) * n_rows + i] = S[off + b] + eps[off + b];
  }
  for (int b = 0; b < nb; ++b) {
    pava_nonincreasing_run(u + static_cast<size_t>(b) * n_rows, nullptr,
                           n_rows, fit + static_cast<size_t>(b) * n_rows, ws);
  }
  for (int i = 0; i < n_rows; ++i) {
    const size_t off = static_cast<size_t>(i) * n_cols + j0;
    for (int b = 0; b < nb; ++b) {
      const size_t k = static_cast<size_t>(b) * n_rows + i;
      S[off + b] = fit[k];
      eps[off + b] = u[k] - fit[k];
    }
  }
}

void enforcement_sweep(std::vector<double>& S, int n_rows, int n_cols) {
  // Plain column pass then row pass. Isotonic regression preserves pointwise
  // dominance between sequences, so the row pass cannot break the column
  // monotonicity established by the column pass.
  const int T = max_threads();
#pragma omp parallel num_threads(T)
  {
    PavaWorkspace ws;
    ws.resize(n_rows > n_cols ? n_rows : n_cols);
    std::vector<double> buf(static_cast<size_t>(kColBlock) * n_rows);
    std::vector<double> fit(static_cast<size_t>(kColBlock) * n_rows);
#pragma omp for schedule(static)
    for (int j0 = 0; j0 < n_cols; j0 += kColBlock) {
      const int nb = j0 + kColBlock <= n_cols ? kColBlock : n_cols - j0;
      for (int i = 0; i < n_rows; ++i) {
        const size_t off = static_cast<size_t>(i) * n_cols + j0;
        for (int b = 0; b < nb; ++b) {
          buf[static_cast<size_t>(b) * n_rows + i] = S[off + b];
        }
      }
      for (int b = 0; b < nb; ++b) {
        pava_nonincreasing_run(buf.data() + static_cast<size_t>(b) * n_rows,
                               nullptr, n_rows,
                               fit.data() + static_cast<size_t>(b) * n_rows,
                               ws);
      }
      for (int i = 0; i < n_rows; ++i) {
        const size_t off = static_cast<size_t>(i) * n_cols + j0;
        for (int b = 0; b < nb; ++b) {
          S[off + b] = fit[static_cast<size_t>(b) * n_rows + i];
        }
      }
    }
#pragma omp for schedule(static)
    for (int i = 0; i < n_rows; ++i) {
      double* row = S.data() + static_cast<size_t>(i) * n_cols;
      pava_nonincreasing_run(row, nullptr, n_cols, row, ws);
    }
  }
}

}  // namespace

DoublyMonotoneResult project_doubly_monotone(std::vector<double>& S,
                                             int n_rows, int n_cols,
                                             const DoublyMonotoneOptions& opt) {
  validate_matrix(S, n_rows, n_cols, opt);
  const size_t total = S.size();
  std::vector<double> eps_col(total, 0.0), eps_row(total, 0.0), prev(S);
  const int T = max_threads();

  DoublyMonotoneResult res;
  bool converged = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
#pragma omp parallel num_threads(T)
    {
      PavaWorkspace ws;
      ws.resize(n_rows > n_cols ? n_rows : n_cols);
      std::vector<double> u(static_cast<size_t>(kColBlock) * n_rows);
      std::vector<double> fit(static_cast<size_t>(kColBlock) * n_rows);
      std::vector<double> rowbuf(n_cols);
      // risk direction: columns
#pragma omp for schedule(static)
      for (int j0 = 0; j0 < n_cols; j0 += kColBlock) {
        const int nb = j0 + kColBlock <= n_cols ? kColBlock : n_cols - j0;
        column_halfstep_block(S.data(), eps_col.data(), n_rows, n_cols, j0, nb,
                              u.data(), fit.data(), ws);
      }
      // time direction: rows
#pragma omp for schedule(static)
      for (int i = 0; i < n_rows; ++i) {
        double* row = S.data() + static_cast<size_t>(i) * n_cols;
        double* eps = eps_row.data() + static_cast<size_t>(i) * n_cols;
        for (int j = 0; j < n_cols; ++j) rowbuf[j] = row[j] + eps[j];
        pava_nonincreasing_run(rowbuf.data(), nullptr, n_cols, row, ws);
        for (int j = 0; j < n_cols; ++j) eps[j] = rowbuf[j] - row[j];
      }
    }
    double change_sq = 0.0;
    for (size_t k = 0; k < total; ++k) {
      const double d = S[k] - prev[k];
      change_sq += d * d;
    }
    res.iterations = it;
    res.last_change = std::sqrt(change_sq);
    if (res.last_change < opt.tol) {
      converged = true;
      break;
    }
    std::memcpy(prev.data(), S.data(), total * sizeof(double));
  }
  if (!converged) {
    throw DykstraNonConvergence(
        "project_doubly_monotone: no convergence after " +
            std::to_string(opt.max_iter) + " sweeps (last change " +
            std::to_string(res.last_change) + ")",
        S, res.iterations, res.last_change);
  }
  enforcement_sweep(S, n_rows, n_cols);
  return res;
}

namespace reference {

DoublyMonotoneResult project_doubly_monotone(std::vector<double>& S,
                                             int n_rows, int n_cols,
                                             const DoublyMonotoneOptions& opt) {
  validate_matrix(S, n_rows, n_cols, opt);
  const size_t total = S.size();
  std::vector<double> eps_col(total, 0.0), eps_row(total, 0.0), prev(S);
  PavaWorkspace ws;
  ws.resize(n_rows > n_cols ? n_rows : n_cols);
  std::vector<double> u(n_rows > n_cols ? n_rows : n_cols);
  std::vector<double> f(n_rows > n_cols ? n_rows : n_cols);

  DoublyMonotoneResult res;
  bool converged = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (int j = 0; j < n_cols; ++j) {
      for (int i = 0; i < n_rows; ++i) {
        const size_t k = static_cast<size_t>(i) * n_cols + j;
        u[i] = S[k] + eps_col[k];
      }
      pava_nonincreasing_run(u.data(), nullptr, n_rows, f.data(), ws);
      for (int i = 0; i < n_rows; ++i) {
        const size_t k = static_cast<size_t>(i) * n_cols + j;
        S[k] = f[i];
        eps_col[k] = u[i] - f[i];
      }
    }
    for (int i = 0; i < n_rows; ++i) {
      for (int j = 0; j < n_cols; ++j) {
        const size_t k = static_cast<size_t>(i) * n_cols + j;
        u[j] = S[k] + eps_row[k];
      }
      pava_nonincreasing_run(u.data(), nullptr, n_cols, f.data(), ws);
      for (int j = 0; j < n_cols; ++j) {
        const size_t k = static_cast<size_t>(i) * n_cols + j;
        S[k] = f[j];
        eps_row[k] = u[j] - f[j];
      }
    }
    double change_sq = 0.0;
    for (size_t k = 0; k < total; ++k) {
      const double d = S[k] - prev[k];
      change_sq += d * d;
    }
    res.iterations = it;
    res.last_change = std::sqrt(change_sq);
    if (res.last_change < opt.tol) {
      converged = true;
      break;
    }
    prev = S;
  }
  if (!converged) {
    throw DykstraNonConvergence(
        "project_doubly_monotone (reference): no convergence after " +
            std::to_string(opt.max_iter) + " sweeps (last change " +
            std::to_string(res.last_change) + ")",
        S, res.iterations, res.last_change);
  }
  for (int j = 0; j < n_cols; ++j) {
    for (int i = 0; i < n_rows; ++i) u[i] = S[static_cast<size_t>(i) * n_cols + j];
    pava_nonincreasing_run(u.data(), nullptr, n_rows, f.data(), ws);
    for (int i = 0; i < n_rows; ++i) S[static_cast<size_t>(i) * n_cols + j] = f[i];
  }
  for (int i = 0; i < n_rows; ++i) {
    double* row = S.data() + static_cast<size_t>(i) * n_cols;
    pava_nonincreasing_run(row, nullptr, n_cols, row, ws);
  }
  return res;
}

}  // namespace reference

}  // namespace isocal
