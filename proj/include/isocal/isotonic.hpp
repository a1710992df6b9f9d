#pragma once

#include <stdexcept>
#include <vector>

namespace isocal {

// Scratch for the block-pooling sweep so hot loops can reuse allocations.
struct PavaWorkspace {
  std::vector<double> value, wsum, wysum, ysum;
  std::vector<int> len;
  void resize(int m) {
    value.resize(m);
    wsum.resize(m);
    wysum.resize(m);
    ysum.resize(m);
    len.resize(m);
  }
};

// Weighted least-squares fit under f_1 >= f_2 >= ... >= f_m, single O(m)
// pool-adjacent-violators sweep. `w` may be null for unit weights. `out` may
// alias `y`. Zero-weight entries take their block's value without influencing
// the pooled means. No validation here; callers validate once.
void pava_nonincreasing_run(const double* y, const double* w, int m,
                            double* out, PavaWorkspace& ws);

// Validating conveniences. Throw std::invalid_argument on empty input,
// negative or non-finite weights, non-finite targets, or all-zero weights.
std::vector<double> pava_nonincreasing(const std::vector<double>& y);
std::vector<double> pava_nonincreasing(const std::vector<double>& y,
                                       const std::vector<double>& w);

struct DoublyMonotoneOptions {
  double tol = 1e-9;      // Frobenius norm of the change of one full sweep
  int max_iter = 10000;
};

struct DoublyMonotoneResult {
  int iterations = 0;
  double last_change = 0.0;
};

struct DykstraNonConvergence : std::runtime_error {
  DykstraNonConvergence(std::string msg, std::vector<double> it, int n,
                        double change)
      : std::runtime_error(std::move(msg)),
        last_iterate(std::move(it)),
        iterations(n),
        last_change(change) {}
  std::vector<double> last_iterate;
  int iterations;
  double last_change;
};

// Euclidean projection of a row-major n_rows x n_cols matrix onto the set
// that is non-increasing down every column and across every row, by Dykstra's
// alternating projections (column direction first, then row direction, with
// one residual per direction). After convergence a plain enforcement sweep
// makes both constraints hold within 1e-8 exactly once. OpenMP-parallel over
// independent rows/columns; results do not depend on the thread count.
DoublyMonotoneResult project_doubly_monotone(
    std::vector<double>& S, int n_rows, int n_cols,
    const DoublyMonotoneOptions& opt = {});

// Largest monotonicity violation, i.e. max(0, successor - predecessor).
double max_column_violation(const std::vector<double>& S, int n_rows,
                            int n_cols);
double max_row_violation(const std::vector<double>& S, int n_rows, int n_cols);

namespace reference {

// Plain serial Dykstra used to cross-check the blocked OpenMP kernel; same
// arithmetic per sequence, so results must match bit for bit.
DoublyMonotoneResult project_doubly_monotone(
    std::vector<double>& S, int n_rows, int n_cols,
    const DoublyMonotoneOptions& opt = {});

}  // namespace reference

}  // namespace isocal
