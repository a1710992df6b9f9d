#include "isocal/reference.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "isocal/io.hpp"

namespace isocal::reference {

PseudoOutcomeMatrix dr_pseudo_outcomes(const CalibrationInputs& in) {
  if (!in.cal_data || !in.cal_risks || !in.g_hat || !in.s_hat || !in.grid)
    throw std::invalid_argument("reference dr: incomplete inputs");
  const int n = in.cal_data->n(), K = in.grid->size();
  const auto& times = in.grid->times;

  PseudoOutcomeMatrix m;
  m.estimator = Estimator::dr;
  m.grid = *in.grid;
  m.subjects = in.cal_data->id;
  m.values.assign(static_cast<size_t>(K) * n, 0.0);

  std::vector<double> s(K), g(K), dm(K);
  for (int j = 0; j < n; ++j) {
    const double y = in.cal_data->time[j];
    auto it = std::lower_bound(times.begin(), times.end(), y);
    if (it == times.end() || *it != y)
      throw std::invalid_argument("reference dr: observed time " +
                                  format_double(y) + " is not a grid member");
    const int yk = static_cast<int>(it - times.begin());
    for (int k = 0; k < K; ++k) {
      s[k] = std::max(in.s_hat->at(j, k), in.clip_floor);
      g[k] = std::max(in.g_hat->at(j, k), in.clip_floor);
      const double dlam = 1.0 - s[k] / (k == 0 ? 1.0 : s[k - 1]);
      dm[k] = (k == yk && in.cal_data->event[j] ? 1.0 : 0.0) -
              (y > times[k] ? dlam : 0.0);
    }
    for (int i = 0; i < K; ++i) {
      double acc = s[i];
      for (int k = 0; k <= i; ++k) acc -= s[i] / (s[k] * g[k]) * dm[k];
      m.values[static_cast<size_t>(i) * n + j] = acc;
    }
  }
  return m;
}

}  // namespace isocal::reference
