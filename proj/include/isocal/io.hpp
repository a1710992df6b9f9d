#pragma once

#include <string>

#include "isocal/cox.hpp"
#include "isocal/types.hpp"

namespace isocal {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

// Writes through a temporary file and renames, so failed runs leave no
// partial artifacts.
void write_text_atomic(const std::string& path, const std::string& content);

// CSV with header "id,time,event,x1,...,xp". Malformed input raises
// std::invalid_argument naming the offending line.
SurvivalDataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const SurvivalDataset& ds);

// CSV with header "id,risk".
RiskScores load_risks(const std::string& path);
void save_risks(const std::string& path, const RiskScores& r);

// CSV with header "id,true_time,censor_time,mu,sigma".
SimulationTruths load_truths(const std::string& path);
void save_truths(const std::string& path, const SimulationTruths& t);

// JSON {"role","times","subjects","probs"}; validated on load.
SurvivalProbabilityGrid load_grid(const std::string& path);
void save_grid(const std::string& path, const SurvivalProbabilityGrid& g);

// JSON {"method","risks","times","surface","interpolation"}; validated on
// load, so a surface violating monotonicity is rejected here.
CalibratedSurface load_surface(const std::string& path);
void save_surface(const std::string& path, const CalibratedSurface& s);

// JSON {"coef","baseline_times","baseline_increments", optional "ridge",
// "diagnostics"}.
CoxModel load_cox_model(const std::string& path);
void save_cox_model(const std::string& path, const CoxModel& m);

}  // namespace isocal
