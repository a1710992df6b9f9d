#pragma once

#include "isocal/calibrate.hpp"
#include "isocal/types.hpp"

namespace isocal::reference {

// Literal evaluation of the doubly robust transform: for every grid index i
// the correction sum over k <= i is recomputed from scratch, O(K^2) per
// subject. Serial. Kept to cross-check (and benchmark against) the O(K)
// prefix form in dr_pseudo_outcomes.
PseudoOutcomeMatrix dr_pseudo_outcomes(const CalibrationInputs& in);

}  // namespace isocal::reference
