#pragma once

namespace isocal {

// Number of worker threads for parallel kernels: min(OpenMP default,
// ISOCAL_THREADS if set to a positive integer). Result is >= 1 and cached.
int max_threads();

}  // namespace isocal
