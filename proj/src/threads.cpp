#include "isocal/threads.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace isocal {

int max_threads() {
  static const int cached = [] {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("ISOCAL_THREADS")) {
      try {
        int cap = std::stoi(env);
        if (cap >= 1 && cap < n) n = cap;
      } catch (...) {
        // unparsable value: ignore and keep the OpenMP default
      }
    }
    return n < 1 ? 1 : n;
  }();
  return cached;
}

}  // namespace isocal
