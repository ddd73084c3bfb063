#ifndef FRACEPI_TESTS_ORACLES_MITTAG_LEFFLER_SERIES_HPP
#define FRACEPI_TESTS_ORACLES_MITTAG_LEFFLER_SERIES_HPP

#include <cmath>

namespace oracle {

// Fixed-length partial sum of z^k / Gamma(alpha k + 1) in extended precision.
inline long double mittag_leffler_series(long double alpha, long double z, int terms = 200) {
  long double sum = 0.0L;
  const long double log_abs_z = z == 0.0L ? 0.0L : std::log(std::fabs(z));
  for (int k = 0; k < terms; ++k) {
    if (k > 0 && z == 0.0L) break;
    const long double log_term = (k == 0 ? 0.0L : k * log_abs_z) - std::lgamma(alpha * k + 1.0L);
    const long double magnitude = std::exp(log_term);
    sum += (z < 0.0L && k % 2 == 1) ? -magnitude : magnitude;
  }
  return sum;
}

}  // namespace oracle

#endif
