#include "covrec/gauss.hpp"

#include <cmath>

#include "covrec/errors.hpp"

namespace covrec {

QuadRule gauss_legendre_01(int n) {
  if (n < 1) throw ConfigError("gauss_legendre_01: need at least one point");
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev initial guess, then Newton on P_n(x)
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    // map [-1,1] -> [0,1]
    r.x[i] = 0.5 * (1.0 - x);
    r.x[n - 1 - i] = 0.5 * (1.0 + x);
    r.w[i] = 0.5 * w;
    r.w[n - 1 - i] = 0.5 * w;
  }
  return r;
}

}  // namespace covrec
