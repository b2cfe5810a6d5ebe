#pragma once

#include <vector>

namespace covrec {

// Gauss-Legendre rule transplanted to [0,1].
struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// nodes/weights by Newton iteration on P_n; exact for polynomials of
// degree <= 2n-1, spectrally accurate for analytic integrands
QuadRule gauss_legendre_01(int n);

}  // namespace covrec
