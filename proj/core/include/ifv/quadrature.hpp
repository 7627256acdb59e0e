#pragma once

#include <functional>
#include <vector>

namespace ifv {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Gauss-Legendre rule with n nodes (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // |I_n - I_2n|
};

inline constexpr int kDefaultQuadratureNodes = 64;

// Integral of fn over [a, b] with n nodes; error estimated by doubling n.
QuadratureResult integrate(const std::function<double(double)>& fn, double a, double b,
                           int n = kDefaultQuadratureNodes);

}  // namespace ifv
