#pragma once

// Exact analysis of a finite conservative rate matrix: communicating classes
// and stationary vectors by dense linear solve.

#include "ifv/model.hpp"

#include <vector>

namespace ifv {

struct CommunicatingClass {
  std::vector<int> states;  // ascending
  bool closed = false;      // no rate leaves the class
};

// Strongly connected components of the positive off-diagonal graph, ordered
// by their smallest state.
std::vector<CommunicatingClass> communicating_classes(const Mat& q);

inline constexpr double kStationaryResidualTol = 1e-10;

struct StationaryResult {
  bool irreducible = false;
  std::vector<CommunicatingClass> classes;
  // One stationary vector per closed class (zero outside the class), in the
  // order the closed classes appear in `classes`.
  std::vector<Vec> stationary;
  double residual = 0.0;  // max over closed classes of max|pi Q| / max(1, max|q_ii|)

  const Vec& unique() const;
};

// Throws SolveFailure if a solve is singular or its residual exceeds
// kStationaryResidualTol.
StationaryResult stationary_distribution(const Mat& q);

}  // namespace ifv
