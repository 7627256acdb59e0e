#pragma once

// Migration kernel families, symmetrization, reachability and the recurrence
// verdicts for the infinite lattices the finite kernels truncate.

#include "ifv/model.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ifv {

struct CompleteUniform {
  int colonies = 2;
};

// Nearest-neighbour walk on the periodic torus (Z / side)^d.
struct TorusNearestNeighbor {
  int dimension = 1;
  int side = 3;
};

// Hierarchical group with base^levels colonies; weights[k-1] is the mass sent
// to colonies at hierarchical distance k, spread uniformly over them.
struct Hierarchical {
  int levels = 1;
  int base = 2;
  std::vector<double> weights;
};

struct CustomKernel {
  Mat matrix;
};

using KernelFamily = std::variant<CompleteUniform, TorusNearestNeighbor, Hierarchical, CustomKernel>;

std::string family_name(const KernelFamily& family);

MigrationKernel make_kernel(const KernelFamily& family);

// a_hat = (a + a^T) / 2
Mat symmetrize(const MigrationKernel& kernel);

enum class Recurrence { recurrent, transient, unknown };

std::string to_string(Recurrence r);

struct ReturnFrequency {
  int steps = 0;
  double fraction = 0.0;
};

struct RecurrenceVerdict {
  Recurrence verdict = Recurrence::unknown;
  std::string rationale;
  bool refers_to_infinite_family = false;
  // Diagnostic only (custom kernels): fraction of symmetrized-kernel walks
  // from colony 0 that return within n steps.
  std::vector<ReturnFrequency> return_table;
};

RecurrenceVerdict classify_recurrence(const KernelFamily& family, std::uint64_t seed = 1,
                                      int walks = 2000);

struct ReachabilityReport {
  // reaches[from][to]: from -> to through a positive-probability path.
  std::vector<std::vector<bool>> reaches;
  // Colonies with at least one in-neighbour.
  std::vector<int> has_in_neighbor;
  // I_xi = {xi' : a(xi, xi') > 0}
  std::vector<std::vector<int>> out_neighbors;
  // Partition of colonies that must carry one common point mass in Delta_a.
  std::vector<std::vector<int>> components;
  // Colonies not related to any other colony; unconstrained by Delta_a.
  std::vector<int> isolated;

  int component_of(int colony) const;
};

ReachabilityReport reachability(const MigrationKernel& kernel);

// Strong connectivity of the positive off-diagonal graph of a rate matrix.
bool is_irreducible(const Mat& rates);

}  // namespace ifv
