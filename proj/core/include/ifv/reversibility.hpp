#pragma once

// Reversibility and its obstructions.
//
// Finite chains: detailed balance against a stationary vector, and the
// Kolmogorov cycle criterion (which needs no stationary vector).
//
// Diffusion side: the cocycle
//   Lambda(f, X) = 2 int_0^1 <b(S_{s f} X), f> ds,
// the identities it must satisfy under a reversible law, the single-site
// characterization of reversible mutation/recombination pairs, and the
// absorbing set Delta_a of the mutation-free model.

#include "ifv/chain.hpp"
#include "ifv/generator.hpp"
#include "ifv/kernels.hpp"
#include "ifv/quadrature.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ifv {

// Pass threshold shared by detailed_balance and kolmogorov_check.
inline constexpr double kBalanceTol = 1e-8;
// pi must satisfy max|pi Q| / max(1, max|q_ii|) <= this before balance is tested.
inline constexpr double kStationarityTol = 1e-8;

struct BalanceReport {
  double residual = 0.0;
  std::pair<int, int> worst_edge{-1, -1};
  double stationarity_residual = 0.0;
  std::size_t class_count = 0;
  std::size_t closed_class_count = 0;
  bool irreducible = false;

  bool balanced(double tol = kBalanceTol) const { return residual <= tol; }
};

// residual = max_{x != y} |pi_x q(x,y) - pi_y q(y,x)| / max(pi_x q(x,y) + pi_y q(y,x), kAbsFloor).
// Throws InvalidInput when pi is not stationary for q.
BalanceReport detailed_balance(const Mat& q, const Vec& pi);

enum class CycleVerdict { consistent, inconsistent, immediate_irreversible };

std::string to_string(CycleVerdict v);

struct CycleReport {
  CycleVerdict verdict = CycleVerdict::consistent;
  // max over non-tree edges |log q(x,y) - log q(y,x) - (phi_y - phi_x)|
  double inconsistency = 0.0;
  std::pair<int, int> witness_edge{-1, -1};
  std::size_t closed_class_count = 0;
  std::size_t non_tree_edges = 0;

  bool balanced() const { return verdict == CycleVerdict::consistent; }
};

// Spanning tree with log-potentials on every closed class. Edges on which
// only one direction has positive rate give immediate_irreversible.
CycleReport kolmogorov_check(const Mat& q, double tol = kBalanceTol);

struct CocycleValue {
  double value = 0.0;
  double quadrature_error = 0.0;
};

CocycleValue cocycle_lambda(const ModelSpec& spec, const BlockFunction& f, const Configuration& x,
                            int nodes = kDefaultQuadratureNodes);

// 2 int_0^t <b(S_{-s f} X), f> ds, which equals Lambda(t f, S_{-t f} X).
CocycleValue backward_drift_integral(const ModelSpec& spec, const BlockFunction& f,
                                     const Configuration& x, double t,
                                     int nodes = kDefaultQuadratureNodes);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double quadrature_error = 0.0;
};

// f at colony xi1, g at colony xi2 != xi1:
//   Lambda(f, S_g X) - Lambda(f, X)  vs  2 rho a(xi1, xi2) <S_g X_xi2 - X_xi2, f>
IdentityCheck shift_identity_residual(const ModelSpec& spec, int xi1, const Vec& f, int xi2,
                                      const Vec& g, const Configuration& x,
                                      int nodes = kDefaultQuadratureNodes);

// a(xi1, xi2) <S_g X_xi2 - X_xi2, f>  vs  a(xi2, xi1) <S_f X_xi1 - X_xi1, g>, both closed form.
IdentityCheck necessary_condition_residual(const ModelSpec& spec, int xi1, const Vec& f, int xi2,
                                           const Vec& g, const Configuration& x);

// Lambda(f + g, X) vs Lambda(f, S_g X) + Lambda(g, X); the defect is data,
// expected to vanish only for rho = 0 and a reversible single-site form.
IdentityCheck cocycle_identity_defect(const ModelSpec& spec, const BlockFunction& f,
                                      const BlockFunction& g, const Configuration& x,
                                      int nodes = kDefaultQuadratureNodes);

enum class SingleSiteVerdict { reversible_form, violation };

std::string to_string(SingleSiteVerdict v);

struct SingleSiteCertificate {
  SingleSiteVerdict verdict = SingleSiteVerdict::violation;
  double theta = 0.0;
  Vec mu;
  Vec h;
  std::string witness;  // empty on reversible_form
  double mutation_residual = 0.0;       // max deviation of M from (theta/2)(1 mu^T - I)
  double recombination_residual = 0.0;  // max deviation of the eta decomposition
};

// M = A + r (P_diag - I), P_diag(x, z) = eta(x, x; z). Reversible form iff
//  (i)  M(x, z) = (theta/2) mu_z for all z != x, read off as
//       c_z = M(0, z) (z > 0), c_0 = M(1, 0); theta = 2 sum c, mu = c / sum c
//       (uniform when theta = 0);
//  (ii) for r > 0 and all x < y:
//       eta(x,y;.) - 1/2 (eta(x,x;.) + eta(y,y;.)) = (h(x) - h(y)) (delta_x - delta_y),
//       h(0) = 0, h(y) = -D(0, y; 0).
// With r = 0 condition (ii) is vacuous and h = 0.
SingleSiteCertificate classify_single_site(const ModelSpec& spec);

struct DeltaMembership {
  bool member = false;
  std::string reason;  // empty when member
  std::vector<int> non_dirac;  // colonies that are not point masses
  std::optional<std::pair<int, int>> offending_pair;  // a(xi, xi') > 0 with different atoms
  std::vector<int> atoms;  // type of each Dirac colony, -1 otherwise
};

// Every colony a point mass and equal along every positive kernel entry (hence
// along the whole reachability relation).
DeltaMembership delta_a_membership(const MigrationKernel& kernel, const Configuration& x);

struct AbsorbingReport {
  DeltaMembership membership;
  std::vector<int> isolated;
  std::size_t monomials_checked = 0;
  double max_generator = 0.0;  // max |L F(X)| over the degree <= 3 basis
  bool generator_vanishes = false;  // max_generator <= kAbsFloor
};

// Requires zero mutation and r = 0; otherwise throws HypothesisViolated.
AbsorbingReport absorbing_check(const ModelSpec& spec, const Configuration& x, int max_degree = 3);

struct ClosedClassComparison {
  std::size_t closed_classes = 0;
  std::size_t delta_a_states = 0;  // grid states in Delta_a
  std::size_t component_count = 0;
  bool all_closed_singletons = false;
  bool coincide = false;
  std::string detail;
};

// Closed classes of the exact N-particle chain against the grid points of
// Delta_a. Same hypothesis as absorbing_check.
ClosedClassComparison compare_closed_classes_with_delta_a(const ModelSpec& spec, int population);

struct DiracProbe {
  std::vector<double> heterozygosity;  // per colony, mean of 1 - sum_u X(u)^2
  double agreement = 0.0;  // mean over samples of the fraction of kernel edges with equal modal types
  std::size_t samples = 0;
};

DiracProbe dirac_support_probe(const ModelSpec& spec, std::span<const Configuration> samples);

// Two-type stepping-stone model on a periodic d-torus: 0 -> 1 at rate u,
// 1 -> 0 at rate v, fitness V = [[2, 1], [1, 0]] (drift s x (1 - x) for the
// frequency x of type 0).
struct SteppingStoneParams {
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  double rho = 1.0;
  int dimension = 1;
  int side = 5;
};

ModelSpec stepping_stone_spec(const SteppingStoneParams& p);

inline constexpr const char* kSteppingStoneStatement = "reversible candidate only if u=v=0 and d ≤ 2";

struct SteppingStoneClassification {
  std::string statement = kSteppingStoneStatement;
  bool mutation_free = false;
  bool mutation_irreducible = false;
  RecurrenceVerdict recurrence;
  SingleSiteCertificate single_site;
  bool reversible_candidate = false;
  std::string rationale;
};

SteppingStoneClassification classify_stepping_stone(const SteppingStoneParams& p);

}  // namespace ifv
