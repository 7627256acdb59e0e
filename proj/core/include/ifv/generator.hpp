#pragma once

// Product test functionals F(X) = prod_i <X_{xi_i}, f_i>, their partial
// derivatives, and the generator / carre du champ evaluated on them.

#include "ifv/model.hpp"

#include <vector>

namespace ifv {

struct Factor {
  int colony = 0;
  Vec f;
};

struct Monomial {
  std::vector<Factor> factors;

  int degree() const { return static_cast<int>(factors.size()); }
  double evaluate(const Configuration& x) const;
  // Product of functionals is the concatenation of their factors.
  Monomial operator*(const Monomial& other) const;

  static Monomial linear(int colony, const Vec& f) { return Monomial{{Factor{colony, f}}}; }
};

// Value, first partials dF/dX_xi(u), and same-colony second partials
// d2F/dX_xi(u)dX_xi(v) under the unnormalized perturbation X_xi + eps delta_u.
struct MonomialDerivatives {
  double value = 0.0;
  std::vector<Vec> first;   // per colony, length K
  std::vector<Mat> second;  // per colony, KxK, symmetric
};

MonomialDerivatives monomial_calculus(const Monomial& F, const Configuration& x);

enum class GeneratorForm {
  // <b(X), dF/dX> + 1/2 sum_xi <Q_{X_xi}, d2F>
  gradient,
  // per-factor mutation/selection/recombination/migration terms plus the
  // pairwise same-colony resampling term
  expanded,
};

double generator_apply(const ModelSpec& spec, const Monomial& F, const Configuration& x,
                       GeneratorForm form = GeneratorForm::gradient);

// Closed form 1/2 sum_xi <Q_{X_xi}, dPhi/dX_xi (x) dPsi/dX_xi>.
double carre_du_champ(const ModelSpec& spec, const Monomial& phi, const Monomial& psi,
                      const Configuration& x);
// 1/2 (L(Phi Psi) - Phi L Psi - Psi L Phi), each term via generator_apply.
double carre_du_champ_by_definition(const ModelSpec& spec, const Monomial& phi,
                                    const Monomial& psi, const Configuration& x,
                                    GeneratorForm form = GeneratorForm::gradient);

// All monomials prod <X_{xi_i}, 1_{u_i}> of degree 1..max_degree, one per
// multiset of (colony, type) pairs; spans the polynomials of that degree.
std::vector<Monomial> indicator_monomial_basis(int colonies, int types, int max_degree);

}  // namespace ifv
