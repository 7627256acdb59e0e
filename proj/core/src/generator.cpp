#include "ifv/generator.hpp"

#include "ifv/error.hpp"

#include <cmath>

namespace ifv {

namespace {

std::vector<double> pairings(const Monomial& F, const Configuration& x) {
  std::vector<double> p;
  p.reserve(F.factors.size());
  for (const auto& fac : F.factors) {
    if (fac.colony < 0 || fac.colony >= x.colony_count())
      throw InvalidInput("monomial: colony index out of range");
    if (fac.f.size() != x[fac.colony].size()) throw InvalidInput("monomial: factor length != K");
    p.push_back(x[fac.colony].dot(fac.f));
  }
  return p;
}

double product_except(const std::vector<double>& p, std::size_t i, std::size_t k) {
  double out = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (j != i && j != k) out *= p[j];
  return out;
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// <X, V(u,v) f(u)> over X (x) X, evaluated on the function side.
double selection_pairing(const Vec& mu, const Mat& v, const Vec& f) {
  const Vec fm = f.cwiseProduct(mu);
  const double cross = fm.dot(v * mu);
  const double mean_fitness = mu.dot(v * mu);
  return cross - mu.dot(f) * mean_fitness;
}

// <X (x) X, int f(z) eta(v,w;dz)> - <X, f>
double recombination_pairing(const Vec& mu, const RecombinationKernel& eta, const Vec& f) {
  const int k = static_cast<int>(mu.size());
  double total = 0.0;
  for (int v = 0; v < k; ++v)
    for (int w = 0; w < k; ++w) {
      double avg = 0.0;
      for (int z = 0; z < k; ++z) avg += eta(v, w, z) * f(z);
      total += mu(v) * mu(w) * avg;
    }
  return total - mu.dot(f);
}

double expanded_generator(const ModelSpec& spec, const Monomial& F, const Configuration& x) {
  const auto p = pairings(F, x);
  const auto& fs = F.factors;
  const Mat& a = spec.kernel.a;
  double total = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const int xi = fs[i].colony;
    const Vec& f = fs[i].f;
    const Vec& mu = x[xi];
    double term = mu.dot(spec.mutation.rates * f);
    if (spec.s != 0.0) term += spec.s * selection_pairing(mu, spec.fitness.v, f);
    if (spec.r != 0.0) term += spec.r * recombination_pairing(mu, spec.recombination, f);
    if (spec.rho != 0.0) {
      for (int j = 0; j < spec.colony_count(); ++j)
        if (a(xi, j) != 0.0) term += spec.rho * a(xi, j) * (x[j] - mu).dot(f);
    }
    total += term * product_except(p, i, kNone);
  }
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t k = i + 1; k < fs.size(); ++k) {
      if (fs[i].colony != fs[k].colony) continue;
      const Vec& mu = x[fs[i].colony];
      const double cov = mu.dot(fs[i].f.cwiseProduct(fs[k].f)) - p[i] * p[k];
      total += cov * product_except(p, i, k);
    }
  return total;
}

double gradient_generator(const ModelSpec& spec, const Monomial& F, const Configuration& x) {
  const auto d = monomial_calculus(F, x);
  double total = 0.0;
  for (int xi = 0; xi < x.colony_count(); ++xi) {
    const bool touched = d.first[static_cast<std::size_t>(xi)].cwiseAbs().maxCoeff() != 0.0 ||
                         d.second[static_cast<std::size_t>(xi)].cwiseAbs().maxCoeff() != 0.0;
    if (!touched) continue;
    total += drift(spec, x, xi).dot(d.first[static_cast<std::size_t>(xi)]);
    total += 0.5 * sampling_covariance(x[xi]).cwiseProduct(d.second[static_cast<std::size_t>(xi)]).sum();
  }
  return total;
}

}  // namespace

double Monomial::evaluate(const Configuration& x) const {
  double out = 1.0;
  for (double v : pairings(*this, x)) out *= v;
  return out;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial out = *this;
  out.factors.insert(out.factors.end(), other.factors.begin(), other.factors.end());
  return out;
}

MonomialDerivatives monomial_calculus(const Monomial& F, const Configuration& x) {
  if (F.factors.empty()) throw InvalidInput("monomial must have at least one factor");
  const auto p = pairings(F, x);
  const auto& fs = F.factors;
  const int k = static_cast<int>(x[0].size());

  MonomialDerivatives d;
  d.value = product_except(p, kNone, kNone);
  d.first.assign(static_cast<std::size_t>(x.colony_count()), Vec::Zero(k));
  d.second.assign(static_cast<std::size_t>(x.colony_count()), Mat::Zero(k, k));
  for (std::size_t i = 0; i < fs.size(); ++i)
    d.first[static_cast<std::size_t>(fs[i].colony)] += fs[i].f * product_except(p, i, kNone);
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j) {
      if (fs[i].colony != fs[j].colony) continue;
      const double rest = product_except(p, i, j);
      const Mat outer = fs[i].f * fs[j].f.transpose();
      d.second[static_cast<std::size_t>(fs[i].colony)] += rest * (outer + outer.transpose());
    }
  return d;
}

double generator_apply(const ModelSpec& spec, const Monomial& F, const Configuration& x,
                       GeneratorForm form) {
  if (F.factors.empty()) throw InvalidInput("monomial must have at least one factor");
  return form == GeneratorForm::gradient ? gradient_generator(spec, F, x)
                                         : expanded_generator(spec, F, x);
}

double carre_du_champ(const ModelSpec& /*spec*/, const Monomial& phi, const Monomial& psi,
                      const Configuration& x) {
  // Gamma is independent of the drift; spec is kept for a uniform signature.
  const auto dphi = monomial_calculus(phi, x);
  const auto dpsi = monomial_calculus(psi, x);
  double total = 0.0;
  for (int xi = 0; xi < x.colony_count(); ++xi) {
    const auto& gp = dphi.first[static_cast<std::size_t>(xi)];
    const auto& gq = dpsi.first[static_cast<std::size_t>(xi)];
    if (gp.cwiseAbs().maxCoeff() == 0.0 || gq.cwiseAbs().maxCoeff() == 0.0) continue;
    total += gp.dot(sampling_covariance(x[xi]) * gq);
  }
  return 0.5 * total;
}

double carre_du_champ_by_definition(const ModelSpec& spec, const Monomial& phi,
                                    const Monomial& psi, const Configuration& x,
                                    GeneratorForm form) {
  const double l_prod = generator_apply(spec, phi * psi, x, form);
  const double l_phi = generator_apply(spec, phi, x, form);
  const double l_psi = generator_apply(spec, psi, x, form);
  return 0.5 * (l_prod - phi.evaluate(x) * l_psi - psi.evaluate(x) * l_phi);
}

std::vector<Monomial> indicator_monomial_basis(int colonies, int types, int max_degree) {
  const int items = colonies * types;
  std::vector<Monomial> out;
  // Non-decreasing index sequences enumerate multisets.
  std::vector<int> idx;
  for (int degree = 1; degree <= max_degree; ++degree) {
    idx.assign(static_cast<std::size_t>(degree), 0);
    while (true) {
      Monomial m;
      for (int item : idx) m.factors.push_back(Factor{item / types, Vec::Unit(types, item % types)});
      out.push_back(std::move(m));
      int pos = degree - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == items - 1) --pos;
      if (pos < 0) break;
      const int next = idx[static_cast<std::size_t>(pos)] + 1;
      for (int q = pos; q < degree; ++q) idx[static_cast<std::size_t>(q)] = next;
    }
  }
  return out;
}

}  // namespace ifv
