#include "ifv/reversibility.hpp"

#include "ifv/error.hpp"
#include "ifv/particles.hpp"
#include "ifv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

namespace ifv {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double pairing(const Vec& a, const Vec& b) { return a.dot(b); }

void require_colony(const ModelSpec& spec, int xi, const char* what) {
  if (xi < 0 || xi >= spec.colony_count())
    throw InvalidInput(std::string(what) + ": colony " + std::to_string(xi) + " out of range");
}

void require_no_mutation_or_recombination(const ModelSpec& spec, const char* what) {
  if (!spec.mutation.is_zero() || spec.r != 0.0)
    throw HypothesisViolated(std::string(what) +
                             ": requires zero mutation and zero recombination (r = " + num(spec.r) +
                             (spec.mutation.is_zero() ? ", A = 0)" : ", A != 0)"));
}

}  // namespace

BalanceReport detailed_balance(const Mat& q, const Vec& pi) {
  if (q.rows() != q.cols() || pi.size() != q.rows() || q.rows() == 0)
    throw InvalidInput("detailed_balance: shape mismatch");
  BalanceReport rep;
  const double scale = std::max(1.0, q.diagonal().cwiseAbs().maxCoeff());
  rep.stationarity_residual = (pi.transpose() * q).cwiseAbs().maxCoeff() / scale;
  if (!(rep.stationarity_residual <= kStationarityTol))
    throw InvalidInput("detailed_balance: pi is not stationary (residual " +
                       num(rep.stationarity_residual) + ")");
  const auto n = q.rows();
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const double fwd = pi(x) * q(x, y);
      const double bwd = pi(y) * q(y, x);
      const double res = std::abs(fwd - bwd) / std::max(fwd + bwd, kAbsFloor);
      if (res > rep.residual) {
        rep.residual = res;
        rep.worst_edge = {static_cast<int>(x), static_cast<int>(y)};
      }
    }
  const auto classes = communicating_classes(q);
  rep.class_count = classes.size();
  rep.closed_class_count =
      static_cast<std::size_t>(std::count_if(classes.begin(), classes.end(), [](const auto& c) { return c.closed; }));
  rep.irreducible = classes.size() == 1;
  return rep;
}

std::string to_string(CycleVerdict v) {
  switch (v) {
    case CycleVerdict::consistent: return "consistent";
    case CycleVerdict::inconsistent: return "inconsistent";
    case CycleVerdict::immediate_irreversible: return "immediate-irreversible";
  }
  return "unknown";
}

CycleReport kolmogorov_check(const Mat& q, double tol) {
  if (q.rows() != q.cols() || q.rows() == 0) throw InvalidInput("kolmogorov_check: bad matrix");
  CycleReport rep;
  const auto classes = communicating_classes(q);
  const auto n = static_cast<std::size_t>(q.rows());
  std::vector<double> phi(n, 0.0);
  std::vector<int> parent(n, -1);
  std::vector<bool> seen(n, false);
  for (const auto& cls : classes) {
    if (!cls.closed) continue;
    ++rep.closed_class_count;
    const auto& st = cls.states;
    // One-way edges first: they fail the criterion on any cycle through them.
    for (std::size_t i = 0; i < st.size(); ++i)
      for (std::size_t j = i + 1; j < st.size(); ++j) {
        const bool f = q(st[i], st[j]) > 0.0, b = q(st[j], st[i]) > 0.0;
        if (f != b) {
          rep.verdict = CycleVerdict::immediate_irreversible;
          rep.witness_edge = f ? std::pair{st[i], st[j]} : std::pair{st[j], st[i]};
          rep.inconsistency = INFINITY;
          return rep;
        }
      }
    std::queue<int> bfs;
    bfs.push(st.front());
    seen[static_cast<std::size_t>(st.front())] = true;
    while (!bfs.empty()) {
      const int x = bfs.front();
      bfs.pop();
      for (int y : st) {
        if (seen[static_cast<std::size_t>(y)] || y == x || !(q(x, y) > 0.0)) continue;
        seen[static_cast<std::size_t>(y)] = true;
        parent[static_cast<std::size_t>(y)] = x;
        phi[static_cast<std::size_t>(y)] = phi[static_cast<std::size_t>(x)] + std::log(q(x, y)) - std::log(q(y, x));
        bfs.push(y);
      }
    }
    for (std::size_t i = 0; i < st.size(); ++i)
      for (std::size_t j = i + 1; j < st.size(); ++j) {
        const int x = st[i], y = st[j];
        if (!(q(x, y) > 0.0)) continue;
        if (parent[static_cast<std::size_t>(y)] == x || parent[static_cast<std::size_t>(x)] == y) continue;
        ++rep.non_tree_edges;
        const double dev = std::abs(std::log(q(x, y)) - std::log(q(y, x)) -
                                    (phi[static_cast<std::size_t>(y)] - phi[static_cast<std::size_t>(x)]));
        if (dev > rep.inconsistency) {
          rep.inconsistency = dev;
          rep.witness_edge = {x, y};
        }
      }
  }
  rep.verdict = rep.inconsistency <= tol ? CycleVerdict::consistent : CycleVerdict::inconsistent;
  return rep;
}

CocycleValue cocycle_lambda(const ModelSpec& spec, const BlockFunction& f, const Configuration& x,
                            int nodes) {
  const auto res = integrate(
      [&](double s) { return 2.0 * drift_pairing(spec, tilt(x, f * s), f); }, 0.0, 1.0, nodes);
  return {res.value, res.error};
}

CocycleValue backward_drift_integral(const ModelSpec& spec, const BlockFunction& f,
                                     const Configuration& x, double t, int nodes) {
  if (t == 0.0) return {};
  const auto res = integrate(
      [&](double s) { return 2.0 * drift_pairing(spec, tilt(x, f * (-s)), f); }, 0.0, t, nodes);
  return {res.value, res.error};
}

IdentityCheck shift_identity_residual(const ModelSpec& spec, int xi1, const Vec& f, int xi2,
                                      const Vec& g, const Configuration& x, int nodes) {
  require_colony(spec, xi1, "shift_identity_residual");
  require_colony(spec, xi2, "shift_identity_residual");
  if (xi1 == xi2) throw InvalidInput("shift_identity_residual: colonies must differ");
  const int L = spec.colony_count();
  const auto F = BlockFunction::single(L, xi1, f);
  const auto G = BlockFunction::single(L, xi2, g);
  const auto shifted = cocycle_lambda(spec, F, tilt(x, G), nodes);
  const auto plain = cocycle_lambda(spec, F, x, nodes);
  IdentityCheck out;
  out.lhs = shifted.value - plain.value;
  out.rhs = 2.0 * spec.rho * spec.kernel.a(xi1, xi2) * pairing(tilt_colony(x[xi2], g) - x[xi2], f);
  out.residual = std::abs(out.lhs - out.rhs);
  out.quadrature_error = shifted.quadrature_error + plain.quadrature_error;
  return out;
}

IdentityCheck necessary_condition_residual(const ModelSpec& spec, int xi1, const Vec& f, int xi2,
                                           const Vec& g, const Configuration& x) {
  require_colony(spec, xi1, "necessary_condition_residual");
  require_colony(spec, xi2, "necessary_condition_residual");
  IdentityCheck out;
  out.lhs = spec.kernel.a(xi1, xi2) * pairing(tilt_colony(x[xi2], g) - x[xi2], f);
  out.rhs = spec.kernel.a(xi2, xi1) * pairing(tilt_colony(x[xi1], f) - x[xi1], g);
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

IdentityCheck cocycle_identity_defect(const ModelSpec& spec, const BlockFunction& f,
                                      const BlockFunction& g, const Configuration& x, int nodes) {
  const auto sum = cocycle_lambda(spec, f + g, x, nodes);
  const auto a = cocycle_lambda(spec, f, tilt(x, g), nodes);
  const auto b = cocycle_lambda(spec, g, x, nodes);
  IdentityCheck out;
  out.lhs = sum.value;
  out.rhs = a.value + b.value;
  out.residual = std::abs(out.lhs - out.rhs);
  out.quadrature_error = sum.quadrature_error + a.quadrature_error + b.quadrature_error;
  return out;
}

std::string to_string(SingleSiteVerdict v) {
  return v == SingleSiteVerdict::reversible_form ? "reversible-form" : "violation";
}

SingleSiteCertificate classify_single_site(const ModelSpec& spec) {
  const int K = spec.type_count();
  const auto& eta = spec.recombination;
  SingleSiteCertificate cert;
  cert.h = Vec::Zero(K);
  if (K == 1) {
    cert.verdict = SingleSiteVerdict::reversible_form;
    cert.mu = Vec::Ones(1);
    return cert;
  }

  Mat m = spec.mutation.rates;
  if (spec.r != 0.0)
    for (int x = 0; x < K; ++x)
      for (int z = 0; z < K; ++z) m(x, z) += spec.r * (eta(x, x, z) - (x == z ? 1.0 : 0.0));

  Vec c(K);
  c(0) = m(1, 0);
  for (int z = 1; z < K; ++z) c(z) = m(0, z);
  const double total = c.sum();
  cert.theta = 2.0 * total;
  cert.mu = total > 0.0 ? Vec(c / total) : Vec(Vec::Constant(K, 1.0 / K));

  std::string witness;
  for (int x = 0; x < K; ++x) {
    for (int z = 0; z < K; ++z) {
      const double expected = x == z ? c(x) - total : c(z);
      const double dev = std::abs(m(x, z) - expected);
      if (dev > cert.mutation_residual) cert.mutation_residual = dev;
      if (dev > kIdentityTol && witness.empty())
        witness = "row " + std::to_string(x) + ", column " + std::to_string(z) + ": M = " +
                  num(m(x, z)) + ", parent-independent form requires " + num(expected);
    }
  }

  if (spec.r != 0.0) {
    auto d = [&](int x, int y, int z) { return eta(x, y, z) - 0.5 * (eta(x, x, z) + eta(y, y, z)); };
    for (int y = 1; y < K; ++y) cert.h(y) = -d(0, y, 0);
    for (int x = 0; x < K; ++x)
      for (int y = x + 1; y < K; ++y)
        for (int z = 0; z < K; ++z) {
          const double target = (cert.h(x) - cert.h(y)) * ((z == x ? 1.0 : 0.0) - (z == y ? 1.0 : 0.0));
          const double dev = std::abs(d(x, y, z) - target);
          if (dev > cert.recombination_residual) cert.recombination_residual = dev;
          if (dev > kIdentityTol && witness.empty())
            witness = "pair (" + std::to_string(x) + ", " + std::to_string(y) + "), type " +
                      std::to_string(z) + ": eta(x,y) - (eta(x,x) + eta(y,y))/2 = " + num(d(x, y, z)) +
                      ", decomposition requires " + num(target);
        }
  }

  cert.witness = witness;
  cert.verdict = witness.empty() ? SingleSiteVerdict::reversible_form : SingleSiteVerdict::violation;
  return cert;
}

DeltaMembership delta_a_membership(const MigrationKernel& kernel, const Configuration& x) {
  const int L = kernel.colonies();
  if (x.colony_count() != L) throw InvalidInput("delta_a_membership: colony count mismatch");
  DeltaMembership out;
  out.atoms.assign(static_cast<std::size_t>(L), -1);
  for (int xi = 0; xi < L; ++xi) {
    Eigen::Index u = 0;
    const double top = x[xi].maxCoeff(&u);
    if (top >= 1.0 - kDataTol)
      out.atoms[static_cast<std::size_t>(xi)] = static_cast<int>(u);
    else
      out.non_dirac.push_back(xi);
  }
  for (int xi = 0; xi < L && !out.offending_pair; ++xi)
    for (int xj = 0; xj < L; ++xj) {
      if (xi == xj || !(kernel.a(xi, xj) > 0.0)) continue;
      const int ai = out.atoms[static_cast<std::size_t>(xi)], aj = out.atoms[static_cast<std::size_t>(xj)];
      if (ai >= 0 && aj >= 0 && ai != aj) {
        out.offending_pair = std::pair{xi, xj};
        break;
      }
    }
  if (!out.non_dirac.empty()) {
    out.reason = "colony " + std::to_string(out.non_dirac.front()) + " is not a point mass";
  } else if (out.offending_pair) {
    const auto [xi, xj] = *out.offending_pair;
    out.reason = "colonies " + std::to_string(xi) + " -> " + std::to_string(xj) + " carry types " +
                 std::to_string(out.atoms[static_cast<std::size_t>(xi)]) + " and " +
                 std::to_string(out.atoms[static_cast<std::size_t>(xj)]);
  }
  out.member = out.reason.empty();
  return out;
}

AbsorbingReport absorbing_check(const ModelSpec& spec, const Configuration& x, int max_degree) {
  require_no_mutation_or_recombination(spec, "absorbing_check");
  const auto v = validate_configuration(spec, x);
  if (!v.ok()) throw InvalidInput("absorbing_check: " + v.summary());
  AbsorbingReport rep;
  rep.membership = delta_a_membership(spec.kernel, x);
  rep.isolated = reachability(spec.kernel).isolated;
  for (const auto& F : indicator_monomial_basis(spec.colony_count(), spec.type_count(), max_degree)) {
    rep.max_generator = std::max(rep.max_generator, std::abs(generator_apply(spec, F, x)));
    ++rep.monomials_checked;
  }
  rep.generator_vanishes = rep.max_generator <= kAbsFloor;
  return rep;
}

ClosedClassComparison compare_closed_classes_with_delta_a(const ModelSpec& spec, int population) {
  require_no_mutation_or_recombination(spec, "compare_closed_classes_with_delta_a");
  const auto gm = build_generator_matrix(spec, population);
  const auto classes = communicating_classes(gm.q);
  ClosedClassComparison out;
  out.component_count = reachability(spec.kernel).components.size();

  std::set<int> closed_states;
  out.all_closed_singletons = true;
  for (const auto& c : classes) {
    if (!c.closed) continue;
    ++out.closed_classes;
    if (c.states.size() != 1) out.all_closed_singletons = false;
    closed_states.insert(c.states.begin(), c.states.end());
  }
  std::set<int> delta_states;
  for (std::size_t i = 0; i < gm.states.size(); ++i)
    if (delta_a_membership(spec.kernel, gm.states[i].empirical()).member)
      delta_states.insert(static_cast<int>(i));
  out.delta_a_states = delta_states.size();
  out.coincide = out.all_closed_singletons && closed_states == delta_states;

  std::ostringstream os;
  os << out.closed_classes << " closed classes, " << out.delta_a_states << " grid states in Delta_a, "
     << out.component_count << " component(s)";
  if (!out.all_closed_singletons) os << "; some closed class has more than one state";
  if (closed_states != delta_states) os << "; closed states differ from Delta_a";
  out.detail = os.str();
  return out;
}

DiracProbe dirac_support_probe(const ModelSpec& spec, std::span<const Configuration> samples) {
  if (samples.empty()) throw InvalidInput("dirac_support_probe: no samples");
  const int L = spec.colony_count();
  DiracProbe out;
  out.samples = samples.size();
  out.heterozygosity.assign(static_cast<std::size_t>(L), 0.0);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      if (i != j && spec.kernel.a(i, j) > 0.0) edges.emplace_back(i, j);
  double agree = 0.0;
  for (const auto& x : samples) {
    if (x.colony_count() != L) throw InvalidInput("dirac_support_probe: colony count mismatch");
    std::vector<Eigen::Index> modal(static_cast<std::size_t>(L));
    for (int xi = 0; xi < L; ++xi) {
      out.heterozygosity[static_cast<std::size_t>(xi)] += 1.0 - x[xi].squaredNorm();
      x[xi].maxCoeff(&modal[static_cast<std::size_t>(xi)]);
    }
    if (edges.empty()) {
      agree += 1.0;
      continue;
    }
    std::size_t same = 0;
    for (const auto& [i, j] : edges)
      if (modal[static_cast<std::size_t>(i)] == modal[static_cast<std::size_t>(j)]) ++same;
    agree += static_cast<double>(same) / static_cast<double>(edges.size());
  }
  for (auto& h : out.heterozygosity) h /= static_cast<double>(samples.size());
  out.agreement = agree / static_cast<double>(samples.size());
  return out;
}

ModelSpec stepping_stone_spec(const SteppingStoneParams& p) {
  if (p.u < 0.0 || p.v < 0.0) throw InvalidInput("stepping-stone: mutation rates must be >= 0");
  ModelSpec spec;
  spec.types.count = 2;
  spec.kernel = make_kernel(TorusNearestNeighbor{p.dimension, p.side});
  if (p.u + p.v > 0.0) {
    spec.mutation = MutationGenerator::two_type(p.u, p.v);
  } else {
    spec.mutation = MutationGenerator::zero(2);
  }
  spec.fitness.v = (Mat(2, 2) << 2.0, 1.0, 1.0, 0.0).finished();
  spec.recombination = RecombinationKernel::mixture(2);
  spec.s = p.s;
  spec.rho = p.rho;
  return spec;
}

SteppingStoneClassification classify_stepping_stone(const SteppingStoneParams& p) {
  const auto spec = stepping_stone_spec(p);
  SteppingStoneClassification out;
  out.mutation_free = spec.mutation.is_zero();
  out.mutation_irreducible = is_irreducible(spec.mutation.rates);
  out.recurrence = classify_recurrence(TorusNearestNeighbor{p.dimension, p.side});
  out.single_site = classify_single_site(spec);
  out.reversible_candidate = out.mutation_free && out.recurrence.verdict == Recurrence::recurrent;

  std::ostringstream os;
  if (out.mutation_free) {
    os << "no mutation: reversible laws are supported on Delta_a; symmetrized kernel is "
       << to_string(out.recurrence.verdict) << " (d = " << p.dimension << ")";
  } else if (out.mutation_irreducible && p.rho > 0.0) {
    os << "irreducible mutation with migration: no reversible law (consistent with the "
          "migration+mutation theorem)";
  } else {
    os << "mutation present (single-site " << to_string(out.single_site.verdict)
       << "); the example admits reversibility only without mutation";
  }
  out.rationale = os.str();
  return out;
}

}  // namespace ifv
