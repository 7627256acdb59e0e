#pragma once

// Independent reference computations used by the tests. None of these call the
// library routine they check; they rebuild the quantity from a different
// formula (closed forms, finite differences, moment ODEs, Eigen's own matrix
// exponential).

#include "ifv/generator.hpp"
#include "ifv/model.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using ifv::Configuration;
using ifv::Mat;
using ifv::Monomial;
using ifv::Vec;

inline Mat expm(const Mat& a) { return a.exp(); }

// Dirichlet-multinomial(alpha, N) probability of the count vector n.
inline double dirichlet_multinomial(const std::vector<int>& n, const Vec& alpha) {
  int total = 0;
  double asum = 0.0, logp = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    total += n[i];
    asum += alpha(static_cast<Eigen::Index>(i));
    logp += std::lgamma(n[i] + alpha(static_cast<Eigen::Index>(i))) -
            std::lgamma(alpha(static_cast<Eigen::Index>(i))) - std::lgamma(n[i] + 1.0);
  }
  logp += std::lgamma(total + 1.0) + std::lgamma(asum) - std::lgamma(total + asum);
  return std::exp(logp);
}

// Generator by central finite differences of F along X_xi + eps delta_u
// (first and second order), combined with the drift and covariance written
// out term by term from the model definition.
inline Vec drift_by_hand(const ifv::ModelSpec& spec, const Configuration& x, int xi) {
  const int K = spec.type_count();
  const Vec& mu = x[xi];
  Vec b = spec.mutation.rates.transpose() * mu;
  for (int j = 0; j < spec.colony_count(); ++j) b += spec.rho * spec.kernel.a(xi, j) * (x[j] - mu);
  const Mat& V = spec.fitness.v;
  double mean = 0.0;
  for (int v = 0; v < K; ++v)
    for (int w = 0; w < K; ++w) mean += V(v, w) * mu(v) * mu(w);
  for (int u = 0; u < K; ++u) {
    double fit = 0.0;
    for (int v = 0; v < K; ++v) fit += V(u, v) * mu(v);
    b(u) += spec.s * (fit - mean) * mu(u);
    double born = 0.0;
    for (int v = 0; v < K; ++v)
      for (int w = 0; w < K; ++w) born += spec.recombination(v, w, u) * mu(v) * mu(w);
    b(u) += spec.r * (born - mu(u));
  }
  return b;
}

inline double generator_fd(const ifv::ModelSpec& spec, const Monomial& F, const Configuration& x,
                           double h = 1e-4) {
  const int K = spec.type_count();
  auto shifted = [&](int xi, int u, double du, int v, double dv) {
    Configuration y = x;
    y[xi](u) += du;
    y[xi](v) += dv;
    return F.evaluate(y);
  };
  double total = 0.0;
  for (int xi = 0; xi < spec.colony_count(); ++xi) {
    const Vec b = drift_by_hand(spec, x, xi);
    const Vec& mu = x[xi];
    for (int u = 0; u < K; ++u) {
      const double d1 = (shifted(xi, u, h, u, 0.0) - shifted(xi, u, -h, u, 0.0)) / (2 * h);
      total += b(u) * d1;
      for (int v = 0; v < K; ++v) {
        const double q = (u == v ? mu(u) : 0.0) - mu(u) * mu(v);
        if (q == 0.0) continue;
        const double d2 = (shifted(xi, u, h, v, h) - shifted(xi, u, h, v, -h) -
                           shifted(xi, u, -h, v, h) + shifted(xi, u, -h, v, -h)) /
                          (4 * h * h);
        total += 0.5 * q * d2;
      }
    }
  }
  return total;
}

// Moments of the neutral two-type (K = 2) model with parent-independent
// mutation theta mu and migration rho a, for x_xi = X_xi(type 0). Degree <= 2
// moments satisfy a closed linear ODE; returns E[x_i x_j] at time t.
inline double second_moment(const Mat& a, double rho, double theta, double mu0, const Vec& x0,
                            int i, int j, double t) {
  const int L = static_cast<int>(a.rows());
  // Variables: 1, x_k (L), x_k x_l for k <= l.
  auto lin = [&](int k) { return 1 + k; };
  std::vector<std::vector<int>> pidx(static_cast<std::size_t>(L), std::vector<int>(static_cast<std::size_t>(L)));
  int n = 1 + L;
  for (int k = 0; k < L; ++k)
    for (int l = k; l < L; ++l) pidx[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = pidx[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = n++;
  Mat G = Mat::Zero(n, n);
  // b_k = theta/2 (mu0 - x_k) + rho sum_l a(k,l) (x_l - x_k), written as
  // coefficient on 1 and on each x_l.
  auto drift_coeff = [&](int k, Vec& on_x, double& on_one) {
    on_x = Vec::Zero(L);
    on_one = 0.5 * theta * mu0;
    on_x(k) -= 0.5 * theta;
    for (int l = 0; l < L; ++l) {
      on_x(l) += rho * a(k, l);
      on_x(k) -= rho * a(k, l);
    }
  };
  for (int k = 0; k < L; ++k) {
    Vec cx;
    double c1;
    drift_coeff(k, cx, c1);
    G(lin(k), 0) += c1;
    for (int l = 0; l < L; ++l) G(lin(k), lin(l)) += cx(l);
  }
  for (int k = 0; k < L; ++k)
    for (int l = k; l < L; ++l) {
      const int row = pidx[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      // d(x_k x_l) = b_k x_l + b_l x_k (+ x_k (1 - x_k) when k = l)
      for (int side = 0; side < 2; ++side) {
        const int p = side == 0 ? k : l, other = side == 0 ? l : k;
        Vec cx;
        double c1;
        drift_coeff(p, cx, c1);
        G(row, lin(other)) += c1;
        for (int m = 0; m < L; ++m) G(row, pidx[static_cast<std::size_t>(m)][static_cast<std::size_t>(other)]) += cx(m);
      }
      if (k == l) {
        G(row, lin(k)) += 1.0;
        G(row, row) -= 1.0;
      }
    }
  Vec m0(n);
  m0(0) = 1.0;
  for (int k = 0; k < L; ++k) m0(lin(k)) = x0(k);
  for (int k = 0; k < L; ++k)
    for (int l = k; l < L; ++l) m0(pidx[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]) = x0(k) * x0(l);
  const Vec mt = expm(G * t) * m0;
  return mt(pidx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
}

// Single-colony K = 2 diffusion with PIM (theta, mu0) and selection
// V = [[1, 0], [0, 0]]: L x^k = k(k-1)/2 (x^{k-1} - x^k)
//   + k theta/2 (mu0 x^{k-1} - x^k) + s k (x^{k+1} - x^{k+2}).
// Truncated moment hierarchy; returns E[x^degree] at time t.
inline double selection_moment(double theta, double mu0, double s, double x0, int degree, double t,
                               int truncation = 80) {
  const int n = truncation + 1;
  Mat G = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double kk = k;
    G(k, k - 1) += 0.5 * kk * (kk - 1) + 0.5 * kk * theta * mu0;
    G(k, k) -= 0.5 * kk * (kk - 1) + 0.5 * kk * theta;
    if (k + 1 < n) G(k, k + 1) += s * kk;
    if (k + 2 < n) G(k, k + 2) -= s * kk;
  }
  Vec m0(n);
  for (int k = 0; k < n; ++k) m0(k) = std::pow(x0, k);
  return (expm(G * t) * m0)(degree);
}

// Neutral single colony without mutation: two lineages coalesce at rate 1, so
// E<X_t, f>^2 = e^{-t} <X,f>^2 + (1 - e^{-t}) <X, f^2>.
inline double coalescence_pair(const Vec& x, const Vec& f, double t) {
  const double p = x.dot(f);
  return std::exp(-t) * p * p + (1 - std::exp(-t)) * x.dot(f.cwiseProduct(f));
}

// One-sample Kolmogorov-Smirnov p-value against the cdf (asymptotic law).
template <class Cdf>
double ks_pvalue(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double c = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - c, c - i / n});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j) p += 2 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

// Random instances for property sweeps; std::mt19937_64 output is fixed by
// the standard, only distribution use is ours.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  int integer(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  Vec simplex(int k) {
    Vec v(k);
    for (int i = 0; i < k; ++i) v(i) = -std::log(1.0 - uniform()) + 1e-3;
    return v / v.sum();
  }
  Vec vector(int k, double lo, double hi) {
    Vec v(k);
    for (int i = 0; i < k; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  ifv::ModelSpec spec(int K, int L) {
    ifv::ModelSpec m;
    m.types.count = K;
    Mat a = Mat::Zero(L, L);
    if (L > 1)
      for (int i = 0; i < L; ++i) {
        Vec row = simplex(L - 1);
        for (int j = 0, c = 0; j < L; ++j)
          if (j != i) a(i, j) = row(c++);
      }
    m.kernel.a = a;
    Mat A = Mat::Zero(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        if (i != j) A(i, j) = uniform(0.0, 1.0);
    for (int i = 0; i < K; ++i) A(i, i) = -(A.row(i).sum() - A(i, i));
    m.mutation.rates = A;
    Mat V(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = i; j < K; ++j) V(i, j) = V(j, i) = uniform(-1.0, 1.0);
    m.fitness.v = V;
    ifv::RecombinationKernel eta(K);
    for (int v = 0; v < K; ++v)
      for (int w = 0; w < K; ++w) {
        const Vec p = simplex(K);
        for (int z = 0; z < K; ++z) eta(v, w, z) = p(z);
      }
    m.recombination = eta;
    m.s = uniform(0.0, 2.0);
    m.r = uniform(0.0, 2.0);
    m.rho = uniform(0.0, 2.0);
    return m;
  }

  Configuration configuration(int L, int K) {
    Configuration x;
    for (int i = 0; i < L; ++i) x.colonies.push_back(simplex(K));
    return x;
  }

  Monomial monomial(int L, int K, int degree) {
    Monomial F;
    for (int i = 0; i < degree; ++i) F.factors.push_back({integer(0, L - 1), vector(K, -1.0, 1.0)});
    return F;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace oracle
