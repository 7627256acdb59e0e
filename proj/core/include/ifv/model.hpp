#pragma once

// Finite-dimensional realization of the interacting Fleming-Viot model:
// K allelic types {0..K-1}, L colonies, and the local operators (mutation,
// selection, recombination, migration) that make up the drift.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace ifv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Tolerance for data invariants (row sums, probability vectors, masses).
inline constexpr double kDataTol = 1e-12;
// Tolerance for identity checks between two computational routes.
inline constexpr double kIdentityTol = 1e-10;
// Absolute floor used by every relative comparison.
inline constexpr double kAbsFloor = 1e-14;

struct TypeSpace {
  int count = 1;
};

// a(xi, xi'): zero diagonal, row-stochastic. The 1x1 zero matrix is the
// kernel of a single isolated colony.
struct MigrationKernel {
  Mat a;

  int colonies() const { return static_cast<int>(a.rows()); }
};

// Parent-independent mutation: A(x,z) = (theta/2) mu_z for z != x.
struct PimTag {
  double theta = 0.0;
  Vec mu;
};

struct MutationGenerator {
  Mat rates;
  std::optional<PimTag> pim;

  static MutationGenerator zero(int types);
  static MutationGenerator parent_independent(double theta, const Vec& mu);
  // Two-type mutation 0 -> 1 at rate u and 1 -> 0 at rate v.
  static MutationGenerator two_type(double u, double v);

  bool is_zero() const { return rates.cwiseAbs().maxCoeff() == 0.0; }
};

struct FitnessMatrix {
  Mat v;
};

// eta(v, w; z): law of the offspring type z for parent types (v, w).
class RecombinationKernel {
 public:
  RecombinationKernel() = default;
  explicit RecombinationKernel(int types);

  // eta(v,w;.) = 1/2 delta_v + 1/2 delta_w
  static RecombinationKernel mixture(int types);
  // eta(v,w;.) = delta_v
  static RecombinationKernel first_parent(int types);
  // eta(v,w;.) = delta_target for every (v,w)
  static RecombinationKernel constant(int types, int target);

  int types() const { return types_; }
  double operator()(int v, int w, int z) const { return data_[index(v, w, z)]; }
  double& operator()(int v, int w, int z) { return data_[index(v, w, z)]; }

 private:
  std::size_t index(int v, int w, int z) const {
    return (static_cast<std::size_t>(v) * types_ + w) * types_ + z;
  }

  int types_ = 0;
  std::vector<double> data_;
};

struct ModelSpec {
  TypeSpace types;
  MigrationKernel kernel;
  MutationGenerator mutation;
  FitnessMatrix fitness;
  RecombinationKernel recombination;
  double s = 0.0;    // selection intensity
  double r = 0.0;    // recombination intensity
  double rho = 0.0;  // migration intensity

  int type_count() const { return types.count; }
  int colony_count() const { return kernel.colonies(); }
};

// Neutral model (no mutation, selection or recombination) on `kernel`.
ModelSpec neutral_spec(int types, MigrationKernel kernel, double rho);

// One probability vector over types per colony.
struct Configuration {
  std::vector<Vec> colonies;

  int colony_count() const { return static_cast<int>(colonies.size()); }
  const Vec& operator[](int xi) const { return colonies[static_cast<std::size_t>(xi)]; }
  Vec& operator[](int xi) { return colonies[static_cast<std::size_t>(xi)]; }

  static Configuration uniform(int colonies, int types);
  static Configuration point_masses(const std::vector<int>& types_per_colony, int types);
};

// Block test function f = (f_xi); same shape as a Configuration.
struct BlockFunction {
  std::vector<Vec> colonies;

  int colony_count() const { return static_cast<int>(colonies.size()); }
  const Vec& operator[](int xi) const { return colonies[static_cast<std::size_t>(xi)]; }
  Vec& operator[](int xi) { return colonies[static_cast<std::size_t>(xi)]; }

  static BlockFunction zero(int colonies, int types);
  // f supported on a single colony.
  static BlockFunction single(int colonies, int at, const Vec& f);

  BlockFunction operator+(const BlockFunction& other) const;
  BlockFunction operator*(double c) const;
};

struct Violation {
  std::string where;
  std::string what;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate_spec(const ModelSpec& spec);
ValidationReport validate_configuration(const ModelSpec& spec, const Configuration& x);

// Exponential tilting S_f: X_xi(v) e^{f_xi(v)} / <X_xi, e^{f_xi}> per colony.
Configuration tilt(const Configuration& x, const BlockFunction& f);
Vec tilt_colony(const Vec& mu, const Vec& f);

// S(mu)(u) = (sum_v V(u,v) mu_v - sum_{v,w} V(v,w) mu_v mu_w) mu_u
Vec local_selection(const Vec& mu, const FitnessMatrix& fitness);
// R(mu)(z) = sum_{v,w} eta(v,w;z) mu_v mu_w - mu_z
Vec local_recombination(const Vec& mu, const RecombinationKernel& eta);
// Q_mu(u,v) = mu_u [u == v] - mu_u mu_v
Mat sampling_covariance(const Vec& mu);

// b_xi(X) as a signed mass over types.
Vec drift(const ModelSpec& spec, const Configuration& x, int colony);
// <b(X), f> = sum_xi b_xi(X) . f_xi
double drift_pairing(const ModelSpec& spec, const Configuration& x, const BlockFunction& f);

}  // namespace ifv
