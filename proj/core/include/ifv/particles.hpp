#pragma once

// Finite-population particle systems: the continuous-time Moran chain whose
// empirical measures approximate the interacting Fleming-Viot diffusion, the
// discrete Wright-Fisher chain, and exact enumeration of the Moran state space.
//
// Moran jump n_xi -> n_xi - e_u + e_v (u != v) has rate
//   n_u n_v / 2                                   resampling
// + n_u A(u,v)                                    mutation
// + rho n_u sum_xi' a(xi,xi') n_xi'(v) / N        migration (type replacement)
// + (s/N) n_u n_v (g(v) + C)                      selection, g(v) = sum_z V(v,z) n(z)/N
// + r n_u p(v)                                    recombination, p(v) = sum eta(w,z;v) n(w)n(z)/N^2
// with C = max|V| + 1 keeping selection rates positive; the shift adds
// X_w (C - C) = 0 to the drift.

#include "ifv/generator.hpp"
#include "ifv/model.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace ifv {

class ParticleState {
 public:
  ParticleState() = default;
  ParticleState(int colonies, int types, int population);

  static ParticleState from_counts(const std::vector<std::vector<int>>& counts);
  static ParticleState monomorphic(int colonies, int types, int population, int type);
  // counts = round(N * X) per colony, largest-remainder so each colony sums to N.
  static ParticleState from_configuration(const Configuration& x, int population);

  int colonies() const { return colonies_; }
  int types() const { return types_; }
  int population() const { return population_; }

  int count(int colony, int type) const { return counts_[offset(colony, type)]; }
  std::span<const int> colony(int xi) const {
    return {counts_.data() + offset(xi, 0), static_cast<std::size_t>(types_)};
  }
  const std::vector<int>& counts() const { return counts_; }

  // One individual of type `from` in `colony` becomes type `to`.
  void move(int colony, int from, int to);
  void set_colony(int colony, std::span<const int> counts);

  Configuration empirical() const;
  bool is_valid() const;

  auto operator<=>(const ParticleState&) const = default;

 private:
  std::size_t offset(int colony, int type) const {
    return static_cast<std::size_t>(colony) * static_cast<std::size_t>(types_) +
           static_cast<std::size_t>(type);
  }

  int colonies_ = 0;
  int types_ = 0;
  int population_ = 0;
  std::vector<int> counts_;
};

struct Transition {
  int colony = 0;
  int from = 0;
  int to = 0;
  double rate = 0.0;
};

struct RateTable {
  std::vector<Transition> entries;

  double total() const;
};

RateTable transition_rates(const ModelSpec& spec, const ParticleState& state);

// Applies the discrete generator sum_y q(x,y) (F(y) - F(x)) of the Moran chain
// to F evaluated on empirical measures.
double moran_generator_apply(const ModelSpec& spec, const Monomial& F, const ParticleState& state);

inline constexpr std::size_t kDefaultStateCap = 200'000;
inline constexpr std::size_t kDefaultDenseCap = 4'000;

// Number of particle states, saturating at SIZE_MAX.
std::size_t state_count(int types, int colonies, int population);

// All compositions of N into K parts per colony, lexicographic (colony 0
// outermost, first type slowest within a colony).
std::vector<ParticleState> enumerate_states(int types, int colonies, int population,
                                            std::size_t cap = kDefaultStateCap);

struct GeneratorMatrix {
  std::vector<ParticleState> states;
  Mat q;  // conservative: rows sum to zero

  std::size_t index_of(const ParticleState& s) const;
};

GeneratorMatrix build_generator_matrix(const ModelSpec& spec, int population,
                                       std::size_t state_cap = kDefaultStateCap,
                                       std::size_t dense_cap = kDefaultDenseCap);

struct TrajectorySample {
  std::vector<double> times;
  std::vector<ParticleState> states;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultEventCap = 20'000'000;

// Event-driven exact simulation of the Moran CTMC on [0, t_end]. Uses random
// stream (seed, 0), i.e. replicate 0 of moment_estimate.
TrajectorySample simulate_moran(const ModelSpec& spec, const ParticleState& initial, double t_end,
                                std::uint64_t seed, std::size_t event_cap = kDefaultEventCap);

// Discrete-generation chain: per colony, each offspring draws an ordered parent
// pair with weight 1 + (s/N) V, recombines with probability r/N, migrates with
// probability rho/N, then mutates through I + A/N. N generations = one time unit.
TrajectorySample simulate_wf_chain(const ModelSpec& spec, const ParticleState& initial,
                                   int generations, std::uint64_t seed);

struct MomentEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

// Monte Carlo mean of F(empirical X^N(t)) over `reps` Moran replicates;
// replicate k uses random stream (seed, k).
MomentEstimate moment_estimate(const ModelSpec& spec, const ParticleState& initial,
                               const Monomial& F, double t, std::size_t reps, std::uint64_t seed,
                               int threads = 1);

}  // namespace ifv
