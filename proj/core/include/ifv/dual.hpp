#pragma once

// Function-valued dual of the interacting Fleming-Viot process and the Monte
// Carlo check of the moment duality
//
//   E_X[ <X_pi(t), f> ] = E_(f,pi)[ <X_{pi_t}(0), f_t> exp(s int_0^t |pi_u| du) ].
//
// Between events each tensor slot evolves under e^{dt A}. Events:
//   migration       coordinate i moves xi_i -> xi' at rate rho a(xi_i, xi')
//   coalescence     same-colony pair (i < k) at rate 1: u_k := u_i, slot k deleted
//   selection       rate s per coordinate: two slots appended at xi_i,
//                   f <- (V(u_i, u_m) - V(u_m, u_{m+1})) f
//   recombination   rate r per coordinate: one slot appended at xi_i,
//                   f <- sum_nu f(.., nu at i, ..) eta(u_i, u_m; nu)

#include "ifv/generator.hpp"
#include "ifv/model.hpp"
#include "ifv/random.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ifv {

// Dense real tensor over E^m; slot 0 varies fastest.
class DualTensor {
 public:
  DualTensor() = default;
  DualTensor(int types, int rank);

  static DualTensor product(std::span<const Vec> factors);

  int types() const { return types_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }
  const std::vector<double>& data() const { return data_; }

  double operator()(std::span<const int> u) const;
  double& operator()(std::span<const int> u);

  // f(.., u_slot, ..) <- sum_z p(u_slot, z) f(.., z, ..)
  void apply_slot(int slot, const Mat& p);
  // Sets u_drop := u_keep and removes slot `drop`.
  DualTensor identify(int keep, int drop) const;
  DualTensor branch_selection(int slot, const Mat& fitness) const;
  DualTensor branch_recombination(int slot, const RecombinationKernel& eta) const;
  // <mu_0 (x) ... (x) mu_{m-1}, f>
  double contract(std::span<const Vec> measures) const;
  double sup_norm() const;

 private:
  std::size_t stride(int slot) const;

  int types_ = 0;
  int rank_ = 0;
  std::vector<double> data_;
};

struct DualState {
  std::vector<int> colonies;  // pi, in creation order
  DualTensor f;
  double J = 0.0;     // int_0^t |pi_u| du
  double time = 0.0;

  int size() const { return static_cast<int>(colonies.size()); }
  static DualState from_monomial(const Monomial& F, int types);
};

enum class DualEventKind { migration, coalescence, selection_branch, recombination_branch };

std::string to_string(DualEventKind kind);

struct DualEvent {
  DualEventKind kind = DualEventKind::migration;
  std::vector<int> participants;  // pair for coalescence, single coordinate otherwise
  double time = 0.0;
  int destination = -1;  // migration target colony
};

inline constexpr std::size_t kDefaultTensorCap = std::size_t{1} << 20;

struct DualOptions {
  std::size_t tensor_cap = kDefaultTensorCap;
};

struct DualStepResult {
  std::optional<DualEvent> event;  // empty when the horizon was reached first
  double holding = 0.0;           // time actually elapsed
  bool truncated = false;         // the event would exceed the tensor cap
};

// Samples the next holding time; evolves f by the mutation semigroup and
// accumulates J over min(holding, horizon); then applies the event if it
// happened before the horizon.
DualStepResult dual_step(const ModelSpec& spec, DualState& state, RandomStream& rng,
                         double horizon, const DualOptions& options = {});

struct DualPath {
  DualState final_state;
  std::vector<DualEvent> events;
  std::vector<double> holding_times;  // one per interval, last ends at t
  std::vector<int> sizes;             // |pi| during each interval
  bool truncated = false;
};

DualPath simulate_dual(const ModelSpec& spec, const Monomial& F, double t, RandomStream& rng,
                       const DualOptions& options = {});

struct DualEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::size_t truncated = 0;
  std::uint64_t seed = 0;

  double truncated_fraction() const {
    return reps ? static_cast<double>(truncated) / static_cast<double>(reps) : 0.0;
  }
};

// Replicate k uses random stream (seed, k); truncated replicates are excluded.
DualEstimate dual_expectation(const ModelSpec& spec, const Monomial& F, const Configuration& x0,
                              double t, std::size_t reps, std::uint64_t seed, int threads = 1,
                              const DualOptions& options = {});

// Allowance for the O(1/N) gap between the N-particle forward moments and the
// diffusion moments: |forward - dual| <= 3 se + kDualitySlack / N also passes.
inline constexpr double kDualitySlack = 0.5;

struct DualityReport {
  double forward_mean = 0.0;
  double forward_se = 0.0;
  double dual_mean = 0.0;
  double dual_se = 0.0;
  double z = 0.0;
  double truncated_fraction = 0.0;
  bool pass = false;
  int population = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

// Forward side: Moran moments from counts = round(N X0), stream
// derive_seed(seed, forward). Dual side: started from the same empirical
// measure, stream derive_seed(seed, dual).
DualityReport verify_duality(const ModelSpec& spec, const Monomial& F, const Configuration& x0,
                             double t, int population, std::size_t reps, std::uint64_t seed,
                             int threads = 1, const DualOptions& options = {});

}  // namespace ifv
