#include "ifv/particles.hpp"

#include "ifv/error.hpp"
#include "ifv/parallel.hpp"
#include "ifv/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ifv {

namespace {

// Rates of every (colony, from, to) jump, laid out as (xi * K + u) * K + v.
class MoranRates {
 public:
  MoranRates(const ModelSpec& spec, int population)
      : spec_(spec),
        k_(spec.type_count()),
        l_(spec.colony_count()),
        n_(static_cast<double>(population)),
        shift_(spec.fitness.v.size() ? spec.fitness.v.cwiseAbs().maxCoeff() + 1.0 : 1.0),
        target_(static_cast<std::size_t>(spec.type_count())) {}

  std::size_t size() const { return static_cast<std::size_t>(l_ * k_ * k_); }

  double fill(const ParticleState& s, std::vector<double>& out) {
    out.assign(size(), 0.0);
    double total = 0.0;
    const Mat& a = spec_.kernel.a;
    const Mat& mut = spec_.mutation.rates;
    for (int xi = 0; xi < l_; ++xi) {
      const auto n = s.colony(xi);
      // Weight of becoming type v, before the factor n_u of the jumping type.
      for (int v = 0; v < k_; ++v) {
        double w = 0.5 * n[static_cast<std::size_t>(v)];
        if (spec_.rho != 0.0) {
          double mig = 0.0;
          for (int j = 0; j < l_; ++j)
            if (a(xi, j) != 0.0) mig += a(xi, j) * s.count(j, v);
          w += spec_.rho * mig / n_;
        }
        if (spec_.s != 0.0) {
          double g = 0.0;
          for (int z = 0; z < k_; ++z) g += spec_.fitness.v(v, z) * n[static_cast<std::size_t>(z)];
          w += spec_.s / n_ * n[static_cast<std::size_t>(v)] * (g / n_ + shift_);
        }
        if (spec_.r != 0.0) {
          double p = 0.0;
          for (int a0 = 0; a0 < k_; ++a0) {
            if (n[static_cast<std::size_t>(a0)] == 0) continue;
            for (int b0 = 0; b0 < k_; ++b0)
              p += spec_.recombination(a0, b0, v) * n[static_cast<std::size_t>(a0)] *
                   n[static_cast<std::size_t>(b0)];
          }
          w += spec_.r * p / (n_ * n_);
        }
        target_[static_cast<std::size_t>(v)] = w;
      }
      for (int u = 0; u < k_; ++u) {
        const int nu = n[static_cast<std::size_t>(u)];
        if (nu == 0) continue;
        for (int v = 0; v < k_; ++v) {
          if (v == u) continue;
          const double rate = nu * (target_[static_cast<std::size_t>(v)] + mut(u, v));
          out[static_cast<std::size_t>((xi * k_ + u) * k_ + v)] = rate;
          total += rate;
        }
      }
    }
    return total;
  }

  Transition decode(std::size_t idx) const {
    const int v = static_cast<int>(idx % static_cast<std::size_t>(k_));
    const int u = static_cast<int>((idx / static_cast<std::size_t>(k_)) % static_cast<std::size_t>(k_));
    const int xi = static_cast<int>(idx / static_cast<std::size_t>(k_ * k_));
    return {xi, u, v, 0.0};
  }

 private:
  const ModelSpec& spec_;
  int k_;
  int l_;
  double n_;
  double shift_;
  std::vector<double> target_;
};

void check_state(const ModelSpec& spec, const ParticleState& s) {
  if (s.colonies() != spec.colony_count() || s.types() != spec.type_count())
    throw InvalidInput("particle state shape does not match the model");
  if (!s.is_valid()) throw InvalidInput("particle state counts must be >= 0 and sum to N per colony");
}

// Gillespie loop on [0, t_end]; observer(time, state) after every jump.
template <class Observer>
std::size_t advance(MoranRates& rates, ParticleState& state, double t_end, RandomStream& rng,
                    std::size_t event_cap, Observer&& observer) {
  std::vector<double> buf;
  double t = 0.0;
  std::size_t events = 0;
  while (true) {
    const double total = rates.fill(state, buf);
    if (!(total > 0.0)) break;
    t += rng.exponential(total);
    if (t > t_end) break;
    const auto jump = rates.decode(rng.categorical(buf, total));
    state.move(jump.colony, jump.from, jump.to);
    observer(t, state);
    if (++events > event_cap) throw CapExceeded("moran: event cap exceeded");
  }
  return events;
}

std::size_t binomial_saturating(int n, int k) {
  // C(n, k) with k small; long double avoids overflow before the saturation test.
  long double out = 1.0L;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  if (out > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2))
    return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(std::llround(out));
}

void compositions(int remaining, int parts, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int first = 0; first <= remaining; ++first) {
    cur.push_back(first);
    compositions(remaining - first, parts - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

ParticleState::ParticleState(int colonies, int types, int population)
    : colonies_(colonies),
      types_(types),
      population_(population),
      counts_(static_cast<std::size_t>(colonies) * static_cast<std::size_t>(types), 0) {
  if (colonies < 1 || types < 1 || population < 1)
    throw InvalidInput("particle state: colonies, types and N must be >= 1");
}

ParticleState ParticleState::from_counts(const std::vector<std::vector<int>>& counts) {
  if (counts.empty() || counts.front().empty()) throw InvalidInput("particle state: empty counts");
  const int k = static_cast<int>(counts.front().size());
  const int n = std::accumulate(counts.front().begin(), counts.front().end(), 0);
  ParticleState s(static_cast<int>(counts.size()), k, std::max(n, 1));
  for (int xi = 0; xi < s.colonies_; ++xi) {
    if (static_cast<int>(counts[static_cast<std::size_t>(xi)].size()) != k)
      throw InvalidInput("particle state: ragged counts");
    s.set_colony(xi, counts[static_cast<std::size_t>(xi)]);
  }
  if (!s.is_valid()) throw InvalidInput("particle state: every colony must hold N individuals");
  return s;
}

ParticleState ParticleState::monomorphic(int colonies, int types, int population, int type) {
  ParticleState s(colonies, types, population);
  for (int xi = 0; xi < colonies; ++xi) s.counts_[s.offset(xi, type)] = population;
  return s;
}

ParticleState ParticleState::from_configuration(const Configuration& x, int population) {
  const int k = static_cast<int>(x[0].size());
  ParticleState s(x.colony_count(), k, population);
  for (int xi = 0; xi < x.colony_count(); ++xi) {
    std::vector<int> c(static_cast<std::size_t>(k));
    std::vector<double> frac(static_cast<std::size_t>(k));
    int assigned = 0;
    for (int u = 0; u < k; ++u) {
      const double target = population * x[xi](u);
      c[static_cast<std::size_t>(u)] = static_cast<int>(std::floor(target + 1e-9));
      frac[static_cast<std::size_t>(u)] = target - c[static_cast<std::size_t>(u)];
      assigned += c[static_cast<std::size_t>(u)];
    }
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return frac[static_cast<std::size_t>(a)] > frac[static_cast<std::size_t>(b)];
    });
    for (int i = 0; assigned < population; ++i, ++assigned) ++c[static_cast<std::size_t>(order[static_cast<std::size_t>(i % k)])];
    for (int i = k - 1; assigned > population; --i)
      if (c[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] > 0) {
        --c[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        --assigned;
      }
    s.set_colony(xi, c);
  }
  return s;
}

void ParticleState::move(int colony, int from, int to) {
  --counts_[offset(colony, from)];
  ++counts_[offset(colony, to)];
}

void ParticleState::set_colony(int colony, std::span<const int> counts) {
  std::copy(counts.begin(), counts.end(), counts_.begin() + static_cast<std::ptrdiff_t>(offset(colony, 0)));
}

Configuration ParticleState::empirical() const {
  Configuration x;
  x.colonies.reserve(static_cast<std::size_t>(colonies_));
  for (int xi = 0; xi < colonies_; ++xi) {
    Vec v(types_);
    for (int u = 0; u < types_; ++u) v(u) = static_cast<double>(count(xi, u)) / population_;
    x.colonies.push_back(std::move(v));
  }
  return x;
}

bool ParticleState::is_valid() const {
  for (int xi = 0; xi < colonies_; ++xi) {
    int sum = 0;
    for (int c : colony(xi)) {
      if (c < 0) return false;
      sum += c;
    }
    if (sum != population_) return false;
  }
  return true;
}

double RateTable::total() const {
  double t = 0.0;
  for (const auto& e : entries) t += e.rate;
  return t;
}

RateTable transition_rates(const ModelSpec& spec, const ParticleState& state) {
  check_state(spec, state);
  MoranRates rates(spec, state.population());
  std::vector<double> buf;
  rates.fill(state, buf);
  RateTable table;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (buf[i] == 0.0) continue;
    auto t = rates.decode(i);
    t.rate = buf[i];
    table.entries.push_back(t);
  }
  return table;
}

double moran_generator_apply(const ModelSpec& spec, const Monomial& F, const ParticleState& state) {
  const double base = F.evaluate(state.empirical());
  double total = 0.0;
  for (const auto& t : transition_rates(spec, state).entries) {
    ParticleState next = state;
    next.move(t.colony, t.from, t.to);
    total += t.rate * (F.evaluate(next.empirical()) - base);
  }
  return total;
}

std::size_t state_count(int types, int colonies, int population) {
  const std::size_t per_colony = binomial_saturating(population + types - 1, types - 1);
  std::size_t total = 1;
  for (int i = 0; i < colonies; ++i) {
    if (per_colony != 0 && total > std::numeric_limits<std::size_t>::max() / per_colony)
      return std::numeric_limits<std::size_t>::max();
    total *= per_colony;
  }
  return total;
}

std::vector<ParticleState> enumerate_states(int types, int colonies, int population,
                                            std::size_t cap) {
  if (types < 1 || colonies < 1 || population < 1)
    throw InvalidInput("enumerate_states: K, L, N must be >= 1");
  const std::size_t needed = state_count(types, colonies, population);
  if (needed > cap)
    throw CapExceeded("enumerate_states: " + std::to_string(needed) +
                      " states exceed the cap of " + std::to_string(cap) +
                      "; raise the state cap to at least " + std::to_string(needed));
  std::vector<std::vector<int>> per_colony;
  std::vector<int> scratch;
  compositions(population, types, scratch, per_colony);

  std::vector<ParticleState> out;
  out.reserve(needed);
  std::vector<std::size_t> digit(static_cast<std::size_t>(colonies), 0);
  ParticleState s(colonies, types, population);
  while (true) {
    for (int xi = 0; xi < colonies; ++xi) s.set_colony(xi, per_colony[digit[static_cast<std::size_t>(xi)]]);
    out.push_back(s);
    int pos = colonies - 1;
    while (pos >= 0 && ++digit[static_cast<std::size_t>(pos)] == per_colony.size()) {
      digit[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

std::size_t GeneratorMatrix::index_of(const ParticleState& s) const {
  const auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || *it != s) throw InvalidInput("state not in the enumerated space");
  return static_cast<std::size_t>(it - states.begin());
}

GeneratorMatrix build_generator_matrix(const ModelSpec& spec, int population,
                                       std::size_t state_cap, std::size_t dense_cap) {
  GeneratorMatrix g;
  g.states = enumerate_states(spec.type_count(), spec.colony_count(), population, state_cap);
  if (g.states.size() > dense_cap)
    throw CapExceeded("build_generator_matrix: " + std::to_string(g.states.size()) +
                      " states exceed the dense-matrix cap of " + std::to_string(dense_cap));
  const auto n = static_cast<Eigen::Index>(g.states.size());
  g.q = Mat::Zero(n, n);
  MoranRates rates(spec, population);
  std::vector<double> buf;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = g.states[static_cast<std::size_t>(i)];
    rates.fill(s, buf);
    for (std::size_t idx = 0; idx < buf.size(); ++idx) {
      if (buf[idx] == 0.0) continue;
      const auto t = rates.decode(idx);
      ParticleState next = s;
      next.move(t.colony, t.from, t.to);
      g.q(i, static_cast<Eigen::Index>(g.index_of(next))) += buf[idx];
    }
    g.q(i, i) = 0.0;
    g.q(i, i) = -g.q.row(i).sum();
  }
  return g;
}

TrajectorySample simulate_moran(const ModelSpec& spec, const ParticleState& initial, double t_end,
                                std::uint64_t seed, std::size_t event_cap) {
  check_state(spec, initial);
  if (!(t_end >= 0.0)) throw InvalidInput("simulate_moran: t_end must be >= 0");
  TrajectorySample out;
  out.seed = seed;
  out.times.push_back(0.0);
  out.states.push_back(initial);
  MoranRates rates(spec, initial.population());
  RandomStream rng(seed, 0);
  ParticleState state = initial;
  advance(rates, state, t_end, rng, event_cap, [&](double t, const ParticleState& s) {
    out.times.push_back(t);
    out.states.push_back(s);
  });
  return out;
}

TrajectorySample simulate_wf_chain(const ModelSpec& spec, const ParticleState& initial,
                                   int generations, std::uint64_t seed) {
  check_state(spec, initial);
  if (generations < 0) throw InvalidInput("simulate_wf_chain: generations must be >= 0");
  const int k = spec.type_count();
  const int l = spec.colony_count();
  const int pop = initial.population();
  const double n = pop;
  const Mat& mut = spec.mutation.rates;
  const double max_diag = mut.size() ? mut.diagonal().cwiseAbs().maxCoeff() : 0.0;
  if (n <= max_diag) throw InvalidInput("simulate_wf_chain: need N > max|A(u,u)| so I + A/N is stochastic");
  if (spec.s >= n) throw InvalidInput("simulate_wf_chain: need s < N");
  if (spec.r > n) throw InvalidInput("simulate_wf_chain: need r <= N");
  if (spec.rho > n) throw InvalidInput("simulate_wf_chain: need rho <= N");
  if (spec.s > 0.0 && 1.0 + spec.s / n * spec.fitness.v.minCoeff() < 0.0)
    throw InvalidInput("simulate_wf_chain: parent-pair weight 1 + (s/N) V is negative");

  const Mat step = Mat::Identity(k, k) + mut / n;
  const Mat& a = spec.kernel.a;
  TrajectorySample out;
  out.seed = seed;
  out.times.push_back(0.0);
  out.states.push_back(initial);
  RandomStream rng(seed, 0);
  ParticleState cur = initial;
  std::vector<double> probs(static_cast<std::size_t>(k));
  std::vector<int> offspring(static_cast<std::size_t>(k));
  for (int gen = 1; gen <= generations; ++gen) {
    const Configuration x = cur.empirical();
    ParticleState next = cur;
    for (int xi = 0; xi < l; ++xi) {
      const Vec& mu = x[xi];
      // Parent-pair selection followed by recombination.
      Vec q = Vec::Zero(k);
      double z_total = 0.0;
      for (int p0 = 0; p0 < k; ++p0)
        for (int p1 = 0; p1 < k; ++p1) {
          const double w = mu(p0) * mu(p1) * (1.0 + spec.s / n * spec.fitness.v(p0, p1));
          if (w == 0.0) continue;
          z_total += w;
          q(p0) += w * (1.0 - spec.r / n);
          for (int zt = 0; zt < k; ++zt) q(zt) += w * (spec.r / n) * spec.recombination(p0, p1, zt);
        }
      q /= z_total;
      // Migration: replaced by the type of a uniform individual from xi'.
      if (spec.rho > 0.0 && a.row(xi).sum() > 0.0) {
        Vec src = Vec::Zero(k);
        for (int j = 0; j < l; ++j)
          if (a(xi, j) != 0.0) src += a(xi, j) * x[j];
        q = (1.0 - spec.rho / n) * q + (spec.rho / n) * src;
      }
      const Vec p = step.transpose() * q;
      double total = 0.0;
      for (int u = 0; u < k; ++u) {
        probs[static_cast<std::size_t>(u)] = std::max(p(u), 0.0);
        total += probs[static_cast<std::size_t>(u)];
      }
      std::fill(offspring.begin(), offspring.end(), 0);
      for (int i = 0; i < pop; ++i) ++offspring[rng.categorical(probs, total)];
      next.set_colony(xi, offspring);
    }
    cur = std::move(next);
    out.times.push_back(gen / n);
    out.states.push_back(cur);
  }
  return out;
}

MomentEstimate moment_estimate(const ModelSpec& spec, const ParticleState& initial,
                               const Monomial& F, double t, std::size_t reps, std::uint64_t seed,
                               int threads) {
  check_state(spec, initial);
  if (reps == 0) throw InvalidInput("moment_estimate: reps must be >= 1");
  if (!(t >= 0.0)) throw InvalidInput("moment_estimate: t must be >= 0");
  if (t == 0.0) return MomentEstimate{F.evaluate(initial.empirical()), 0.0, reps, seed};
  std::vector<double> values(reps);
  parallel_for(reps, threads, [&](std::size_t k) {
    MoranRates rates(spec, initial.population());
    RandomStream rng(seed, k);
    ParticleState state = initial;
    advance(rates, state, t, rng, kDefaultEventCap, [](double, const ParticleState&) {});
    values[k] = F.evaluate(state.empirical());
  });
  MomentEstimate out;
  out.reps = reps;
  out.seed = seed;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.estimate = sum / static_cast<double>(reps);
  if (reps > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.estimate) * (v - out.estimate);
    out.std_error = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
  }
  return out;
}

}  // namespace ifv
