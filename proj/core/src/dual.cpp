#include "ifv/dual.hpp"

#include "ifv/error.hpp"
#include "ifv/expm.hpp"
#include "ifv/parallel.hpp"
#include "ifv/particles.hpp"

#include <array>
#include <cmath>

namespace ifv {

DualTensor::DualTensor(int types, int rank) : types_(types), rank_(rank) {
  if (types < 1 || rank < 0) throw InvalidInput("DualTensor: bad shape");
  std::size_t n = 1;
  for (int i = 0; i < rank; ++i) n *= static_cast<std::size_t>(types);
  data_.assign(n, 0.0);
}

DualTensor DualTensor::product(std::span<const Vec> factors) {
  if (factors.empty()) throw InvalidInput("DualTensor::product: need >= 1 factor");
  const int k = static_cast<int>(factors.front().size());
  DualTensor t(k, static_cast<int>(factors.size()));
  std::vector<int> u(factors.size(), 0);
  for (std::size_t idx = 0; idx < t.data_.size(); ++idx) {
    double v = 1.0;
    std::size_t rest = idx;
    for (const auto& f : factors) {
      v *= f(static_cast<Eigen::Index>(rest % static_cast<std::size_t>(k)));
      rest /= static_cast<std::size_t>(k);
    }
    t.data_[idx] = v;
  }
  return t;
}

std::size_t DualTensor::stride(int slot) const {
  std::size_t s = 1;
  for (int i = 0; i < slot; ++i) s *= static_cast<std::size_t>(types_);
  return s;
}

double DualTensor::operator()(std::span<const int> u) const {
  std::size_t idx = 0;
  for (int i = rank_ - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(types_) + static_cast<std::size_t>(u[static_cast<std::size_t>(i)]);
  return data_[idx];
}

double& DualTensor::operator()(std::span<const int> u) {
  std::size_t idx = 0;
  for (int i = rank_ - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(types_) + static_cast<std::size_t>(u[static_cast<std::size_t>(i)]);
  return data_[idx];
}

void DualTensor::apply_slot(int slot, const Mat& p) {
  const auto k = static_cast<std::size_t>(types_);
  const std::size_t inner = stride(slot);
  const std::size_t block = inner * k;
  std::vector<double> tmp(k);
  for (std::size_t outer = 0; outer < data_.size(); outer += block)
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = outer + in;
      for (std::size_t u = 0; u < k; ++u) {
        double acc = 0.0;
        for (std::size_t z = 0; z < k; ++z)
          acc += p(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(z)) * data_[base + z * inner];
        tmp[u] = acc;
      }
      for (std::size_t u = 0; u < k; ++u) data_[base + u * inner] = tmp[u];
    }
}

DualTensor DualTensor::identify(int keep, int drop) const {
  if (keep == drop || keep < 0 || drop < 0 || keep >= rank_ || drop >= rank_)
    throw InvalidInput("DualTensor::identify: bad slots");
  const auto k = static_cast<std::size_t>(types_);
  DualTensor out(types_, rank_ - 1);
  const std::size_t drop_stride = stride(drop);
  // Slot `keep` in the reduced tensor shifts down by one if it sat above `drop`.
  const int keep_new = keep < drop ? keep : keep - 1;
  const std::size_t keep_stride_new = out.stride(keep_new);
  for (std::size_t idx = 0; idx < out.data_.size(); ++idx) {
    const std::size_t low = idx % drop_stride;
    const std::size_t high = idx / drop_stride;
    const std::size_t u_keep = (idx / keep_stride_new) % k;
    const std::size_t old = low + drop_stride * (u_keep + k * high);
    out.data_[idx] = data_[old];
  }
  return out;
}

DualTensor DualTensor::branch_selection(int slot, const Mat& fitness) const {
  const auto k = static_cast<std::size_t>(types_);
  DualTensor out(types_, rank_ + 2);
  const std::size_t n = data_.size();
  const std::size_t s = stride(slot);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const auto ui = static_cast<Eigen::Index>((idx / s) % k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        const double w = fitness(ui, static_cast<Eigen::Index>(a)) -
                         fitness(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        out.data_[idx + n * (a + k * b)] = w * data_[idx];
      }
  }
  return out;
}

DualTensor DualTensor::branch_recombination(int slot, const RecombinationKernel& eta) const {
  const auto k = static_cast<std::size_t>(types_);
  DualTensor out(types_, rank_ + 1);
  const std::size_t n = data_.size();
  const std::size_t s = stride(slot);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::size_t ui = (idx / s) % k;
    const std::size_t base = idx - ui * s;
    for (std::size_t partner = 0; partner < k; ++partner) {
      double acc = 0.0;
      for (std::size_t nu = 0; nu < k; ++nu)
        acc += data_[base + nu * s] * eta(static_cast<int>(ui), static_cast<int>(partner), static_cast<int>(nu));
      out.data_[idx + n * partner] = acc;
    }
  }
  return out;
}

double DualTensor::contract(std::span<const Vec> measures) const {
  if (static_cast<int>(measures.size()) != rank_) throw InvalidInput("DualTensor::contract: rank mismatch");
  const auto k = static_cast<std::size_t>(types_);
  std::vector<double> cur = data_;
  // Contract the slowest slot each pass.
  for (int slot = rank_ - 1; slot >= 0; --slot) {
    const std::size_t block = cur.size() / k;
    std::vector<double> next(block, 0.0);
    const Vec& mu = measures[static_cast<std::size_t>(slot)];
    for (std::size_t u = 0; u < k; ++u) {
      const double w = mu(static_cast<Eigen::Index>(u));
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < block; ++i) next[i] += w * cur[u * block + i];
    }
    cur = std::move(next);
  }
  return cur.front();
}

double DualTensor::sup_norm() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

DualState DualState::from_monomial(const Monomial& F, int types) {
  if (F.factors.empty()) throw InvalidInput("dual: monomial must have >= 1 factor");
  DualState st;
  std::vector<Vec> fs;
  for (const auto& fac : F.factors) {
    if (fac.f.size() != types) throw InvalidInput("dual: factor length != K");
    st.colonies.push_back(fac.colony);
    fs.push_back(fac.f);
  }
  st.f = DualTensor::product(fs);
  return st;
}

std::string to_string(DualEventKind kind) {
  switch (kind) {
    case DualEventKind::migration: return "migration";
    case DualEventKind::coalescence: return "coalescence";
    case DualEventKind::selection_branch: return "selection-branch";
    case DualEventKind::recombination_branch: return "recombination-branch";
  }
  return "unknown";
}

namespace {

void evolve_semigroup(const ModelSpec& spec, DualState& st, double dt) {
  if (dt <= 0.0) return;
  st.J += st.size() * dt;
  st.time += dt;
  if (spec.mutation.is_zero()) return;
  const Mat p = matrix_exponential(spec.mutation.rates * dt);
  for (int i = 0; i < st.size(); ++i) st.f.apply_slot(i, p);
}

std::size_t tensor_size_after(const DualState& st, int extra_slots) {
  std::size_t n = st.f.size();
  for (int i = 0; i < extra_slots; ++i) n *= static_cast<std::size_t>(st.f.types());
  return n;
}

}  // namespace

DualStepResult dual_step(const ModelSpec& spec, DualState& state, RandomStream& rng,
                         double horizon, const DualOptions& options) {
  const int m = state.size();
  const Mat& a = spec.kernel.a;

  std::vector<double> mig_weight(static_cast<std::size_t>(m), 0.0);
  double mig_total = 0.0;
  if (spec.rho > 0.0)
    for (int i = 0; i < m; ++i) {
      mig_weight[static_cast<std::size_t>(i)] = spec.rho * a.row(state.colonies[static_cast<std::size_t>(i)]).sum();
      mig_total += mig_weight[static_cast<std::size_t>(i)];
    }
  std::vector<std::array<int, 2>> pairs;
  for (int i = 0; i < m; ++i)
    for (int k = i + 1; k < m; ++k)
      if (state.colonies[static_cast<std::size_t>(i)] == state.colonies[static_cast<std::size_t>(k)]) pairs.push_back({i, k});
  const double coal_total = static_cast<double>(pairs.size());
  const double sel_total = spec.s * m;
  const double rec_total = spec.r * m;
  const std::array<double, 4> totals{mig_total, coal_total, sel_total, rec_total};
  const double total = mig_total + coal_total + sel_total + rec_total;

  DualStepResult out;
  const double tau = total > 0.0 ? rng.exponential(total) : horizon;
  if (!(total > 0.0) || tau >= horizon) {
    evolve_semigroup(spec, state, horizon);
    out.holding = horizon;
    return out;
  }
  evolve_semigroup(spec, state, tau);
  out.holding = tau;

  DualEvent ev;
  ev.time = state.time;
  switch (rng.categorical(totals, total)) {
    case 0: {
      ev.kind = DualEventKind::migration;
      const int i = static_cast<int>(rng.categorical(mig_weight, mig_total));
      const auto& row = a.row(state.colonies[static_cast<std::size_t>(i)]);
      std::vector<double> w(static_cast<std::size_t>(a.cols()));
      for (Eigen::Index j = 0; j < a.cols(); ++j) w[static_cast<std::size_t>(j)] = row(j);
      const int dest = static_cast<int>(rng.categorical(w, row.sum()));
      state.colonies[static_cast<std::size_t>(i)] = dest;
      ev.participants = {i};
      ev.destination = dest;
      break;
    }
    case 1: {
      ev.kind = DualEventKind::coalescence;
      const auto pr = pairs[rng.uniform_index(pairs.size())];
      state.f = state.f.identify(pr[0], pr[1]);
      state.colonies.erase(state.colonies.begin() + pr[1]);
      ev.participants = {pr[0], pr[1]};
      break;
    }
    case 2: {
      ev.kind = DualEventKind::selection_branch;
      const int i = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(m)));
      ev.participants = {i};
      if (tensor_size_after(state, 2) > options.tensor_cap) {
        out.truncated = true;
        break;
      }
      state.f = state.f.branch_selection(i, spec.fitness.v);
      const int at = state.colonies[static_cast<std::size_t>(i)];
      state.colonies.push_back(at);
      state.colonies.push_back(at);
      break;
    }
    default: {
      ev.kind = DualEventKind::recombination_branch;
      const int i = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(m)));
      ev.participants = {i};
      if (tensor_size_after(state, 1) > options.tensor_cap) {
        out.truncated = true;
        break;
      }
      state.f = state.f.branch_recombination(i, spec.recombination);
      state.colonies.push_back(state.colonies[static_cast<std::size_t>(i)]);
      break;
    }
  }
  out.event = std::move(ev);
  return out;
}

DualPath simulate_dual(const ModelSpec& spec, const Monomial& F, double t, RandomStream& rng,
                       const DualOptions& options) {
  if (!(t >= 0.0)) throw InvalidInput("dual: t must be >= 0");
  for (const auto& fac : F.factors)
    if (fac.colony < 0 || fac.colony >= spec.colony_count()) throw InvalidInput("dual: colony out of range");
  DualPath path;
  path.final_state = DualState::from_monomial(F, spec.type_count());
  auto& st = path.final_state;
  while (st.time < t) {
    const int m = st.size();
    const auto step = dual_step(spec, st, rng, t - st.time, options);
    path.holding_times.push_back(step.holding);
    path.sizes.push_back(m);
    if (step.truncated) {
      path.truncated = true;
      break;
    }
    if (!step.event) break;
    path.events.push_back(*step.event);
  }
  return path;
}

DualEstimate dual_expectation(const ModelSpec& spec, const Monomial& F, const Configuration& x0,
                              double t, std::size_t reps, std::uint64_t seed, int threads,
                              const DualOptions& options) {
  if (reps == 0) throw InvalidInput("dual_expectation: reps must be >= 1");
  DualEstimate out;
  out.reps = reps;
  out.seed = seed;
  if (t == 0.0) {
    out.mean = F.evaluate(x0);
    return out;
  }
  std::vector<double> values(reps, 0.0);
  std::vector<char> truncated(reps, 0);
  parallel_for(reps, threads, [&](std::size_t k) {
    RandomStream rng(seed, k);
    const auto path = simulate_dual(spec, F, t, rng, options);
    if (path.truncated) {
      truncated[k] = 1;
      return;
    }
    const auto& st = path.final_state;
    std::vector<Vec> measures;
    measures.reserve(st.colonies.size());
    for (int xi : st.colonies) measures.push_back(x0[xi]);
    values[k] = st.f.contract(measures) * std::exp(spec.s * st.J);
  });
  std::size_t used = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < reps; ++k) {
    if (truncated[k]) {
      ++out.truncated;
      continue;
    }
    ++used;
    sum += values[k];
  }
  if (used == 0) return out;
  out.mean = sum / static_cast<double>(used);
  if (used > 1) {
    double ss = 0.0;
    for (std::size_t k = 0; k < reps; ++k)
      if (!truncated[k]) ss += (values[k] - out.mean) * (values[k] - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(used - 1) / static_cast<double>(used));
  }
  return out;
}

DualityReport verify_duality(const ModelSpec& spec, const Monomial& F, const Configuration& x0,
                             double t, int population, std::size_t reps, std::uint64_t seed,
                             int threads, const DualOptions& options) {
  const auto initial = ParticleState::from_configuration(x0, population);
  const Configuration start = initial.empirical();
  const auto fwd = moment_estimate(spec, initial, F, t, reps, derive_seed(seed, StreamTag::forward), threads);
  const auto dual = dual_expectation(spec, F, start, t, reps, derive_seed(seed, StreamTag::dual), threads, options);

  DualityReport rep;
  rep.forward_mean = fwd.estimate;
  rep.forward_se = fwd.std_error;
  rep.dual_mean = dual.mean;
  rep.dual_se = dual.std_error;
  rep.truncated_fraction = dual.truncated_fraction();
  rep.population = population;
  rep.reps = reps;
  rep.seed = seed;
  const double diff = fwd.estimate - dual.mean;
  const double se = std::hypot(fwd.std_error, dual.std_error);
  if (se > 0.0) {
    rep.z = diff / se;
  } else {
    rep.z = std::abs(diff) <= kAbsFloor ? 0.0 : std::copysign(INFINITY, diff);
  }
  rep.pass = std::abs(rep.z) <= 3.0 || std::abs(diff) <= 3.0 * se + kDualitySlack / population;
  return rep;
}

}  // namespace ifv
