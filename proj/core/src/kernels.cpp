#include "ifv/kernels.hpp"

#include "ifv/error.hpp"
#include "ifv/random.hpp"

#include <array>
#include <numeric>
#include <queue>

namespace ifv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int int_pow(int base, int exp) {
  long long out = 1;
  for (int i = 0; i < exp; ++i) {
    out *= base;
    if (out > 1'000'000) throw CapExceeded("kernel: colony count above 10^6");
  }
  return static_cast<int>(out);
}

MigrationKernel complete_uniform(const CompleteUniform& fam) {
  if (fam.colonies < 1) throw InvalidInput("complete-uniform: need >= 1 colony");
  const int l = fam.colonies;
  if (l == 1) return MigrationKernel{Mat::Zero(1, 1)};
  Mat a = Mat::Constant(l, l, 1.0 / (l - 1));
  a.diagonal().setZero();
  return MigrationKernel{std::move(a)};
}

MigrationKernel torus(const TorusNearestNeighbor& fam) {
  if (fam.dimension < 1) throw InvalidInput("torus: dimension must be >= 1");
  if (fam.side < 3) throw InvalidInput("torus: side must be >= 3 (neighbours would collide)");
  const int l = int_pow(fam.side, fam.dimension);
  Mat a = Mat::Zero(l, l);
  const double w = 1.0 / (2.0 * fam.dimension);
  for (int xi = 0; xi < l; ++xi) {
    int stride = 1;
    for (int dim = 0; dim < fam.dimension; ++dim) {
      const int coord = (xi / stride) % fam.side;
      const int up = xi + (((coord + 1) % fam.side) - coord) * stride;
      const int down = xi + (((coord + fam.side - 1) % fam.side) - coord) * stride;
      a(xi, up) += w;
      a(xi, down) += w;
      stride *= fam.side;
    }
  }
  return MigrationKernel{std::move(a)};
}

MigrationKernel hierarchical(const Hierarchical& fam) {
  if (fam.levels < 1 || fam.base < 2) throw InvalidInput("hierarchical: need levels >= 1, base >= 2");
  if (static_cast<int>(fam.weights.size()) != fam.levels)
    throw InvalidInput("hierarchical: need one weight per level");
  double total = 0.0;
  for (double w : fam.weights) {
    if (!(w >= 0.0)) throw InvalidInput("hierarchical: weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidInput("hierarchical: weights must not all vanish");
  const int l = int_pow(fam.base, fam.levels);
  Mat a = Mat::Zero(l, l);
  for (int xi = 0; xi < l; ++xi)
    for (int other = 0; other < l; ++other) {
      if (other == xi) continue;
      int k = 1;
      int block = fam.base;
      while (xi / block != other / block) {
        ++k;
        block *= fam.base;
      }
      const double count = static_cast<double>(block - block / fam.base);
      a(xi, other) = fam.weights[static_cast<std::size_t>(k - 1)] / total / count;
    }
  return MigrationKernel{std::move(a)};
}

// Fraction of walks from colony 0 under a_hat back at 0 within n steps.
std::vector<ReturnFrequency> return_frequencies(const Mat& a_hat, std::uint64_t seed, int walks) {
  constexpr std::array<int, 3> horizons{100, 1000, 10000};
  const int l = static_cast<int>(a_hat.rows());
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) rows[static_cast<std::size_t>(i)].push_back(a_hat(i, j));
  std::array<int, horizons.size()> returned{};
  RandomStream rng(derive_seed(seed, StreamTag::diagnostic));
  for (int w = 0; w < walks; ++w) {
    int pos = 0;
    int first_return = -1;
    for (int step = 1; step <= horizons.back(); ++step) {
      const auto& row = rows[static_cast<std::size_t>(pos)];
      pos = static_cast<int>(rng.categorical(row, 1.0));
      if (pos == 0) {
        first_return = step;
        break;
      }
    }
    for (std::size_t h = 0; h < horizons.size(); ++h)
      if (first_return > 0 && first_return <= horizons[h]) ++returned[h];
  }
  std::vector<ReturnFrequency> out;
  for (std::size_t h = 0; h < horizons.size(); ++h)
    out.push_back({horizons[h], static_cast<double>(returned[h]) / walks});
  return out;
}

}  // namespace

std::string family_name(const KernelFamily& family) {
  return std::visit(overloaded{[](const CompleteUniform&) { return std::string("complete-uniform"); },
                               [](const TorusNearestNeighbor&) { return std::string("torus-nearest-neighbor"); },
                               [](const Hierarchical&) { return std::string("hierarchical"); },
                               [](const CustomKernel&) { return std::string("custom"); }},
                    family);
}

MigrationKernel make_kernel(const KernelFamily& family) {
  return std::visit(overloaded{[](const CompleteUniform& f) { return complete_uniform(f); },
                               [](const TorusNearestNeighbor& f) { return torus(f); },
                               [](const Hierarchical& f) { return hierarchical(f); },
                               [](const CustomKernel& f) { return MigrationKernel{f.matrix}; }},
                    family);
}

Mat symmetrize(const MigrationKernel& kernel) { return 0.5 * (kernel.a + kernel.a.transpose()); }

std::string to_string(Recurrence r) {
  switch (r) {
    case Recurrence::recurrent: return "recurrent";
    case Recurrence::transient: return "transient";
    case Recurrence::unknown: break;
  }
  return "unknown";
}

RecurrenceVerdict classify_recurrence(const KernelFamily& family, std::uint64_t seed, int walks) {
  RecurrenceVerdict out;
  if (const auto* t = std::get_if<TorusNearestNeighbor>(&family)) {
    out.refers_to_infinite_family = true;
    out.verdict = t->dimension <= 2 ? Recurrence::recurrent : Recurrence::transient;
    out.rationale = "symmetric nearest-neighbour walk on Z^" + std::to_string(t->dimension) +
                    " (finite torus of side " + std::to_string(t->side) +
                    " truncates it): recurrent iff d <= 2";
    return out;
  }
  if (const auto* c = std::get_if<CompleteUniform>(&family)) {
    out.refers_to_infinite_family = true;
    out.verdict = Recurrence::transient;
    out.rationale = "complete-uniform kernel on " + std::to_string(c->colonies) +
                    " colonies; its infinite-index analogue never returns (mass spreads over "
                    "infinitely many colonies). Verdict refers to that analogue; every finite "
                    "kernel is trivially recurrent";
    return out;
  }
  out.verdict = Recurrence::unknown;
  if (std::holds_alternative<Hierarchical>(family)) {
    out.rationale = "hierarchical-group recurrence depends on the whole infinite weight sequence; "
                    "not classified, return-frequency table is diagnostic only";
  } else {
    out.rationale = "custom kernel: no analytic criterion; return-frequency table is diagnostic only";
  }
  const auto kernel = make_kernel(family);
  if (kernel.colonies() > 1) out.return_table = return_frequencies(symmetrize(kernel), seed, walks);
  return out;
}

int ReachabilityReport::component_of(int colony) const {
  for (std::size_t c = 0; c < components.size(); ++c)
    for (int m : components[c])
      if (m == colony) return static_cast<int>(c);
  return -1;
}

ReachabilityReport reachability(const MigrationKernel& kernel) {
  const int l = kernel.colonies();
  const Mat& a = kernel.a;
  ReachabilityReport rep;
  rep.reaches.assign(static_cast<std::size_t>(l), std::vector<bool>(static_cast<std::size_t>(l), false));
  rep.out_neighbors.resize(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      if (a(i, j) > 0.0) rep.out_neighbors[static_cast<std::size_t>(i)].push_back(j);

  for (int src = 0; src < l; ++src) {
    auto& row = rep.reaches[static_cast<std::size_t>(src)];
    std::queue<int> frontier;
    for (int j : rep.out_neighbors[static_cast<std::size_t>(src)])
      if (!row[static_cast<std::size_t>(j)]) {
        row[static_cast<std::size_t>(j)] = true;
        frontier.push(j);
      }
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop();
      for (int j : rep.out_neighbors[static_cast<std::size_t>(cur)])
        if (!row[static_cast<std::size_t>(j)]) {
          row[static_cast<std::size_t>(j)] = true;
          frontier.push(j);
        }
    }
  }

  std::vector<bool> has_in(static_cast<std::size_t>(l), false);
  for (int i = 0; i < l; ++i)
    for (int j : rep.out_neighbors[static_cast<std::size_t>(i)]) has_in[static_cast<std::size_t>(j)] = true;
  for (int j = 0; j < l; ++j)
    if (has_in[static_cast<std::size_t>(j)]) rep.has_in_neighbor.push_back(j);

  // Delta_a equates X_xi and X_xi' whenever xi' -> xi; equality classes are the
  // weakly connected components of the positive-entry digraph.
  std::vector<int> parent(static_cast<std::size_t>(l));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int i = 0; i < l; ++i)
    for (int j : rep.out_neighbors[static_cast<std::size_t>(i)]) parent[static_cast<std::size_t>(find(i))] = find(j);
  std::vector<int> label(static_cast<std::size_t>(l), -1);
  for (int i = 0; i < l; ++i) {
    const int root = find(i);
    if (label[static_cast<std::size_t>(root)] < 0) {
      label[static_cast<std::size_t>(root)] = static_cast<int>(rep.components.size());
      rep.components.emplace_back();
    }
    rep.components[static_cast<std::size_t>(label[static_cast<std::size_t>(root)])].push_back(i);
  }
  for (int i = 0; i < l; ++i)
    if (!has_in[static_cast<std::size_t>(i)] && rep.out_neighbors[static_cast<std::size_t>(i)].empty())
      rep.isolated.push_back(i);
  return rep;
}

bool is_irreducible(const Mat& rates) {
  const auto n = rates.rows();
  if (n <= 1) return true;
  auto sweep = [&](bool forward) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<Eigen::Index> q;
    seen[0] = true;
    q.push(0);
    while (!q.empty()) {
      const auto cur = q.front();
      q.pop();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = forward ? rates(cur, j) : rates(j, cur);
        if (j != cur && w > 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = true;
          q.push(j);
        }
      }
    }
    for (bool s : seen)
      if (!s) return false;
    return true;
  };
  return sweep(true) && sweep(false);
}

}  // namespace ifv
