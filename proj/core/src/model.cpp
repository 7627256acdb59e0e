#include "ifv/model.hpp"

#include "ifv/error.hpp"

#include <cmath>
#include <sstream>

namespace ifv {

namespace {

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Outputs of S, R and b are signed masses with zero total.
void require_zero_mass(const Vec& v, const char* what) {
  const double scale = std::max(1.0, v.cwiseAbs().sum());
  if (std::abs(v.sum()) > kDataTol * scale) {
    throw std::logic_error(std::string(what) + ": total mass " + fmt_double(v.sum()) +
                           " is not zero");
  }
}

void check_probability(const Vec& mu, const std::string& where, ValidationReport& report) {
  for (Eigen::Index u = 0; u < mu.size(); ++u) {
    if (!std::isfinite(mu(u)) || mu(u) < 0.0) {
      report.violations.push_back({where, "negative or non-finite entry at type " +
                                              std::to_string(u)});
      return;
    }
  }
  if (std::abs(mu.sum() - 1.0) > kDataTol) {
    report.violations.push_back({where, "does not sum to 1 (sum " + fmt_double(mu.sum()) + ")"});
  }
}

}  // namespace

MutationGenerator MutationGenerator::zero(int types) {
  return MutationGenerator{Mat::Zero(types, types), std::nullopt};
}

MutationGenerator MutationGenerator::parent_independent(double theta, const Vec& mu) {
  const auto k = mu.size();
  Mat a = Mat::Zero(k, k);
  for (Eigen::Index x = 0; x < k; ++x) {
    double row = 0.0;
    for (Eigen::Index z = 0; z < k; ++z) {
      if (z == x) continue;
      a(x, z) = 0.5 * theta * mu(z);
      row += a(x, z);
    }
    a(x, x) = -row;
  }
  return MutationGenerator{std::move(a), PimTag{theta, mu}};
}

MutationGenerator MutationGenerator::two_type(double u, double v) {
  Mat a(2, 2);
  a << -u, u, v, -v;
  MutationGenerator gen{std::move(a), std::nullopt};
  if (u + v > 0.0) {
    Vec mu(2);
    mu << v / (u + v), u / (u + v);
    gen.pim = PimTag{2.0 * (u + v), mu};
  }
  return gen;
}

RecombinationKernel::RecombinationKernel(int types)
    : types_(types), data_(static_cast<std::size_t>(types) * types * types, 0.0) {}

RecombinationKernel RecombinationKernel::mixture(int types) {
  RecombinationKernel eta(types);
  for (int v = 0; v < types; ++v)
    for (int w = 0; w < types; ++w) {
      eta(v, w, v) += 0.5;
      eta(v, w, w) += 0.5;
    }
  return eta;
}

RecombinationKernel RecombinationKernel::first_parent(int types) {
  RecombinationKernel eta(types);
  for (int v = 0; v < types; ++v)
    for (int w = 0; w < types; ++w) eta(v, w, v) = 1.0;
  return eta;
}

RecombinationKernel RecombinationKernel::constant(int types, int target) {
  RecombinationKernel eta(types);
  for (int v = 0; v < types; ++v)
    for (int w = 0; w < types; ++w) eta(v, w, target) = 1.0;
  return eta;
}

ModelSpec neutral_spec(int types, MigrationKernel kernel, double rho) {
  ModelSpec spec;
  spec.types.count = types;
  spec.kernel = std::move(kernel);
  spec.mutation = MutationGenerator::zero(types);
  spec.fitness.v = Mat::Zero(types, types);
  spec.recombination = RecombinationKernel::mixture(types);
  spec.rho = rho;
  return spec;
}

Configuration Configuration::uniform(int colonies, int types) {
  return Configuration{std::vector<Vec>(static_cast<std::size_t>(colonies),
                                        Vec::Constant(types, 1.0 / types))};
}

Configuration Configuration::point_masses(const std::vector<int>& types_per_colony, int types) {
  Configuration x;
  for (int u : types_per_colony) x.colonies.push_back(Vec::Unit(types, u));
  return x;
}

BlockFunction BlockFunction::zero(int colonies, int types) {
  return BlockFunction{std::vector<Vec>(static_cast<std::size_t>(colonies), Vec::Zero(types))};
}

BlockFunction BlockFunction::single(int colonies, int at, const Vec& f) {
  auto out = zero(colonies, static_cast<int>(f.size()));
  out[at] = f;
  return out;
}

BlockFunction BlockFunction::operator+(const BlockFunction& other) const {
  BlockFunction out = *this;
  for (int xi = 0; xi < colony_count(); ++xi) out[xi] += other[xi];
  return out;
}

BlockFunction BlockFunction::operator*(double c) const {
  BlockFunction out = *this;
  for (auto& f : out.colonies) f *= c;
  return out;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.where << ": " << v.what << "\n";
  return os.str();
}

ValidationReport validate_spec(const ModelSpec& spec) {
  ValidationReport report;
  const int k = spec.types.count;
  if (k < 1) {
    report.violations.push_back({"types", "type count must be >= 1"});
    return report;
  }

  const Mat& a = spec.kernel.a;
  const int l = static_cast<int>(a.rows());
  if (l < 1 || a.cols() != l) {
    report.violations.push_back({"kernel", "migration matrix must be square with >= 1 colony"});
  } else {
    for (int xi = 0; xi < l; ++xi) {
      const std::string where = "kernel row " + std::to_string(xi);
      if (a(xi, xi) != 0.0)
        report.violations.push_back({where, "nonzero diagonal at colony " + std::to_string(xi)});
      bool negative = false;
      for (int j = 0; j < l; ++j) negative |= !(a(xi, j) >= 0.0) || !std::isfinite(a(xi, j));
      if (negative) report.violations.push_back({where, "negative or non-finite entry"});
      const double target = l == 1 ? 0.0 : 1.0;
      if (std::abs(a.row(xi).sum() - target) > kDataTol)
        report.violations.push_back(
            {where, "row sum " + fmt_double(a.row(xi).sum()) + " != " + fmt_double(target)});
    }
  }

  const Mat& am = spec.mutation.rates;
  if (am.rows() != k || am.cols() != k) {
    report.violations.push_back({"mutation", "rate matrix must be KxK"});
  } else {
    for (int x = 0; x < k; ++x) {
      const std::string where = "mutation row " + std::to_string(x);
      for (int z = 0; z < k; ++z)
        if (z != x && !(am(x, z) >= 0.0))
          report.violations.push_back({where, "negative off-diagonal at column " + std::to_string(z)});
      if (std::abs(am.row(x).sum()) > kDataTol)
        report.violations.push_back({where, "row sum " + fmt_double(am.row(x).sum()) + " != 0"});
    }
    if (spec.mutation.pim) {
      const auto& pim = *spec.mutation.pim;
      if (pim.theta < 0.0) report.violations.push_back({"mutation pim", "theta must be >= 0"});
      if (pim.mu.size() != k) {
        report.violations.push_back({"mutation pim", "mu must have length K"});
      } else {
        check_probability(pim.mu, "mutation pim mu", report);
        for (int x = 0; x < k; ++x)
          for (int z = 0; z < k; ++z)
            if (z != x && std::abs(am(x, z) - 0.5 * pim.theta * pim.mu(z)) > kDataTol)
              report.violations.push_back({"mutation pim", "A(" + std::to_string(x) + "," +
                                                               std::to_string(z) +
                                                               ") != theta/2 mu_z"});
      }
    }
  }

  const Mat& v = spec.fitness.v;
  if (v.rows() != k || v.cols() != k) {
    report.violations.push_back({"fitness", "fitness matrix must be KxK"});
  } else if (!v.allFinite()) {
    report.violations.push_back({"fitness", "non-finite entry"});
  } else if ((v - v.transpose()).cwiseAbs().maxCoeff() > kDataTol) {
    report.violations.push_back({"fitness", "fitness matrix not symmetric"});
  }

  const auto& eta = spec.recombination;
  if (eta.types() != k) {
    report.violations.push_back({"recombination", "kernel must be KxKxK"});
  } else {
    for (int a0 = 0; a0 < k; ++a0)
      for (int b0 = 0; b0 < k; ++b0) {
        double sum = 0.0;
        bool bad = false;
        for (int z = 0; z < k; ++z) {
          sum += eta(a0, b0, z);
          bad |= !(eta(a0, b0, z) >= 0.0);
        }
        const std::string where =
            "recombination (" + std::to_string(a0) + "," + std::to_string(b0) + ")";
        if (bad) report.violations.push_back({where, "negative entry"});
        if (std::abs(sum - 1.0) > kDataTol)
          report.violations.push_back({where, "not a probability vector (sum " + fmt_double(sum) + ")"});
      }
  }

  if (!(spec.s >= 0.0)) report.violations.push_back({"s", "selection intensity must be >= 0"});
  if (!(spec.r >= 0.0)) report.violations.push_back({"r", "recombination intensity must be >= 0"});
  if (!(spec.rho >= 0.0)) report.violations.push_back({"rho", "migration intensity must be >= 0"});
  return report;
}

ValidationReport validate_configuration(const ModelSpec& spec, const Configuration& x) {
  ValidationReport report;
  if (x.colony_count() != spec.colony_count()) {
    report.violations.push_back({"configuration", "colony count does not match the kernel"});
    return report;
  }
  for (int xi = 0; xi < x.colony_count(); ++xi) {
    if (x[xi].size() != spec.type_count()) {
      report.violations.push_back({"configuration colony " + std::to_string(xi), "length != K"});
      continue;
    }
    check_probability(x[xi], "configuration colony " + std::to_string(xi), report);
  }
  return report;
}

Vec tilt_colony(const Vec& mu, const Vec& f) {
  // Shift by max f so exp never overflows; the shift cancels on normalization.
  const double shift = f.maxCoeff();
  Vec w = mu.array() * (f.array() - shift).exp();
  return w / w.sum();
}

Configuration tilt(const Configuration& x, const BlockFunction& f) {
  if (x.colony_count() != f.colony_count()) throw InvalidInput("tilt: shape mismatch");
  Configuration out = x;
  for (int xi = 0; xi < x.colony_count(); ++xi) out[xi] = tilt_colony(x[xi], f[xi]);
  return out;
}

Vec local_selection(const Vec& mu, const FitnessMatrix& fitness) {
  const Vec g = fitness.v * mu;
  const double mean = mu.dot(g);
  Vec out = ((g.array() - mean) * mu.array()).matrix();
  require_zero_mass(out, "local_selection");
  return out;
}

Vec local_recombination(const Vec& mu, const RecombinationKernel& eta) {
  const int k = static_cast<int>(mu.size());
  Vec out = -mu;
  for (int v = 0; v < k; ++v) {
    if (mu(v) == 0.0) continue;
    for (int w = 0; w < k; ++w) {
      const double pair = mu(v) * mu(w);
      if (pair == 0.0) continue;
      for (int z = 0; z < k; ++z) out(z) += eta(v, w, z) * pair;
    }
  }
  require_zero_mass(out, "local_recombination");
  return out;
}

Mat sampling_covariance(const Vec& mu) {
  Mat q = -mu * mu.transpose();
  q.diagonal() += mu;
  return q;
}

Vec drift(const ModelSpec& spec, const Configuration& x, int colony) {
  const Vec& mu = x[colony];
  Vec b = spec.mutation.rates.transpose() * mu;
  if (spec.rho != 0.0) {
    const Mat& a = spec.kernel.a;
    for (int j = 0; j < spec.colony_count(); ++j)
      if (a(colony, j) != 0.0) b += spec.rho * a(colony, j) * (x[j] - mu);
  }
  if (spec.s != 0.0) b += spec.s * local_selection(mu, spec.fitness);
  if (spec.r != 0.0) b += spec.r * local_recombination(mu, spec.recombination);
  require_zero_mass(b, "drift");
  return b;
}

double drift_pairing(const ModelSpec& spec, const Configuration& x, const BlockFunction& f) {
  double total = 0.0;
  for (int xi = 0; xi < x.colony_count(); ++xi) {
    if (f[xi].cwiseAbs().maxCoeff() == 0.0) continue;
    total += drift(spec, x, xi).dot(f[xi]);
  }
  return total;
}

}  // namespace ifv
