#include "ifv/io.hpp"

#include "ifv/error.hpp"

#include <charconv>
#include <cstdio>

namespace ifv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const json& field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
  return doc.at(key);
}

double number(const json& v, const char* what) {
  if (!v.is_number()) throw InvalidInput(std::string(what) + ": expected a number");
  return v.get<double>();
}

int integer(const json& v, const char* what) {
  if (!v.is_number_integer()) throw InvalidInput(std::string(what) + ": expected an integer");
  return v.get<int>();
}

double number_or(const json& doc, const char* key, double fallback) {
  return doc.contains(key) ? number(doc.at(key), key) : fallback;
}

Vec vec_from(const json& v, const char* what) {
  if (!v.is_array()) throw InvalidInput(std::string(what) + ": expected an array");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], what);
  return out;
}

Mat mat_from(const json& v, const char* what) {
  if (!v.is_array() || v.empty()) throw InvalidInput(std::string(what) + ": expected a nonempty array of rows");
  const std::size_t rows = v.size();
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) throw InvalidInput(std::string(what) + ": ragged matrix");
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], what);
  }
  return out;
}

json vec_to(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json mat_to(const Mat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json pair_to(std::pair<int, int> p) { return json::array({p.first, p.second}); }

MutationGenerator mutation_from(const json& doc, int K) {
  const std::string kind = field(doc, "kind").get<std::string>();
  if (kind == "zero") return MutationGenerator::zero(K);
  if (kind == "pim") return MutationGenerator::parent_independent(number(field(doc, "theta"), "theta"), vec_from(field(doc, "mu"), "mu"));
  if (kind == "two-type") return MutationGenerator::two_type(number(field(doc, "u"), "u"), number(field(doc, "v"), "v"));
  if (kind == "matrix") return MutationGenerator{mat_from(field(doc, "rates"), "mutation.rates"), std::nullopt};
  throw InvalidInput("mutation.kind: unknown kind \"" + kind + "\"");
}

RecombinationKernel recombination_from(const json& doc, int K) {
  const std::string kind = field(doc, "kind").get<std::string>();
  if (kind == "mixture") return RecombinationKernel::mixture(K);
  if (kind == "first-parent") return RecombinationKernel::first_parent(K);
  if (kind == "constant") return RecombinationKernel::constant(K, integer(field(doc, "target"), "target"));
  if (kind == "table") {
    const auto& t = field(doc, "eta");
    RecombinationKernel eta(K);
    if (!t.is_array() || t.size() != static_cast<std::size_t>(K))
      throw InvalidInput("recombination.eta: expected K x K x K array");
    for (int v = 0; v < K; ++v) {
      const Mat slab = mat_from(t[static_cast<std::size_t>(v)], "recombination.eta");
      if (slab.rows() != K || slab.cols() != K) throw InvalidInput("recombination.eta: expected K x K x K array");
      for (int w = 0; w < K; ++w)
        for (int z = 0; z < K; ++z) eta(v, w, z) = slab(w, z);
    }
    return eta;
  }
  throw InvalidInput("recombination.kind: unknown kind \"" + kind + "\"");
}

}  // namespace

KernelFamily kernel_family_from_json(const json& doc) {
  try {
    const std::string family = field(doc, "family").get<std::string>();
    const json params = doc.contains("params") ? doc.at("params") : json::object();
    if (family == "complete-uniform") return CompleteUniform{integer(field(params, "colonies"), "colonies")};
    if (family == "torus-nearest-neighbor")
      return TorusNearestNeighbor{integer(field(params, "dimension"), "dimension"), integer(field(params, "side"), "side")};
    if (family == "hierarchical") {
      Hierarchical h{integer(field(params, "levels"), "levels"), integer(field(params, "base"), "base"), {}};
      const Vec w = vec_from(field(params, "weights"), "weights");
      h.weights.assign(w.data(), w.data() + w.size());
      return h;
    }
    if (family == "custom") return CustomKernel{mat_from(field(doc, "matrix"), "kernel.matrix")};
    throw InvalidInput("kernel.family: unknown family \"" + family + "\"");
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("kernel: ") + e.what());
  }
}

json kernel_family_to_json(const KernelFamily& family, bool with_matrix) {
  json out;
  out["family"] = family_name(family);
  out["params"] = std::visit(
      overloaded{[](const CompleteUniform& f) { return json{{"colonies", f.colonies}}; },
                 [](const TorusNearestNeighbor& f) { return json{{"dimension", f.dimension}, {"side", f.side}}; },
                 [](const Hierarchical& f) {
                   return json{{"levels", f.levels}, {"base", f.base}, {"weights", f.weights}};
                 },
                 [](const CustomKernel&) { return json::object(); }},
      family);
  if (with_matrix || std::holds_alternative<CustomKernel>(family)) out["matrix"] = mat_to(make_kernel(family).a);
  return out;
}

ModelSpec model_from_json(const json& doc) {
  try {
    ModelSpec spec;
    spec.types.count = integer(field(doc, "types"), "types");
    const int K = spec.types.count;
    if (K < 1) throw InvalidInput("types: must be >= 1");
    spec.kernel = make_kernel(kernel_family_from_json(field(doc, "kernel")));
    spec.mutation = doc.contains("mutation") ? mutation_from(doc.at("mutation"), K) : MutationGenerator::zero(K);
    spec.fitness.v = doc.contains("fitness") ? mat_from(doc.at("fitness"), "fitness") : Mat(Mat::Zero(K, K));
    spec.recombination = doc.contains("recombination") ? recombination_from(doc.at("recombination"), K)
                                                       : RecombinationKernel::mixture(K);
    spec.s = number_or(doc, "s", 0.0);
    spec.r = number_or(doc, "r", 0.0);
    spec.rho = number_or(doc, "rho", 0.0);
    return spec;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("model: ") + e.what());
  }
}

json model_to_json(const ModelSpec& spec) {
  const int K = spec.type_count();
  json out;
  out["types"] = K;
  out["kernel"] = json{{"family", "custom"}, {"params", json::object()}, {"matrix", mat_to(spec.kernel.a)}};
  if (spec.mutation.pim)
    out["mutation"] = json{{"kind", "matrix"}, {"rates", mat_to(spec.mutation.rates)},
                           {"pim", {{"theta", spec.mutation.pim->theta}, {"mu", vec_to(spec.mutation.pim->mu)}}}};
  else
    out["mutation"] = json{{"kind", "matrix"}, {"rates", mat_to(spec.mutation.rates)}};
  out["fitness"] = mat_to(spec.fitness.v);
  json eta = json::array();
  for (int v = 0; v < K; ++v) {
    json slab = json::array();
    for (int w = 0; w < K; ++w) {
      json row = json::array();
      for (int z = 0; z < K; ++z) row.push_back(spec.recombination(v, w, z));
      slab.push_back(std::move(row));
    }
    eta.push_back(std::move(slab));
  }
  out["recombination"] = json{{"kind", "table"}, {"eta", std::move(eta)}};
  out["s"] = spec.s;
  out["r"] = spec.r;
  out["rho"] = spec.rho;
  return out;
}

std::string spec_hash(const ModelSpec& spec) {
  const std::string text = model_to_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Configuration configuration_from_json(const json& doc) {
  if (!doc.is_array()) throw InvalidInput("configuration: expected an array of per-colony vectors");
  Configuration x;
  for (const auto& c : doc) x.colonies.push_back(vec_from(c, "configuration"));
  return x;
}

json configuration_to_json(const Configuration& x) {
  json out = json::array();
  for (const auto& c : x.colonies) out.push_back(vec_to(c));
  return out;
}

Monomial monomial_from_json(const json& doc) {
  if (!doc.is_array() || doc.empty()) throw InvalidInput("monomial: expected a nonempty array of factors");
  Monomial F;
  for (const auto& fac : doc) F.factors.push_back({integer(field(fac, "colony"), "colony"), vec_from(field(fac, "f"), "f")});
  return F;
}

json monomial_to_json(const Monomial& F) {
  json out = json::array();
  for (const auto& fac : F.factors) out.push_back(json{{"colony", fac.colony}, {"f", vec_to(fac.f)}});
  return out;
}

BlockFunction block_function_from_json(const json& doc) {
  if (!doc.is_array()) throw InvalidInput("block function: expected an array of per-colony vectors");
  BlockFunction f;
  for (const auto& c : doc) f.colonies.push_back(vec_from(c, "block function"));
  return f;
}

json to_json(const MomentEstimate& m) {
  return json{{"estimate", m.estimate}, {"std_error", m.std_error}, {"reps", m.reps}, {"seed", m.seed}};
}

json to_json(const DualEstimate& d) {
  return json{{"estimate", d.mean}, {"std_error", d.std_error}, {"reps", d.reps},
              {"truncated", d.truncated}, {"truncated_fraction", d.truncated_fraction()}, {"seed", d.seed}};
}

json to_json(const DualityReport& r) {
  return json{{"forward_mean", r.forward_mean}, {"forward_se", r.forward_se}, {"dual_mean", r.dual_mean},
              {"dual_se", r.dual_se}, {"z", std::isfinite(r.z) ? json(r.z) : json(nullptr)},
              {"truncated_fraction", r.truncated_fraction}, {"pass", r.pass}, {"N", r.population},
              {"reps", r.reps}, {"seed", r.seed}};
}

json to_json(const BalanceReport& b) {
  return json{{"residual", b.residual}, {"worst_edge", pair_to(b.worst_edge)},
              {"stationarity_residual", b.stationarity_residual},
              {"class_info", {{"classes", b.class_count}, {"closed_classes", b.closed_class_count},
                              {"irreducible", b.irreducible}}},
              {"balanced", b.balanced()}};
}

json to_json(const CycleReport& c) {
  return json{{"verdict", to_string(c.verdict)},
              {"inconsistency", std::isfinite(c.inconsistency) ? json(c.inconsistency) : json(nullptr)},
              {"witness_edge", pair_to(c.witness_edge)}, {"closed_classes", c.closed_class_count},
              {"non_tree_edges", c.non_tree_edges}};
}

json to_json(const CocycleValue& c) { return json{{"value", c.value}, {"quadrature_error", c.quadrature_error}}; }

json to_json(const IdentityCheck& c) {
  return json{{"lhs", c.lhs}, {"rhs", c.rhs}, {"residual", c.residual}, {"quadrature_error", c.quadrature_error}};
}

json to_json(const SingleSiteCertificate& c) {
  return json{{"verdict", to_string(c.verdict)}, {"theta", c.theta}, {"mu", vec_to(c.mu)}, {"h", vec_to(c.h)},
              {"witness", c.witness}, {"mutation_residual", c.mutation_residual},
              {"recombination_residual", c.recombination_residual}};
}

json to_json(const AbsorbingReport& a) {
  json out{{"in_delta_a", a.membership.member}, {"reason", a.membership.reason},
           {"non_dirac", a.membership.non_dirac}, {"atoms", a.membership.atoms},
           {"isolated", a.isolated}, {"monomials_checked", a.monomials_checked},
           {"max_generator", a.max_generator}, {"generator_vanishes", a.generator_vanishes}};
  out["offending_pair"] = a.membership.offending_pair ? pair_to(*a.membership.offending_pair) : json(nullptr);
  return out;
}

json to_json(const ClosedClassComparison& c) {
  return json{{"closed_classes", c.closed_classes}, {"delta_a_states", c.delta_a_states},
              {"components", c.component_count}, {"all_closed_singletons", c.all_closed_singletons},
              {"coincide", c.coincide}, {"detail", c.detail}};
}

json to_json(const DiracProbe& p) {
  return json{{"heterozygosity", p.heterozygosity}, {"agreement", p.agreement}, {"samples", p.samples}};
}

json to_json(const RecurrenceVerdict& v) {
  json table = json::array();
  for (const auto& r : v.return_table) table.push_back(json{{"steps", r.steps}, {"fraction", r.fraction}});
  return json{{"verdict", to_string(v.verdict)}, {"rationale", v.rationale},
              {"refers_to_infinite_family", v.refers_to_infinite_family}, {"return_table", std::move(table)}};
}

json to_json(const ReachabilityReport& r) {
  json reaches = json::array();
  for (std::size_t i = 0; i < r.reaches.size(); ++i)
    for (std::size_t j = 0; j < r.reaches[i].size(); ++j)
      if (r.reaches[i][j]) reaches.push_back(json::array({i, j}));
  return json{{"reaches", std::move(reaches)}, {"has_in_neighbor", r.has_in_neighbor},
              {"out_neighbors", r.out_neighbors}, {"components", r.components}, {"isolated", r.isolated}};
}

json to_json(const SteppingStoneClassification& c) {
  return json{{"statement", c.statement}, {"reversible_candidate", c.reversible_candidate},
              {"mutation_free", c.mutation_free}, {"mutation_irreducible", c.mutation_irreducible},
              {"recurrence", to_json(c.recurrence)}, {"single_site", to_json(c.single_site)},
              {"rationale", c.rationale}};
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const TrajectorySample& sample) {
  os << "time,colony,type,count\n";
  for (std::size_t i = 0; i < sample.times.size(); ++i) {
    const auto& st = sample.states[i];
    const std::string t = format_double(sample.times[i]);
    for (int xi = 0; xi < st.colonies(); ++xi)
      for (int u = 0; u < st.types(); ++u) os << t << ',' << xi << ',' << u << ',' << st.count(xi, u) << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace ifv
