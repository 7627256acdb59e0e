// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "oracles.hpp"
#include "runner.hpp"

#include "ifv/chain.hpp"
#include "ifv/dual.hpp"
#include "ifv/generator.hpp"
#include "ifv/kernels.hpp"
#include "ifv/particles.hpp"
#include "ifv/reversibility.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace ifv;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Preset reports, produced once and reused by the duality and reproducibility checks.
std::map<std::string, std::string>& preset_reports() {
  static std::map<std::string, std::string> r;
  return r;
}

std::string run_preset(const std::string& name, int& code) {
  cli::RunOptions o;
  o.preset = name;
  std::ostringstream out, err;
  code = cli::run(o, out, err);
  return code == 0 ? out.str() : err.str();
}

const std::string& cached_preset(const std::string& name) {
  auto& cache = preset_reports();
  auto it = cache.find(name);
  if (it == cache.end()) {
    int code = 0;
    it = cache.emplace(name, run_preset(name, code)).first;
    if (code != 0) throw std::runtime_error("preset " + name + " failed: " + it->second);
  }
  return it->second;
}

Outcome routes() {
  oracle::Sampler rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int K = rng.integer(1, 4), L = rng.integer(1, 3), deg = rng.integer(1, 4);
    const auto m = rng.spec(K, L);
    const auto x = rng.configuration(L, K);
    const auto F = rng.monomial(L, K, deg);
    worst = std::max(worst, rel(generator_apply(m, F, x, GeneratorForm::gradient),
                                generator_apply(m, F, x, GeneratorForm::expanded)));
  }
  return {worst <= 1e-10, fmt("max relative gap %.2e over 100 instances", worst)};
}

Outcome carre_du_champ_checks() {
  oracle::Sampler rng(1002);
  double closed = 0.0, leibniz = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int K = rng.integer(1, 4), L = rng.integer(1, 3);
    const auto m = rng.spec(K, L);
    const auto x = rng.configuration(L, K);
    const auto phi = rng.monomial(L, K, rng.integer(1, 3));
    const auto psi = rng.monomial(L, K, rng.integer(1, 3));
    closed = std::max(closed, rel(carre_du_champ(m, phi, psi, x), carre_du_champ_by_definition(m, phi, psi, x)));
  }
  for (int i = 0; i < 100; ++i) {
    const int K = rng.integer(1, 4), L = rng.integer(1, 3);
    const auto m = rng.spec(K, L);
    const auto x = rng.configuration(L, K);
    const auto phi = rng.monomial(L, K, rng.integer(1, 2));
    const auto p1 = rng.monomial(L, K, rng.integer(1, 2));
    const auto p2 = rng.monomial(L, K, rng.integer(1, 2));
    const double lhs = carre_du_champ(m, phi * p1, p2, x) + carre_du_champ(m, phi * p2, p1, x) -
                       carre_du_champ(m, phi, p1 * p2, x);
    leibniz = std::max(leibniz, rel(lhs, 2.0 * phi.evaluate(x) * carre_du_champ(m, p1, p2, x)));
  }
  return {closed <= 1e-10 && leibniz <= 1e-10,
          fmt("closed form vs definition %.2e, Leibniz %.2e", closed, leibniz)};
}

Outcome tilting_and_cocycle() {
  oracle::Sampler rng(1003);
  double group = 0.0, reparam = 0.0, shift = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int K = rng.integer(2, 4), L = rng.integer(2, 3);
    const auto m = rng.spec(K, L);
    const auto x = rng.configuration(L, K);
    BlockFunction f, g;
    for (int xi = 0; xi < L; ++xi) {
      f.colonies.push_back(rng.vector(K, -2, 2));
      g.colonies.push_back(rng.vector(K, -2, 2));
    }
    const auto a = tilt(tilt(x, g), f), b = tilt(x, f + g);
    for (int xi = 0; xi < L; ++xi) group = std::max(group, (a[xi] - b[xi]).cwiseAbs().maxCoeff());
    if (i < 50) {
      const double t = rng.uniform(0.2, 2.0);
      reparam = std::max(reparam, std::abs(backward_drift_integral(m, f, x, t).value -
                                           cocycle_lambda(m, f * t, tilt(x, f * (-t))).value));
    }
    const int xi1 = rng.integer(0, L - 1);
    const int xi2 = (xi1 + rng.integer(1, L - 1)) % L;
    shift = std::max(shift, shift_identity_residual(m, xi1, f[xi1], xi2, g[xi2], x).residual);
  }
  return {group <= 1e-12 && reparam <= 1e-8 && shift <= 1e-8,
          fmt("group law %.2e, reparametrization %.2e, shift identity %.2e (200 instances)", group, reparam, shift)};
}

ModelSpec pim_migration() {
  ModelSpec m = neutral_spec(2, make_kernel(CompleteUniform{2}), 1.0);
  m.mutation = MutationGenerator::parent_independent(1.0, Vec::Constant(2, 0.5));
  return m;
}

Outcome irreversibility_witnesses() {
  const Configuration x{{(Vec(2) << 0.5, 0.5).finished(), (Vec(2) << 0.8, 0.2).finished()}};
  const Vec f = (Vec(2) << 1.0, 0.0).finished();
  const double nc = necessary_condition_residual(pim_migration(), 0, f, 1, f, x).residual;
  const auto g = build_generator_matrix(pim_migration(), 6);
  const double db = detailed_balance(g.q, stationary_distribution(g.q).unique()).residual;
  return {nc > 1e-3 && db > 1e-6, fmt("necessary-condition residual %.4f, detailed-balance residual %.4f", nc, db)};
}

Outcome reversible_sanity() {
  ModelSpec m = neutral_spec(3, make_kernel(CompleteUniform{1}), 0.0);
  const Vec mu = (Vec(3) << 0.2, 0.3, 0.5).finished();
  const double theta = 1.0;
  m.mutation = MutationGenerator::parent_independent(theta, mu);
  const auto g = build_generator_matrix(m, 8);
  const Vec pi = stationary_distribution(g.q).unique();
  const double db = detailed_balance(g.q, pi).residual;
  double dm = 0.0;
  for (std::size_t i = 0; i < g.states.size(); ++i)
    dm = std::max(dm, std::abs(pi(static_cast<Eigen::Index>(i)) -
                               oracle::dirichlet_multinomial(g.states[i].counts(), theta * mu)));
  return {db <= 1e-8 && dm <= 1e-8,
          fmt("%g states, detailed balance %.2e, Dirichlet-multinomial gap %.2e",
              static_cast<double>(g.states.size()), db, dm)};
}

Outcome duality() {
  Outcome out;
  std::string detail;
  for (const char* name : {"neutral-2colony", "selection-duality"}) {
    const auto j = json::parse(cached_preset(name)).at("result");
    const bool finite = !j.at("z").is_null();
    const double z = finite ? j.at("z").get<double>() : INFINITY;
    const double trunc = j.at("truncated_fraction").get<double>();
    out.pass = out.pass && finite && std::abs(z) <= 3.0 && trunc < 0.01;
    detail += std::string(detail.empty() ? "" : "; ") + name +
              fmt(": forward %.5f, dual %.5f, z %.3f", j.at("forward_mean").get<double>(),
                  j.at("dual_mean").get<double>(), z) +
              fmt(", truncated %.4f", trunc);
  }
  out.detail = detail;
  return out;
}

Outcome moran_consistency() {
  ModelSpec m = neutral_spec(2, make_kernel(CompleteUniform{1}), 0.0);
  m.mutation = MutationGenerator::parent_independent(1.0, Vec::Constant(2, 0.5));
  const Monomial F{{{0, (Vec(2) << 1.0, 0.0).finished()}, {0, (Vec(2) << 0.5, 2.0).finished()}}};
  std::vector<double> lx, ly;
  std::string detail = "errors";
  for (int N : {25, 50, 100, 200}) {
    const auto s = ParticleState::from_counts({{N * 2 / 5, N * 3 / 5}});
    const double err = std::abs(moran_generator_apply(m, F, s) - generator_apply(m, F, s.empirical()));
    lx.push_back(std::log(N));
    ly.push_back(std::log(err));
    detail += fmt(" %.3e", err);
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  return {std::isfinite(slope) && slope >= -1.3 && slope <= -0.7, fmt("slope %.4f; ", slope) + detail};
}

Outcome absorbing_states() {
  Outcome out;
  std::string detail;
  // Connected kernel (the preset model) and a kernel with two components.
  auto connected = neutral_spec(2, make_kernel(CompleteUniform{3}), 1.0);
  connected.fitness.v = (Mat(2, 2) << 1, 0, 0, 0).finished();
  connected.s = 0.5;
  Mat a = Mat::Zero(4, 4);
  a(0, 1) = a(1, 0) = a(2, 3) = a(3, 2) = 1.0;
  auto split = neutral_spec(2, MigrationKernel{a}, 1.0);
  split.fitness = connected.fitness;
  split.s = 0.5;
  for (const auto& [name, spec, N] : {std::tuple{"uniform L=3", connected, 4}, std::tuple{"two components L=4", split, 2}}) {
    // Every point-mass configuration; members of Delta_a must be annihilated.
    const int L = spec.colony_count();
    double worst = 0.0;
    int members = 0;
    for (int code = 0; code < (1 << L); ++code) {
      std::vector<int> types;
      for (int xi = 0; xi < L; ++xi) types.push_back((code >> xi) & 1);
      const auto x = Configuration::point_masses(types, 2);
      const auto r = absorbing_check(spec, x);
      if (!r.membership.member) continue;
      ++members;
      worst = std::max(worst, r.max_generator);
    }
    const auto c = compare_closed_classes_with_delta_a(spec, N);
    out.pass = out.pass && worst <= 1e-14 && c.coincide && members > 0;
    detail += std::string(detail.empty() ? "" : "; ") + name + fmt(": %g Delta_a points, max |LF| %.1e, ", members, worst) +
              c.detail + (c.coincide ? " (coincide)" : " (MISMATCH)");
  }
  out.detail = detail;
  return out;
}

ModelSpec single_site_spec(const Mat& a, const RecombinationKernel& eta, double r) {
  ModelSpec m = neutral_spec(static_cast<int>(a.rows()), make_kernel(CompleteUniform{1}), 0.0);
  m.mutation.rates = a;
  m.recombination = eta;
  m.r = r;
  return m;
}

Outcome classifier() {
  oracle::Sampler rng(1009);
  double worst = 0.0;
  bool all_reversible = true;
  for (int i = 0; i < 50; ++i) {
    const int K = rng.integer(2, 5);
    const double theta = rng.uniform(0.1, 4.0);
    const Vec mu = rng.simplex(K);
    const auto c = classify_single_site(single_site_spec(MutationGenerator::parent_independent(theta, mu).rates,
                                                         RecombinationKernel::mixture(K), rng.uniform(0, 2)));
    all_reversible = all_reversible && c.verdict == SingleSiteVerdict::reversible_form;
    worst = std::max({worst, std::abs(c.theta - theta), (c.mu - mu).cwiseAbs().maxCoeff()});
  }
  Mat cyc = Mat::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    cyc(i, (i + 1) % 3) = 1.0;
    cyc(i, i) = -1.0;
  }
  const auto c = classify_single_site(single_site_spec(cyc, RecombinationKernel::mixture(3), 0.0));
  const bool cyclic_ok = c.verdict == SingleSiteVerdict::violation && c.witness.rfind("row ", 0) == 0;
  RecombinationKernel first(2);
  for (int v = 0; v < 2; ++v)
    for (int w = 0; w < 2; ++w) first(v, w, v) = 1.0;
  const auto d = classify_single_site(single_site_spec(Mat::Zero(2, 2), first, 1.0));
  const bool delta_ok = d.verdict == SingleSiteVerdict::reversible_form && d.h(0) == 0.0 && std::abs(d.h(1) + 0.5) <= 1e-12;
  return {all_reversible && worst <= 1e-12 && cyclic_ok && delta_ok,
          fmt("PIM round trip max error %.1e; ", worst) + "cyclic witness \"" + c.witness + "\"; " +
              fmt("first-parent h = (%g, %g)", d.h(0), d.h(1))};
}

Outcome example_classifications() {
  std::string detail;
  bool ok = true;
  for (int d : {1, 2, 3}) {
    const auto v = classify_recurrence(TorusNearestNeighbor{d, 5});
    ok = ok && v.verdict == (d <= 2 ? Recurrence::recurrent : Recurrence::transient) && v.refers_to_infinite_family;
    detail += "d=" + std::to_string(d) + " " + to_string(v.verdict) + ", ";
  }
  const auto j = json::parse(cached_preset("stepping-stone-1d")).at("result").at("stepping_stone");
  const std::string statement = j.at("statement").get<std::string>();
  const bool candidate = j.at("reversible_candidate").get<bool>();
  ok = ok && statement == kSteppingStoneStatement && !candidate;
  // Combining the classifier outputs reproduces the statement's truth table.
  for (bool mutation : {false, true})
    for (int d : {1, 2, 3}) {
      const auto c = classify_stepping_stone(SteppingStoneParams{mutation ? 0.1 : 0.0, mutation ? 0.2 : 0.0, 0.5, 1.0, d, 4});
      ok = ok && c.reversible_candidate == (!mutation && d <= 2);
    }
  return {ok, detail + "stepping-stone preset: \"" + statement + "\", candidate " + (candidate ? "true" : "false")};
}

Outcome reproducibility() {
  Outcome out;
  std::string differing;
  for (const auto& name : cli::preset_names()) {
    const std::string& first = cached_preset(name);
    int code = 0;
    const std::string second = run_preset(name, code);
    if (code != 0 || second != first) {
      out.pass = false;
      differing += " " + name;
    }
  }
  out.detail = out.pass ? std::to_string(cli::preset_names().size()) + " presets byte-identical across runs"
                        : "differing:" + differing;
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "generator route equivalence", 5, routes},
      {2, "carre du champ closed form and Leibniz identity", 5, carre_du_champ_checks},
      {3, "tilting group law, reparametrization, shift identity", 10, tilting_and_cocycle},
      {4, "irreversibility witnesses", 10, irreversibility_witnesses},
      {5, "reversible single-colony PIM chain", 10, reversible_sanity},
      {6, "moment duality on the shipped presets", 120, duality},
      {7, "Moran generator consistency slope", 60, moran_consistency},
      {8, "absorbing states and closed classes", 10, absorbing_states},
      {9, "single-site classifier", 1, classifier},
      {10, "example classifications", 1, example_classifications},
      {11, "byte-identical preset reports", 300, reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::printf("criterion %2d %s: %s (%.2f s%s) %s\n", c.id, pass ? "PASS" : "FAIL", c.name, secs,
                in_budget ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures ? 1 : 0;
}
