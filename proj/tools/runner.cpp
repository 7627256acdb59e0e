#include "runner.hpp"

#include "ifv/chain.hpp"
#include "ifv/dual.hpp"
#include "ifv/error.hpp"
#include "ifv/kernels.hpp"
#include "ifv/particles.hpp"
#include "ifv/random.hpp"
#include "ifv/reversibility.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace ifv::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kExperiments{"simulate",          "wf-simulate", "dual",
                                         "verify-duality",    "check-reversibility",
                                         "cocycle",           "classify",    "absorbing-check",
                                         "kernel-report"};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

ModelSpec spec_of(const json& cfg) {
  if (cfg.contains("model")) return model_from_json(cfg.at("model"));
  if (cfg.contains("stepping_stone")) {
    const auto& p = cfg.at("stepping_stone");
    SteppingStoneParams sp;
    sp.u = p.value("u", sp.u);
    sp.v = p.value("v", sp.v);
    sp.s = p.value("s", sp.s);
    sp.rho = p.value("rho", sp.rho);
    sp.dimension = p.value("dimension", sp.dimension);
    sp.side = p.value("side", sp.side);
    return stepping_stone_spec(sp);
  }
  throw InvalidInput("config needs \"model\", \"model_file\" or \"stepping_stone\"");
}

SteppingStoneParams stepping_stone_of(const json& p) {
  SteppingStoneParams sp;
  sp.u = p.at("u").get<double>();
  sp.v = p.at("v").get<double>();
  sp.s = p.at("s").get<double>();
  sp.rho = p.at("rho").get<double>();
  sp.dimension = p.at("dimension").get<int>();
  sp.side = p.at("side").get<int>();
  return sp;
}

void set_default(json& p, const char* key, json value) {
  if (!p.contains(key)) p[key] = std::move(value);
}

json unit_vector(int K, int u) {
  json v = json::array();
  for (int i = 0; i < K; ++i) v.push_back(i == u ? 1.0 : 0.0);
  return v;
}

void fill_defaults(const std::string& experiment, const ModelSpec& spec, json& p) {
  const int K = spec.type_count();
  const int L = spec.colony_count();
  const json uniform = configuration_to_json(Configuration::uniform(L, K));
  const json linear = json::array({json{{"colony", 0}, {"f", unit_vector(K, 0)}}});
  if (experiment == "simulate") {
    set_default(p, "N", 100);
    set_default(p, "t", 1.0);
    set_default(p, "initial", uniform);
    set_default(p, "event_cap", kDefaultEventCap);
    set_default(p, "write_trajectory", true);
    set_default(p, "monomial", nullptr);
    set_default(p, "reps", 0);
    set_default(p, "probe_samples", 0);
  } else if (experiment == "wf-simulate") {
    set_default(p, "N", 100);
    set_default(p, "generations", 100);
    set_default(p, "initial", uniform);
    set_default(p, "write_trajectory", true);
  } else if (experiment == "dual" || experiment == "verify-duality") {
    set_default(p, "t", 0.5);
    set_default(p, "reps", 1000);
    set_default(p, "initial", uniform);
    set_default(p, "monomial", linear);
    set_default(p, "tensor_cap", kDefaultTensorCap);
    if (experiment == "verify-duality") set_default(p, "N", 200);
  } else if (experiment == "check-reversibility") {
    set_default(p, "N", 6);
    set_default(p, "state_cap", kDefaultStateCap);
    set_default(p, "dense_cap", kDefaultDenseCap);
  } else if (experiment == "cocycle") {
    set_default(p, "X", uniform);
    json f = json::array();
    for (int xi = 0; xi < L; ++xi) f.push_back(xi == 0 ? unit_vector(K, 0) : json(std::vector<double>(static_cast<std::size_t>(K), 0.0)));
    set_default(p, "f", f);
    set_default(p, "g", nullptr);
    set_default(p, "pair", nullptr);
    set_default(p, "nodes", kDefaultQuadratureNodes);
  } else if (experiment == "absorbing-check") {
    set_default(p, "X", configuration_to_json(Configuration::point_masses(std::vector<int>(static_cast<std::size_t>(L), 0), K)));
    set_default(p, "max_degree", 3);
    set_default(p, "N", 4);
  } else if (experiment == "kernel-report") {
    set_default(p, "walks", 2000);
    set_default(p, "write_matrix", true);
  }
}

void require_valid(const ModelSpec& spec) {
  const auto v = validate_spec(spec);
  if (!v.ok()) throw InvalidInput("invalid model:\n" + v.summary());
}

Configuration config_param(const ModelSpec& spec, const json& p, const char* key) {
  auto x = configuration_from_json(p.at(key));
  const auto v = validate_configuration(spec, x);
  if (!v.ok()) throw InvalidInput(std::string("invalid ") + key + ":\n" + v.summary());
  return x;
}

json state_to_json(const ParticleState& s) {
  json out = json::array();
  for (int xi = 0; xi < s.colonies(); ++xi) {
    const auto c = s.colony(xi);
    out.push_back(std::vector<int>(c.begin(), c.end()));
  }
  return out;
}

std::string trajectory_csv(const TrajectorySample& t) {
  std::ostringstream os;
  write_trajectory_csv(os, t);
  return os.str();
}

RunOutput run_simulate(const ModelSpec& spec, const json& cfg, int threads) {
  const auto& p = cfg.at("parameters");
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const int N = p.at("N").get<int>();
  const auto init = ParticleState::from_configuration(config_param(spec, p, "initial"), N);
  const double t = p.at("t").get<double>();
  const auto traj = simulate_moran(spec, init, t, seed, p.at("event_cap").get<std::size_t>());
  RunOutput out;
  json& r = out.report;
  r["events"] = traj.times.size() - 1;
  r["initial_counts"] = state_to_json(init);
  r["final_counts"] = state_to_json(traj.states.back());
  r["final_time"] = traj.times.back();
  if (!p.at("monomial").is_null() && p.at("reps").get<std::size_t>() > 0) {
    const auto F = monomial_from_json(p.at("monomial"));
    r["moment"] = to_json(moment_estimate(spec, init, F, t, p.at("reps").get<std::size_t>(),
                                          derive_seed(seed, StreamTag::forward), threads));
  }
  if (const auto n = p.at("probe_samples").get<std::size_t>(); n > 0) {
    std::vector<Configuration> samples(n);
    const auto base = derive_seed(seed, StreamTag::diagnostic);
    for (std::size_t k = 0; k < n; ++k)
      samples[k] = simulate_moran(spec, init, t, derive_seed(base, k)).states.back().empirical();
    r["dirac_probe"] = to_json(dirac_support_probe(spec, samples));
  }
  if (p.at("write_trajectory").get<bool>()) out.artifacts.push_back({"trajectory.csv", trajectory_csv(traj)});
  return out;
}

RunOutput run_wf(const ModelSpec& spec, const json& cfg) {
  const auto& p = cfg.at("parameters");
  const int N = p.at("N").get<int>();
  const auto init = ParticleState::from_configuration(config_param(spec, p, "initial"), N);
  const auto traj = simulate_wf_chain(spec, init, p.at("generations").get<int>(), cfg.at("seed").get<std::uint64_t>());
  RunOutput out;
  out.report["generations"] = p.at("generations");
  out.report["initial_counts"] = state_to_json(init);
  out.report["final_counts"] = state_to_json(traj.states.back());
  out.report["final_time"] = traj.times.back();
  if (p.at("write_trajectory").get<bool>()) out.artifacts.push_back({"trajectory.csv", trajectory_csv(traj)});
  return out;
}

RunOutput run_dual(const ModelSpec& spec, const json& cfg, int threads, bool verify) {
  const auto& p = cfg.at("parameters");
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const auto F = monomial_from_json(p.at("monomial"));
  for (const auto& fac : F.factors)
    if (fac.colony < 0 || fac.colony >= spec.colony_count() || fac.f.size() != spec.type_count())
      throw InvalidInput("monomial factor does not match the model shape");
  const auto x0 = config_param(spec, p, "initial");
  const double t = p.at("t").get<double>();
  const auto reps = p.at("reps").get<std::size_t>();
  DualOptions opt{p.at("tensor_cap").get<std::size_t>()};
  RunOutput out;
  if (verify)
    out.report = to_json(verify_duality(spec, F, x0, t, p.at("N").get<int>(), reps, seed, threads, opt));
  else
    out.report = to_json(dual_expectation(spec, F, x0, t, reps, derive_seed(seed, StreamTag::dual), threads, opt));
  return out;
}

RunOutput run_reversibility(const ModelSpec& spec, const json& cfg) {
  const auto& p = cfg.at("parameters");
  const auto gm = build_generator_matrix(spec, p.at("N").get<int>(), p.at("state_cap").get<std::size_t>(),
                                         p.at("dense_cap").get<std::size_t>());
  const auto stat = stationary_distribution(gm.q);
  RunOutput out;
  json& r = out.report;
  r["states"] = gm.states.size();
  r["stationary_residual"] = stat.residual;
  json balances = json::array();
  bool balanced = true;
  double worst = 0.0;
  for (const auto& pi : stat.stationary) {
    const auto b = detailed_balance(gm.q, pi);
    balanced = balanced && b.balanced();
    worst = std::max(worst, b.residual);
    auto j = to_json(b);
    j["worst_edge_states"] = json::array({state_to_json(gm.states[static_cast<std::size_t>(b.worst_edge.first)]),
                                          state_to_json(gm.states[static_cast<std::size_t>(b.worst_edge.second)])});
    balances.push_back(std::move(j));
  }
  const auto cyc = kolmogorov_check(gm.q);
  r["residual"] = worst;
  r["detailed_balance"] = std::move(balances);
  r["kolmogorov"] = to_json(cyc);
  r["criteria_agree"] = cyc.balanced() == balanced;
  std::string verdict;
  if (balanced)
    verdict = "reversible (finite-N detailed balance holds)";
  else if (spec.rho > 0.0 && spec.colony_count() > 1 && is_irreducible(spec.mutation.rates))
    verdict = "irreversible (consistent with migration+mutation theorem)";
  else
    verdict = "irreversible (detailed balance fails)";
  r["verdict"] = verdict;
  r["single_site"] = to_json(classify_single_site(spec));
  return out;
}

RunOutput run_cocycle(const ModelSpec& spec, const json& cfg) {
  const auto& p = cfg.at("parameters");
  const auto x = config_param(spec, p, "X");
  const int nodes = p.at("nodes").get<int>();
  auto block = [&](const json& j) {
    auto f = block_function_from_json(j);
    if (f.colony_count() != spec.colony_count()) throw InvalidInput("block function colony count mismatch");
    for (const auto& c : f.colonies)
      if (c.size() != spec.type_count()) throw InvalidInput("block function type count mismatch");
    return f;
  };
  const auto f = block(p.at("f"));
  RunOutput out;
  json& r = out.report;
  r["lambda_f"] = to_json(cocycle_lambda(spec, f, x, nodes));
  if (!p.at("g").is_null()) {
    const auto g = block(p.at("g"));
    r["lambda_g"] = to_json(cocycle_lambda(spec, g, x, nodes));
    r["cocycle_identity"] = to_json(cocycle_identity_defect(spec, f, g, x, nodes));
  }
  if (!p.at("pair").is_null()) {
    const auto& q = p.at("pair");
    const int xi1 = q.at("xi1").get<int>(), xi2 = q.at("xi2").get<int>();
    const Vec fl = block_function_from_json(json::array({q.at("f")}))[0];
    const Vec gl = block_function_from_json(json::array({q.at("g")}))[0];
    if (fl.size() != spec.type_count() || gl.size() != spec.type_count())
      throw InvalidInput("pair functions must have one entry per type");
    r["shift_identity"] = to_json(shift_identity_residual(spec, xi1, fl, xi2, gl, x, nodes));
    r["necessary_condition"] = to_json(necessary_condition_residual(spec, xi1, fl, xi2, gl, x));
  }
  return out;
}

RunOutput run_classify(const ModelSpec& spec, const json& cfg) {
  RunOutput out;
  out.report["single_site"] = to_json(classify_single_site(spec));
  if (cfg.contains("stepping_stone"))
    out.report["stepping_stone"] = to_json(classify_stepping_stone(stepping_stone_of(cfg.at("stepping_stone"))));
  return out;
}

RunOutput run_absorbing(const ModelSpec& spec, const json& cfg) {
  const auto& p = cfg.at("parameters");
  const auto x = config_param(spec, p, "X");
  RunOutput out;
  out.report = to_json(absorbing_check(spec, x, p.at("max_degree").get<int>()));
  out.report["reachability"] = to_json(reachability(spec.kernel));
  if (const int N = p.at("N").get<int>(); N > 0)
    out.report["closed_classes"] = to_json(compare_closed_classes_with_delta_a(spec, N));
  return out;
}

RunOutput run_kernel_report(const ModelSpec& spec, const json& cfg) {
  const auto& p = cfg.at("parameters");
  const KernelFamily family = cfg.contains("model") ? kernel_family_from_json(cfg.at("model").at("kernel"))
                                                    : KernelFamily{CustomKernel{spec.kernel.a}};
  RunOutput out;
  json& r = out.report;
  r["kernel"] = kernel_family_to_json(family, true);
  r["symmetrized"] = kernel_family_to_json(CustomKernel{symmetrize(spec.kernel)}, true).at("matrix");
  r["reachability"] = to_json(reachability(spec.kernel));
  r["recurrence"] = to_json(classify_recurrence(family, cfg.at("seed").get<std::uint64_t>(), p.at("walks").get<int>()));
  if (p.at("write_matrix").get<bool>()) {
    std::ostringstream os;
    write_matrix_csv(os, spec.kernel.a);
    out.artifacts.push_back({"kernel.csv", os.str()});
  }
  return out;
}

}  // namespace

json resolve_config(const RunOptions& opts) {
  if (!opts.config_path && !opts.preset) throw InvalidInput("one of --config or --preset is required");
  json cfg = opts.preset ? preset_config(*opts.preset) : json::object();
  fs::path base = fs::current_path();
  if (opts.config_path) {
    const fs::path path(*opts.config_path);
    const json doc = read_json_file(path);
    if (!doc.is_object()) throw InvalidInput(path.string() + ": config must be a JSON object");
    cfg.merge_patch(doc);
    base = path.parent_path();
  }
  try {
    if (cfg.contains("model_file")) {
      const fs::path mp = fs::path(cfg.at("model_file").get<std::string>());
      cfg["model"] = read_json_file(mp.is_absolute() ? mp : base / mp);
      cfg.erase("model_file");
    }
    if (opts.seed) cfg["seed"] = *opts.seed;
    set_default(cfg, "seed", 1);
    if (!cfg.at("seed").is_number_unsigned() && !cfg.at("seed").is_number_integer())
      throw InvalidInput("seed must be an unsigned integer");
    if (!cfg.contains("experiment")) throw InvalidInput("config is missing \"experiment\"");
    const std::string experiment = cfg.at("experiment").get<std::string>();
    if (!kExperiments.count(experiment)) throw InvalidInput("unknown experiment \"" + experiment + "\"");
    set_default(cfg, "parameters", json::object());
    if (cfg.contains("stepping_stone")) {
      const SteppingStoneParams d;
      auto& ss = cfg["stepping_stone"];
      set_default(ss, "u", d.u);
      set_default(ss, "v", d.v);
      set_default(ss, "s", d.s);
      set_default(ss, "rho", d.rho);
      set_default(ss, "dimension", d.dimension);
      set_default(ss, "side", d.side);
    }
    const ModelSpec spec = spec_of(cfg);
    require_valid(spec);
    fill_defaults(experiment, spec, cfg["parameters"]);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return cfg;
}

RunOutput run_experiment(const json& config, int threads) {
  RunOutput out;
  try {
    const ModelSpec spec = spec_of(config);
    require_valid(spec);
    const std::string e = config.at("experiment").get<std::string>();
    if (e == "simulate") out = run_simulate(spec, config, threads);
    else if (e == "wf-simulate") out = run_wf(spec, config);
    else if (e == "dual") out = run_dual(spec, config, threads, false);
    else if (e == "verify-duality") out = run_dual(spec, config, threads, true);
    else if (e == "check-reversibility") out = run_reversibility(spec, config);
    else if (e == "cocycle") out = run_cocycle(spec, config);
    else if (e == "classify") out = run_classify(spec, config);
    else if (e == "absorbing-check") out = run_absorbing(spec, config);
    else if (e == "kernel-report") out = run_kernel_report(spec, config);
    else throw InvalidInput("unknown experiment \"" + e + "\"");

    json report;
    report["experiment"] = e;
    report["config"] = config;
    report["spec_hash"] = spec_hash(spec);
    report["result"] = std::move(out.report);
    out.report = std::move(report);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return out;
}

int run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const json cfg = resolve_config(opts);
    const auto result = run_experiment(cfg, opts.threads);
    const std::string text = result.report.dump(2) + "\n";
    if (opts.out_dir) {
      const fs::path dir(*opts.out_dir);
      fs::create_directories(dir);
      std::ofstream(dir / "report.json", std::ios::binary) << text;
      for (const auto& a : result.artifacts) std::ofstream(dir / a.name, std::ios::binary) << a.content;
    } else {
      out << text;
    }
    return 0;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const HypothesisViolated& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapExceeded& e) {
    err << "cap exceeded: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ifv::cli
