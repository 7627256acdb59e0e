#pragma once

// JSON and CSV interchange.
//
// Model document:
//   {
//     "types": K,
//     "kernel": {"family": "complete-uniform" | "torus-nearest-neighbor" |
//                "hierarchical" | "custom", "params": {...}, "matrix": [[...]]},
//     "mutation": {"kind": "zero"} | {"kind": "pim", "theta": t, "mu": [...]}
//               | {"kind": "two-type", "u": u, "v": v} | {"kind": "matrix", "rates": [[...]]},
//     "fitness": [[...]],                         (default: zero)
//     "recombination": {"kind": "mixture" | "first-parent"}
//                    | {"kind": "constant", "target": z} | {"kind": "table", "eta": [[[...]]]},
//     "s": 0, "r": 0, "rho": 0
//   }
// "matrix" is read only for the custom family.

#include "ifv/dual.hpp"
#include "ifv/generator.hpp"
#include "ifv/kernels.hpp"
#include "ifv/model.hpp"
#include "ifv/particles.hpp"
#include "ifv/reversibility.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <ostream>
#include <string>

namespace ifv {

using json = nlohmann::ordered_json;

KernelFamily kernel_family_from_json(const json& doc);
json kernel_family_to_json(const KernelFamily& family, bool with_matrix = false);

ModelSpec model_from_json(const json& doc);
// Canonical realized form: every matrix explicit, kernel as a custom matrix.
json model_to_json(const ModelSpec& spec);

// FNV-1a 64 of the canonical dump, as 16 lowercase hex digits.
std::string spec_hash(const ModelSpec& spec);

Configuration configuration_from_json(const json& doc);
json configuration_to_json(const Configuration& x);
Monomial monomial_from_json(const json& doc);
json monomial_to_json(const Monomial& F);
BlockFunction block_function_from_json(const json& doc);

json to_json(const MomentEstimate& m);
json to_json(const DualEstimate& d);
json to_json(const DualityReport& r);
json to_json(const BalanceReport& b);
json to_json(const CycleReport& c);
json to_json(const CocycleValue& c);
json to_json(const IdentityCheck& c);
json to_json(const SingleSiteCertificate& c);
json to_json(const AbsorbingReport& a);
json to_json(const ClosedClassComparison& c);
json to_json(const DiracProbe& p);
json to_json(const RecurrenceVerdict& v);
json to_json(const ReachabilityReport& r);
json to_json(const SteppingStoneClassification& c);

// Shortest round-trip decimal for a double ("%.17g" trimmed).
std::string format_double(double v);

// time,colony,type,count
void write_trajectory_csv(std::ostream& os, const TrajectorySample& sample);
void write_matrix_csv(std::ostream& os, const Mat& m);

}  // namespace ifv
