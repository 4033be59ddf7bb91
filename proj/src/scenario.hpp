#pragma once

#include <string>

namespace feesim {

// Artifact version embedded in every reproduce output.
const char* artifact_version();

// Runs one scenario document (or {"scenarios": [...]}) and returns a JSON
// result envelope. When out_dir is non-empty, per-scenario CSV/JSON report
// files are also written there.
std::string run_scenario_json(const std::string& scenario_json, const std::string& out_dir);

// Named reproduction scenarios: table1, counterexamples, selfish-curve,
// fee-selfish-curve, whale-threshold, undercut-equilibrium, mining-gap.
// overrides_json may tune sizes (n_blocks, trials, seed) and must be "{}" or
// empty for defaults.
std::string reproduce(const std::string& name, const std::string& overrides_json,
                      const std::string& out_dir);

}  // namespace feesim
