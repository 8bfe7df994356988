#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "fermikinetics/config.hpp"
#include "fermikinetics/lattice.hpp"
#include "fermikinetics/quasifree.hpp"

namespace fk {

struct RunOptions {
    std::optional<std::string> out_dir;  // overrides output.dir
    bool verbose = false;
};

// Runs the scenario, writes its artifacts and manifest.json, and returns the manifest.
nlohmann::json run_scenario(const RunSpec& spec, const RunOptions& opt = {});

// Model pieces as the runner builds them; shared with tests.
MomentumGrid spec_grid(const RunSpec& spec);
Dispersion spec_band(const RunSpec& spec, const MomentumGrid& grid);
PairPotential spec_potential(const RunSpec& spec, const MomentumGrid& grid);
Occupation spec_state(const RunSpec& spec, const Dispersion& band);
QuadraticObservable spec_observable(const RunSpec& spec, const MomentumGrid& grid);

}  // namespace fk
