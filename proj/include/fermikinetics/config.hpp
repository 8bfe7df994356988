#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fermikinetics/collision.hpp"

namespace fk {

// Flat text format, one `section.key = value` per line, `#` starts a comment.
// Lists are comma separated. `scenario` is the only top-level key.
struct RunSpec {
    std::string scenario;

    // model
    int dim = 2;
    int n = 16;
    double hopping = 1.0;
    std::vector<double> potential{0.0, 1.0};  // v(q) = c0 + sum_r c_r sum_a cos(r q_a)

    // params
    double lambda = 1.0;
    std::vector<double> N_list{64.0};
    std::vector<int> K_list;  // empty: powers of two up to n/2
    double eta = 0.3;         // <= 0 in the file means "auto"
    bool eta_auto = false;
    ShellMode mode = ShellMode::mollified;
    double threshold = 1e-14;
    bool threshold_relative = true;
    std::size_t max_entries = 100'000'000;
    double theta_regular = 0.05;
    double theta_divergent = 1.0;
    std::string moment = "variance";

    // state
    std::string state = "random";  // random | fermi_dirac | fermi_sea | constant
    double beta = 1.0;
    double mu = 0.0;
    double w_low = 0.05;
    double w_high = 0.95;
    double w_value = 0.5;

    // observable
    std::string observable = "site";  // site | bond | random
    int obs_width = 3;
    bool obs_complex = true;
    int pair_offset = 1;

    // run
    double T = 50.0;
    double dt = 0.01;
    int monitor_every = 100;
    std::uint64_t seed = 20241017;
    int sites = 8;  // oracle scenario: Fock modes

    // output
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json"};

    // Every key with its effective value, in registry order; `(default)` marks untouched keys.
    std::vector<std::pair<std::string, std::string>> echo;
    std::string source;

    bool has_format(const std::string& f) const;
};

// Throws ConfigError listing every problem found, each prefixed with its line number.
RunSpec parse_config(const std::string& text);
RunSpec load_config(const std::string& path);

// Canonical rendering of the effective configuration (stable across runs).
std::string render_spec(const RunSpec& spec);

}  // namespace fk
