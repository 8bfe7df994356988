#include <omp.h>

#include <CLI11.hpp>
#include <iostream>

#include "fermikinetics/config.hpp"
#include "fermikinetics/errors.hpp"
#include "fermikinetics/runner.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Lattice fermion kinetics and fluctuation runner"};
    std::string config;
    std::string out;
    int threads = 0;
    bool verbose = false;
    app.add_option("--config", config, "Scenario configuration file")->required();
    app.add_option("--out", out, "Output directory (overrides output.dir)");
    app.add_option("--threads", threads, "Worker threads (default: OpenMP default)")->check(CLI::PositiveNumber);
    app.add_flag("--verbose", verbose, "Progress on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (threads > 0) omp_set_num_threads(threads);

    try {
        auto spec = fk::load_config(config);
        if (verbose) std::cerr << fk::render_spec(spec);
        fk::RunOptions opt;
        if (!out.empty()) opt.out_dir = out;
        opt.verbose = verbose;
        auto manifest = fk::run_scenario(spec, opt);
        std::cout << manifest["result"].dump() << "\n";
        return 0;
    } catch (const fk::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const fk::ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 2;
    } catch (const fk::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 2;
    } catch (const fk::ConvergenceError& e) {
        std::cerr << "not converged: " << e.what() << "\n";
        return 4;
    } catch (const fk::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
