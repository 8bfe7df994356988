// End-to-end canonical relaxation run through the scenario runner (about 2 minutes on one core).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fermikinetics/config.hpp"
#include "fermikinetics/runner.hpp"

using namespace fk;
namespace fs = std::filesystem;

TEST_CASE("canonical 2D relaxation: manifest and first-run pin")
{
    auto spec = load_config(std::string(FK_SOURCE_DIR) + "/configs/canonical.cfg");
    auto dir = fs::temp_directory_path() / "fk_canonical";
    fs::remove_all(dir);
    auto m = run_scenario(spec, {dir.string(), false});

    std::vector<std::string> paths;
    for (const auto& o : m["outputs"]) paths.push_back(o["path"]);
    CHECK(std::count(paths.begin(), paths.end(), "trajectory.csv") == 1);
    CHECK(std::count(paths.begin(), paths.end(), "summary.json") == 1);
    auto snapshots = std::count_if(paths.begin(), paths.end(), [](const std::string& p) { return p.rfind("snapshots/", 0) == 0; });
    CHECK(snapshots == 51);
    CHECK(m["seed"] == 20241017);
    CHECK(m["inputs"]["model.n"] == "16");

    // First-run values.
    double dist = m["result"]["final_dist_fd"];
    CHECK(dist == doctest::Approx(3.40096e-4).epsilon(1e-4));
    CHECK(m["result"]["accepted_steps"] == 5000);
    fs::remove_all(dir);
}
