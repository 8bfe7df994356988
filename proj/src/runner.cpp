#include "fermikinetics/runner.hpp"

#include <fftw3.h>
#include <omp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "fermikinetics/collision.hpp"
#include "fermikinetics/errors.hpp"
#include "fermikinetics/fluctuations.hpp"
#include "fermikinetics/fock.hpp"
#include "fermikinetics/io.hpp"
#include "fermikinetics/kinetics.hpp"

namespace fk {

namespace fs = std::filesystem;
using json = nlohmann::json;

MomentumGrid spec_grid(const RunSpec& spec) { return build_grid(spec.dim, spec.n); }

Dispersion spec_band(const RunSpec& spec, const MomentumGrid& grid)
{
    return nearest_neighbor_band(grid, spec.hopping);
}

PairPotential spec_potential(const RunSpec& spec, const MomentumGrid& grid)
{
    return cosine_potential(grid, spec.potential);
}

Occupation spec_state(const RunSpec& spec, const Dispersion& band)
{
    if (spec.state == "fermi_dirac") return fermi_dirac(band, spec.beta, spec.mu);
    if (spec.state == "fermi_sea") return fermi_sea(band, spec.mu);
    if (spec.state == "constant") return constant_occupation(band.grid, spec.w_value);
    return random_occupation(band.grid, spec.w_low, spec.w_high, spec.seed);
}

QuadraticObservable spec_observable(const RunSpec& spec, const MomentumGrid& grid)
{
    if (spec.observable == "bond") return bond(grid, {0, 0}, {1, 0});
    if (spec.observable == "random") return random_observable(grid, spec.obs_width, spec.obs_complex, spec.seed + 1);
    return site_number(grid, {0, 0});
}

namespace {

struct Context {
    const RunSpec& spec;
    fs::path dir;
    Provenance prov;
    std::vector<fs::path> files;
    bool verbose = false;

    fs::path add(const fs::path& rel)
    {
        fs::path full = dir / rel;
        fs::create_directories(full.parent_path());
        files.push_back(rel);
        return full;
    }

    void write_json(const fs::path& rel, json j)
    {
        j["provenance"] = prov.lines;
        std::ofstream out(add(rel));
        if (!out) throw ResourceError("cannot write " + (dir / rel).string());
        out << j.dump(2) << "\n";
    }

    void log(const std::string& msg) const
    {
        if (verbose) std::cerr << "[fermikinetics] " << msg << "\n";
    }
};

json point_json(const TrajectoryPoint& p)
{
    return {{"t", p.t}, {"rho", p.rho}, {"e", p.e}, {"s", p.s}, {"dist_fd", p.dist_fd}};
}

std::string time_tag(double t)
{
    char b[32];
    std::snprintf(b, sizeof b, "%010.4f", t);
    return b;
}

void write_snapshot(Context& ctx, const TrajectoryPoint& p, const Dispersion& band)
{
    const auto& g = band.grid;
    CsvWriter w(ctx.add(fs::path("snapshots") / ("w_t" + time_tag(p.t) + ".csv")), ctx.prov,
                {"index", "j0", "j1", "p0", "p1", "eps", "w"});
    for (Index i = 0; i < g.size(); ++i) {
        auto c = g.coords(i);
        auto mom = g.momentum(i);
        w << static_cast<long long>(i) << c[0] << c[1] << mom[0] << mom[1] << band.eps[i] << p.w.w[i];
        w.end_row();
    }
}

json run_evolve(Context& ctx)
{
    const auto& spec = ctx.spec;
    auto grid = spec_grid(spec);
    auto band = spec_band(spec, grid);
    auto v = spec_potential(spec, grid);
    double eta = spec.eta_auto ? default_eta(band) : spec.eta;
    ScalingParameters sp{spec.lambda, spec.N_list.front(), 1, eta};
    TableOptions to{spec.mode, spec.threshold, spec.threshold_relative, spec.max_entries};
    ctx.log("building collision table");
    auto table = build_table(band, v, sp, to);
    ctx.log("table: " + std::to_string(table.class_count()) + " classes, " + std::to_string(table.logical_size()) +
            " logical entries");
    if (spec.has_format("binary")) write_table_binary(ctx.add("table.bin"), table);
    if (spec.has_format("table_csv")) write_table_csv(ctx.add("table.csv"), ctx.prov, table);

    auto w0 = spec_state(spec, band);
    EvolveOptions eo;
    eo.T = spec.T;
    eo.dt = spec.dt;
    eo.monitor_every = spec.monitor_every;

    Trajectory tr;
    try {
        tr = evolve(w0, table, band, eo);
    } catch (const EvolveFailure& e) {
        write_snapshot(ctx, e.last(), band);
        throw;
    }
    ctx.log("evolution done: " + std::to_string(tr.stats.accepted_steps) + " accepted steps");

    {
        CsvWriter w(ctx.add("trajectory.csv"), ctx.prov, {"t", "rho", "e", "s", "dist_fd"});
        for (const auto& p : tr.points) {
            w << p.t << p.rho << p.e << p.s << p.dist_fd;
            w.end_row();
        }
    }
    for (const auto& p : tr.points) write_snapshot(ctx, p, band);

    const auto& first = tr.points.front();
    const auto& last = tr.points.back();
    double span = last.t - first.t;
    json summary;
    summary["initial"] = point_json(first);
    summary["final"] = point_json(last);
    summary["drift_rates"] = {
        {"density", span > 0 ? std::abs(last.rho - first.rho) / span : 0.0},
        {"energy", span > 0 ? std::abs(last.e - first.e) / span : 0.0},
        {"energy_per_eta", span > 0 ? std::abs(last.e - first.e) / (span * eta) : 0.0},
        {"max_density_drift", tr.stats.max_density_drift},
        {"max_energy_drift", tr.stats.max_energy_drift},
    };
    summary["steps"] = {
        {"accepted", tr.stats.accepted_steps},
        {"rejected", tr.stats.rejected_steps},
        {"smallest_dt", tr.stats.smallest_dt},
        {"min_entropy_increment", tr.stats.min_entropy_increment},
        {"min_w", tr.stats.min_w},
        {"max_w", tr.stats.max_w},
    };
    summary["table"] = {
        {"mode", to_string(table.mode())},  {"eta", table.eta()},
        {"classes", table.class_count()},   {"logical_entries", table.logical_size()},
        {"threshold", table.threshold()},   {"max_weight", table.max_weight()},
    };
    try {
        auto eq = match_equilibrium(last.rho, last.e, band);
        summary["matched_equilibrium"] = {{"beta", eq.beta}, {"mu", eq.mu}, {"c", eq.c}, {"degenerate", eq.degenerate}};
    } catch (const Error& e) {
        summary["matched_equilibrium"] = {{"error", e.what()}};
    }
    ctx.write_json("summary.json", summary);
    return {{"final_dist_fd", last.dist_fd}, {"accepted_steps", tr.stats.accepted_steps}};
}

json run_fluct(Context& ctx)
{
    const auto& spec = ctx.spec;
    auto grid = spec_grid(spec);
    auto band = spec_band(spec, grid);
    auto s = make_state(grid, spec_state(spec, band));
    auto A = spec_observable(spec, grid);
    auto B = translate(A, {spec.pair_offset, 0});
    auto Ks = spec.K_list.empty() ? default_block_sizes(grid) : spec.K_list;

    auto C = correlation_profile(s, A, A);
    {
        CsvWriter w(ctx.add("correlation.csv"), ctx.prov, {"index", "d0", "d1", "re", "im"});
        for (Index i = 0; i < grid.size(); ++i) {
            auto d = grid.min_image(i);
            w << static_cast<long long>(i) << d[0] << d[1] << C[i].real() << C[i].imag();
            w.end_row();
        }
    }
    auto lim = variance_limit(s, A, Ks);
    {
        CsvWriter w(ctx.add("blocks.csv"), ctx.prov, {"K", "V_K", "W_K"});
        for (std::size_t i = 0; i < lim.K.size(); ++i) {
            w << lim.K[i] << lim.V[i] << lim.window[i];
            w.end_row();
        }
    }
    double Saa = covariance(s, A, A);
    double Sbb = covariance(s, B, B);
    double sigma = symplectic(s, A, B);
    json forms;
    forms["S_AA"] = Saa;
    forms["S_AA_translation_sum"] = covariance_by_translation_sum(s, A, A);
    forms["S_AB"] = covariance(s, A, B);
    forms["sigma_AB"] = sigma;
    json blocks = json::array();
    for (int K : Ks) {
        double sk = block_symplectic(s, A, B, K);
        auto ph = ccr_phase(s, A, B, K);
        blocks.push_back({{"K", K},
                          {"sigma_K", sk},
                          {"positivity_margin", Saa * Sbb - 0.25 * sk * sk},
                          {"ccr_phase", {ph.real(), ph.imag()}}});
    }
    forms["block_forms"] = blocks;
    auto ph = ccr_phase(s, A, B);
    forms["ccr_phase"] = {ph.real(), ph.imag()};
    forms["variance_limit"] = {
        {"classification", to_string(lim.classification)},
        {"estimate", lim.estimate},
        {"loglog_slope", lim.loglog_slope},
        {"geometric_ratio", lim.geometric_ratio},
        {"power_exponent", lim.power_exponent},
    };
    try {
        forms["weyl_char"] = weyl_char(s, A);
    } catch (const DomainError& e) {
        forms["weyl_char"] = {{"error", e.what()}};
    }
    ctx.write_json("forms.json", forms);
    return {{"classification", to_string(lim.classification)}, {"S_AA", Saa}};
}

json run_scaling(Context& ctx)
{
    const auto& spec = ctx.spec;
    auto grid = spec_grid(spec);
    auto band = spec_band(spec, grid);
    auto v = spec_potential(spec, grid);
    auto s = make_state(grid, spec_state(spec, band));
    auto A = spec_observable(spec, grid);
    auto Ks = spec.K_list.empty() ? default_block_sizes(grid) : spec.K_list;
    Moment moment = spec.moment == "mean" ? Moment::mean : Moment::variance;
    RegimeThresholds th{spec.theta_regular, spec.theta_divergent};
    ctx.log("regime scan over " + std::to_string(Ks.size() * spec.N_list.size()) + " cells");
    auto rep = regime_scan(s, band, v, spec.lambda, A, Ks, spec.N_list, moment, th);

    {
        CsvWriter w(ctx.add("regime.csv"), ctx.prov, {"K", "N", "K_over_N", "value", "label"});
        for (const auto& c : rep.cells) {
            w << c.K << c.N << c.K / c.N << c.value << std::string(to_string(c.label));
            w.end_row();
        }
    }
    json cells = json::array();
    for (const auto& c : rep.cells)
        cells.push_back({{"K", c.K}, {"N", c.N}, {"value", c.value}, {"label", to_string(c.label)}});
    json j = {
        {"moment", spec.moment},
        {"lambda", rep.lambda},
        {"v_inf", rep.v_inf},
        {"thresholds", {{"theta_regular", rep.theta_r}, {"theta_divergent", rep.theta_d}}},
        {"fit", {{"exponent", rep.fit_exponent}, {"intercept", rep.fit_intercept}}},
        {"max_abs_mean", rep.max_abs_mean},
        {"cells", cells},
    };
    ctx.write_json("regime.json", j);
    return {{"fit_exponent", rep.fit_exponent}};
}

// Lattice functional vs exact Fock value, one row each.
struct OracleRow {
    std::string quantity;
    cplx qf, fock;
};

json run_oracle(Context& ctx)
{
    const auto& spec = ctx.spec;
    auto rep = car_ops(spec.sites);
    const auto& grid = rep.grid;
    auto band = spec_band(spec, grid);
    auto v = spec_potential(spec, grid);
    auto s = make_state(grid, spec_state(spec, band));
    auto rho = gaussian_state(rep, s.w());
    std::vector<OracleRow> rows;
    rows.push_back({"car_deviation", 0.0, rep.car_deviation});

    std::vector<SparseOp> num(grid.size());
    for (Index p = 0; p < grid.size(); ++p) {
        num[p] = rep.a_mom[p].adjoint() * rep.a_mom[p];
        rows.push_back({"n_p[" + std::to_string(p) + "]", s.w()[p], exact_expect(rho, num[p])});
    }

    auto A = spec_observable(spec, grid);
    auto Aop = observable_operator(rep, A);
    rows.push_back({"mean_A", mean(s, A), exact_expect(rho, Aop)});
    Coords d{spec.pair_offset, 0};
    auto Bd = translate(A, d);
    auto Bop = observable_operator(rep, Bd);
    SparseOp AB = Aop * Bop;
    rows.push_back({"truncated_corr_A_B", truncated_corr(s, A, A, d),
                    exact_expect(rho, AB) - exact_expect(rho, Aop) * exact_expect(rho, Bop)});

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss;
    auto random_profile = [&] {
        std::vector<cplx> f(grid.size());
        for (auto& x : f) x = {gauss(rng), gauss(rng)};
        return make_profile(grid, f);
    };
    for (int r = 1; r <= 3; ++r) {
        std::vector<Profile> cr, an;
        SparseOp op = SparseOp(rep.dim(), rep.dim());
        op.setIdentity();
        for (int i = 0; i < r; ++i) cr.push_back(random_profile());
        for (int i = 0; i < r; ++i) an.push_back(random_profile());
        for (int i = 0; i < r; ++i) op = SparseOp(op * creator(rep, cr[i].sites));
        for (int i = r - 1; i >= 0; --i) op = SparseOp(op * annihilator(rep, an[i].sites));
        rows.push_back({"wick_r" + std::to_string(r), wick_expect(s, cr, an), exact_expect(rho, op)});
    }

    // lambda * int_0^t omega([V(t'), O]) dt' against the interaction-picture integral.
    double t = spec.T;
    auto V = interaction_operator(rep, v);
    DenseOp Vint = interaction_picture_integral(rep, band, V, t);
    auto drift_row = [&](const std::string& name, const PairObservable& O) {
        DenseOp X = quadratic_operator(rep, O.X);
        DenseOp Y = quadratic_operator(rep, O.Y);
        DenseOp Oop = 0.5 * (X * Y + Y * X);
        DenseOp comm = Vint * Oop - Oop * Vint;
        rows.push_back({name, weyl_drift(s, band, v, spec.lambda, O, t), spec.lambda * exact_expect(rho, comm)});
    };
    drift_row("weyl_drift_pair", make_pair(A, A, d));
    drift_row("weyl_drift_total_number", total_number_pair(grid));

    // Finite-size van Hove probe: change of the mode occupations over T = N t.
    double N = spec.N_list.front();
    DenseOp H = build_hamiltonian(rep, band, v, spec.lambda, N);
    for (Index p = 0; p < grid.size(); ++p) {
        DenseOp np = DenseOp(num[p]);
        rows.push_back({"evolved_n_p[" + std::to_string(p) + "]", s.w()[p], exact_evolve_expect(rho, H, np, N * t)});
    }

    double worst = 0.0;
    {
        CsvWriter w(ctx.add("oracle.csv"), ctx.prov,
                    {"quantity", "lattice_re", "lattice_im", "fock_re", "fock_im", "abs_diff"});
        for (const auto& r : rows) {
            double diff = std::abs(r.qf - r.fock);
            if (r.quantity.rfind("evolved", 0) != 0) worst = std::max(worst, diff);
            w << r.quantity << r.qf.real() << r.qf.imag() << r.fock.real() << r.fock.imag() << diff;
            w.end_row();
        }
    }
    ctx.write_json("oracle.json", {{"modes", spec.sites}, {"max_abs_diff_identities", worst}, {"rows", rows.size()}});
    return {{"max_abs_diff_identities", worst}};
}

json run_equilibrium(Context& ctx)
{
    const auto& spec = ctx.spec;
    auto grid = spec_grid(spec);
    auto band = spec_band(spec, grid);
    auto w0 = spec_state(spec, band);
    auto de = density_energy(w0, band);
    auto eq = match_equilibrium(de.rho, de.e, band);
    auto fd = fermi_dirac(band, eq);
    auto de_fd = density_energy(fd, band);
    {
        CsvWriter w(ctx.add("occupation.csv"), ctx.prov, {"index", "j0", "j1", "eps", "w_initial", "w_fd"});
        for (Index i = 0; i < grid.size(); ++i) {
            auto c = grid.coords(i);
            w << static_cast<long long>(i) << c[0] << c[1] << band.eps[i] << w0.w[i] << fd.w[i];
            w.end_row();
        }
    }
    auto pos = to_position(grid, fd);
    {
        CsvWriter w(ctx.add("position.csv"), ctx.prov, {"index", "x0", "x1", "re", "im"});
        for (Index i = 0; i < grid.size(); ++i) {
            auto c = grid.coords(i);
            w << static_cast<long long>(i) << c[0] << c[1] << pos[i].real() << pos[i].imag();
            w.end_row();
        }
    }
    json j = {
        {"dim", grid.dim()},
        {"n", grid.n()},
        {"conventions",
         {{"momentum", "p_j = -pi + 2 pi j / n per axis, flat index j0 * n + j1"},
          {"position", "w(x) = n^-dim sum_j w_j exp(i p_j . x)"},
          {"fermi_dirac", "w = 1 / (1 + exp(beta eps - c)), c = beta mu; beta = 0 reports mu = 0 and carries c"}}},
        {"beta", eq.beta},
        {"mu", eq.mu},
        {"c", eq.c},
        {"degenerate", eq.degenerate},
        {"rho", de.rho},
        {"e", de.e},
        {"s_initial", entropy_density(w0)},
        {"s_fd", entropy_density(fd)},
        {"residual", {{"rho", std::abs(de_fd.rho - de.rho)}, {"e", std::abs(de_fd.e - de.e)}}},
    };
    ctx.write_json("equilibrium.json", j);
    return {{"beta", eq.beta}, {"mu", eq.mu}};
}

}  // namespace

json run_scenario(const RunSpec& spec, const RunOptions& opt)
{
    auto start = std::chrono::steady_clock::now();
    Context ctx{spec, fs::path(opt.out_dir.value_or(spec.out_dir)), {}, {}, opt.verbose};
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec) throw ResourceError("cannot create output directory " + ctx.dir.string() + ": " + ec.message());

    std::string rendered = render_spec(spec);
    std::string config_hash = sha256_hex(rendered);
    ctx.prov.lines.push_back(std::string("fermikinetics ") + kToolVersion);
    ctx.prov.lines.push_back("config_sha256 " + config_hash);
    for (const auto& [k, v] : spec.echo) ctx.prov.lines.push_back(k + " = " + v);

    json result;
    if (spec.scenario == "evolve") result = run_evolve(ctx);
    else if (spec.scenario == "fluct") result = run_fluct(ctx);
    else if (spec.scenario == "scaling") result = run_scaling(ctx);
    else if (spec.scenario == "oracle") result = run_oracle(ctx);
    else if (spec.scenario == "equilibrium") result = run_equilibrium(ctx);
    else throw ConfigError("unknown scenario '" + spec.scenario + "'");

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json outputs = json::array();
    std::sort(ctx.files.begin(), ctx.files.end());
    for (const auto& f : ctx.files)
        outputs.push_back({{"path", f.generic_string()},
                           {"sha256", sha256_file(ctx.dir / f)},
                           {"bytes", fs::file_size(ctx.dir / f)}});
    json inputs = json::object();
    for (const auto& [k, v] : spec.echo) inputs[k] = v;
    json manifest = {
        {"tool", "fermikinetics"},
        {"version", kToolVersion},
        {"scenario", spec.scenario},
        {"config_sha256", config_hash},
        {"config_source_sha256", sha256_hex(spec.source)},
        {"inputs", inputs},
        {"seed", spec.seed},
        {"threads", omp_get_max_threads()},
        {"wall_time_s", wall},
        {"libraries",
         {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"fftw", std::string(fftw_version)},
          {"boost", BOOST_LIB_VERSION},
          {"openssl", OPENSSL_VERSION_TEXT}}},
        {"result", result},
        {"outputs", outputs},
    };
    std::ofstream out(ctx.dir / "manifest.json");
    if (!out) throw ResourceError("cannot write manifest");
    out << manifest.dump(2) << "\n";
    return manifest;
}

}  // namespace fk
