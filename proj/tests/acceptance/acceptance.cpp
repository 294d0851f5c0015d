// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include "cli.hpp"
#include "oracles.hpp"

#include "rslq/instances.hpp"
#include "rslq/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace rslq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [violated: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SimOptions sim(std::size_t paths, std::uint64_t seed)
{
    SimOptions o;
    o.paths = paths;
    o.seed = seed;
    return o;
}

Outcome analytic_riccati()
{
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto spec = instances::scalar_analytic(1000);
    const auto sol = solve_riccati_direct(spec);
    const double elapsed = seconds_since(start);
    double err = 0.0;
    for (std::size_t k = 0; k < spec.grid.nodes(); ++k) {
        err = std::max(err, std::abs(sol.P[0][k](0, 0) - oracle::scalar_riccati(spec.grid.node(k), spec.grid.T)));
    }
    o.detail << "max abs error " << err << ", runtime " << elapsed << " s";
    o.require(err <= 1e-8, "error <= 1e-8");
    o.require(elapsed < 1.0, "runtime < 1 s");
    o.require(sol.classification.kind == Regularity::strongly_regular, "strongly regular");
    return o;
}

Outcome iteration_equivalence()
{
    Outcome o;
    for (const auto& spec : {instances::scalar_analytic(1000), instances::standard_two_regime(200)}) {
        const auto iter = iterate_strongly_regular(spec);
        const auto direct = solve_riccati_direct(spec);
        const double dist = sup_distance(iter.P, direct.P);
        double mono = std::numeric_limits<double>::infinity();
        for (double g : iter.monotonicity_trace) mono = std::min(mono, g);
        o.detail << "n=" << spec.n << ",D=" << spec.num_regimes() << ": " << iter.iteration_trace.size()
                 << " iterations, sup distance " << dist << ", min monotonicity " << mono << "; ";
        o.require(iter.iteration_trace.size() <= 30, "<= 30 iterations");
        o.require(dist <= 1e-8, "sup distance <= 1e-8");
        o.require(mono >= -1e-8, "monotonicity >= -1e-8");
    }
    return o;
}

Outcome decoupling()
{
    Outcome o;
    const auto spec = instances::decoupled_three_regime(200);
    const auto joint = solve_riccati_direct(spec);
    double worst = 0.0;
    for (std::size_t i = 0; i < spec.num_regimes(); ++i) {
        ProblemSpec alone = spec;
        alone.regimes = {spec.regimes[i]};
        alone.gen.rates = MatSeries(Mat::Zero(1, 1));
        const auto single = solve_riccati_direct(alone);
        for (std::size_t k = 0; k < spec.grid.nodes(); ++k) {
            worst = std::max(worst, (joint.P[i][k].mat() - single.P[0][k].mat()).norm());
        }
    }
    o.detail << "sup distance to independent solves " << worst;
    o.require(worst <= 1e-10, "<= 1e-10");
    return o;
}

Outcome feynman_kac()
{
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto spec = instances::standard_two_regime(500);
    const auto cc = m0_crosscheck(spec, 0, sim(10000, 7), bias_constant());
    const double elapsed = seconds_since(start);
    o.detail << "max |MC - ODE| " << cc.max_abs_diff << ", allowance " << cc.worst_allowance << ", runtime "
             << elapsed << " s";
    o.require(cc.pass, "entrywise within 3 SE + bias");
    o.require(elapsed < 30.0, "runtime < 30 s");
    return o;
}

Outcome value_consistency_check()
{
    Outcome o;
    const std::vector<std::pair<std::string, ProblemSpec>> cases{
        {"scalar", instances::scalar_analytic(1000)}, {"inhomogeneous", instances::inhomogeneous_two_regime(200)}};
    for (const auto& [name, spec] : cases) {
        const auto ric = solve_riccati_direct(spec);
        const auto aff = solve_eta(spec, ric);
        const Vec x0 = Vec::Ones(spec.n);
        const auto vc = value_consistency(spec, ric, aff, 0, x0, sim(10000, 7), 5, bias_constant());
        double min_gap = std::numeric_limits<double>::infinity();
        for (const auto& p : vc.perturbations) {
            min_gap = std::min(min_gap, p.gap.mean + 3.0 * p.gap.std_error);
            o.require(p.pass, name + " perturbation gap >= -3 SE");
        }
        o.detail << name << ": |MC - V| " << std::abs(vc.mc.mean - vc.value) << " <= " << vc.tolerance
                 << ", min gap + 3 SE " << min_gap << "; ";
        o.require(vc.pass, name + " value within 3 SE + bias");
        o.require(vc.perturbations.size() == 5, "5 perturbations");
    }
    return o;
}

Outcome stationarity()
{
    Outcome o;
    std::size_t tested = 0;
    for (const auto& e : instances::catalog()) {
        const auto spec = e.make(e.steps);
        RiccatiSolution ric;
        try {
            ric = solve_riccati_direct(spec);
        } catch (const DivergenceError&) {
            continue;
        }
        if (!ric.classification.is_regular()) continue;
        const auto aff = solve_eta(spec, ric);
        if (!aff.closed_loop_valid) continue;
        const auto seeds = path_seeds(1, 0);
        const auto chain = simulate_chain(spec.gen, spec.grid, e.regime, seeds.chain);
        const auto path = simulate_closed_loop(spec, ric, aff, e.regime, e.x0, 1);
        const double res = max_norm(stationarity_residual(spec, ric, aff, chain, path));
        const double tol = 1e-6 + 10.0 * spec.grid.h();
        o.require(res <= tol, e.name);
        o.detail << e.name << " " << res << "; ";
        ++tested;
    }
    o.detail << tested << " regular instances";
    return o;
}

Outcome frechet_expansion()
{
    Outcome o;
    for (const char* name : {"scalar_analytic", "noise_free"}) {
        const auto& e = instances::find(name);
        const auto spec = e.make(e.steps);
        const auto ric = solve_riccati_direct(spec);
        const auto aff = solve_eta(spec, ric);
        const auto law = optimal_feedback(ric, aff);
        FrechetOptions fo;
        fo.sim = sim(10, 3);
        const auto v = random_unit_control(spec, 11);
        const auto fr = frechet_gradient_check(spec, e.regime, e.x0, closed_loop_outcome(spec, law, e.x0), v, fo);
        double scale = 1.0;
        for (double c : fr.mean_cost) scale = std::max(scale, std::abs(c));
        const double quad_rel = std::abs(fr.quadratic.mean - fr.j0_v.mean) / std::abs(fr.j0_v.mean);
        o.detail << name << ": fit residual " << fr.fit_residual << ", quadratic vs J0 rel " << quad_rel
                 << ", linear at u* " << fr.linear.mean << "; ";
        o.require(fr.fit_residual <= 1e-10 * scale, std::string(name) + " fit residual");
        o.require(quad_rel <= 1e-6, std::string(name) + " quadratic coefficient");
        // The linear term at u* vanishes only up to O(h) when affine data are present.
        if (std::string(name) == "scalar_analytic") o.require(std::abs(fr.linear.mean) <= 1e-6, "linear at u*");
    }
    return o;
}

Outcome convexity()
{
    Outcome o;
    const auto good = convexity_probe(instances::standard_two_regime(200), 0, 50, sim(2000, 7));
    const auto bad = convexity_probe(instances::negative_weight(200), 0, 50, sim(100, 7));
    const auto& worst = bad.ratios[bad.argmin];
    o.detail << "standard eps_hat " << good.eps_hat << " (SE " << good.ratios[good.argmin].std_error
             << "); R = -1 eps_hat " << bad.eps_hat << " (SE " << worst.std_error << ")";
    o.require(good.eps_hat > 0.0 && !good.flagged, "standard eps_hat > 0");
    o.require(bad.eps_hat < 0.0 && bad.flagged, "R = -1 flagged");
    return o;
}

Outcome kernel_properties()
{
    Outcome o;
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> dim(1, 8);
    double worst = 0.0;
    int deficient = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int rows = dim(rng), cols = dim(rng);
        const int full = std::min(rows, cols);
        const int rank = trial % 2 == 0 ? std::max(0, full - 1 - trial % 3) : full;
        deficient += rank < full ? 1 : 0;
        const Mat M = oracle::random_matrix(rng, rows, cols, rank);
        const Mat P = pinv(M);
        const double scale = 1.0 + M.norm();
        worst = std::max({worst, (M * P * M - M).norm() / scale, (P * M * P - P).norm() / scale,
                          ((M * P).transpose() - M * P).norm() / scale, ((P * M).transpose() - P * M).norm() / scale});
    }
    int agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 4;
        const int r = trial % (n + 1);
        const Mat L = oracle::random_matrix(rng, n, r, r);
        const Mat R = L * L.transpose();
        const int k = 1 + trial % 3;
        const Mat S = trial % 2 == 0 ? Mat(R * oracle::random_matrix(rng, n, k, std::min(n, k)))
                                     : oracle::random_matrix(rng, n, k, std::min(n, k));
        agree += range_included(S, SymMat(R)) == oracle::range_included(S, R) ? 1 : 0;
    }
    o.detail << "worst Penrose residual / (1 + |M|) " << worst << " over 100 matrices (" << deficient
             << " rank-deficient); range oracle agreement " << agree << "/100";
    o.require(worst <= 1e-8, "Penrose axioms");
    o.require(deficient > 0, "rank-deficient cases present");
    o.require(agree == 100, "range oracle");
    return o;
}

std::string csv_body(const fs::path& p)
{
    std::ifstream in(p);
    std::string line, body;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) != 0) body += line + "\n";
    }
    return body;
}

Outcome reproducibility(const fs::path& root)
{
    Outcome o;
    fs::create_directories(root);
    const auto problem = root / "inhomogeneous_two_regime.yaml";
    auto file = instances::find("inhomogeneous_two_regime").file();
    file.paths = 1000;
    save_problem(problem, file);
    std::string bodies[2];
    for (int run = 0; run < 2; ++run) {
        cli::RunConfig cfg;
        cfg.command = "verify";
        cfg.problem = problem;
        cfg.out = root / ("run" + std::to_string(run));
        cfg.seed = 2024;
        cfg.threads = run == 0 ? 1 : 0;
        std::ostringstream out, err;
        const int code = cli::cmd_verify(cfg, out, err);
        o.require(code == cli::kSuccess, "verify exit code 0 (got " + std::to_string(code) + ")");
        bodies[run] = csv_body(cfg.out / "verify.csv");
    }
    o.detail << "verify.csv body " << bodies[0].size() << " bytes, identical: " << (bodies[0] == bodies[1] ? "yes" : "no");
    o.require(!bodies[0].empty(), "non-empty CSV");
    o.require(bodies[0] == bodies[1], "byte-identical bodies");
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "rslq_acceptance";
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"analytic Riccati oracle", analytic_riccati},
        {"iteration equivalence and monotonicity", iteration_equivalence},
        {"regime decoupling", decoupling},
        {"Feynman-Kac cross-check", feynman_kac},
        {"value consistency", value_consistency_check},
        {"stationarity", stationarity},
        {"Frechet quadratic expansion", frechet_expansion},
        {"convexity probes", convexity},
        {"kernel properties", kernel_properties},
        {"reproducibility", [&] { return reproducibility(out); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << i + 1 << ". " << criteria[i].first << ": " << o.detail.str()
                  << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
