#include "rslq/verify.hpp"

#include "rslq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace rslq {

namespace {

constexpr std::uint64_t kControlStream = 2;
constexpr std::uint64_t kPerturbStream = 3;
constexpr std::uint64_t kDirectionStream = 4;

CheckResult check(std::string name, double statistic, const char* relation, double tolerance, std::size_t paths,
                  std::uint64_t seed)
{
    CheckResult c;
    c.name = std::move(name);
    c.statistic = statistic;
    c.relation = relation;
    c.tolerance = tolerance == 0.0 ? 0.0 : tolerance;  // no "-0" in reports
    c.pass = c.relation == "<=" ? statistic <= tolerance : statistic >= tolerance;
    c.paths = paths;
    c.seed = seed;
    return c;
}

// One MC path: chain and Brownian draws of (seed, p).
struct Draws {
    ChainPath chain;
    std::vector<double> dW;
};

Draws draw(const ProblemSpec& spec, std::size_t i0, std::uint64_t seed, std::size_t p)
{
    const auto s = path_seeds(seed, p);
    return Draws{simulate_chain(spec.gen, spec.grid, i0, s.chain), brownian_increments(spec.grid, s.noise)};
}

// Linear part of the running integrand at node j: 2[<Qx + q, y> + <Sx, w> + <Sy, u> + <Ru + rho, w>].
template <class X, class U>
double running_differential(const RegimeCoeffs& rc, std::size_t j, const X& x, const U& u, const X& y, const U& w)
{
    const Mat& S = rc.S.at_node(j);
    return 2.0 * (y.dot(rc.Q.at_node(j) * x + rc.q.at_node(j)) + w.dot(S * x) + u.dot(S * y) +
                  w.dot(rc.R.at_node(j) * u + rc.rho.at_node(j)));
}

CrossCheck compare(Mat estimate, Mat std_error, Mat reference, const TimeGrid& grid, double K)
{
    CrossCheck out;
    const double budget = bias_budget(grid, reference.cwiseAbs().maxCoeff(), K);
    out.allowance = (3.0 * std_error).array() + budget;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (Index r = 0; r < estimate.rows(); ++r) {
        for (Index c = 0; c < estimate.cols(); ++c) {
            const double diff = std::abs(estimate(r, c) - reference(r, c));
            const double excess = diff - out.allowance(r, c);
            out.max_abs_diff = std::max(out.max_abs_diff, diff);
            if (excess > worst_excess) {
                worst_excess = excess;
                out.worst_allowance = out.allowance(r, c);
            }
        }
    }
    out.pass = worst_excess <= 0.0;
    out.estimate = std::move(estimate);
    out.std_error = std::move(std_error);
    out.reference = std::move(reference);
    return out;
}

double sup_frobenius(const MatTable& t)
{
    double s = 0.0;
    for (const auto& row : t) {
        for (const auto& m : row) s = std::max(s, m.norm());
    }
    return s;
}

double sup_norm(const VecTable& t)
{
    double s = 0.0;
    for (const auto& row : t) {
        for (const auto& v : row) s = std::max(s, v.size() ? v.cwiseAbs().maxCoeff() : 0.0);
    }
    return s;
}

}  // namespace

bool VerificationReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

void VerificationReport::write_csv(std::ostream& os) const
{
    os << "check,statistic,relation,tolerance,pass,paths,seed\n";
    os << std::setprecision(17);
    for (const auto& c : checks) {
        os << c.name << ',' << c.statistic << ',' << c.relation << ',' << c.tolerance << ','
           << (c.pass ? "pass" : "fail") << ',' << c.paths << ',' << c.seed << '\n';
    }
}

void VerificationReport::write_text(std::ostream& os) const
{
    os << "classification: " << classification << '\n';
    os << "grid steps: " << steps << ", bias constant K = " << std::setprecision(6) << bias_constant << '\n';
    for (const auto& c : checks) {
        os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << std::setprecision(6) << c.statistic << ' '
           << c.relation << ' ' << c.tolerance;
        if (c.paths > 0) os << " (paths " << c.paths << ", seed " << c.seed << ')';
        os << '\n';
    }
    os << (all_passed() ? "all checks passed" : "verification FAILED") << '\n';
}

double bias_constant()
{
    const double a = 0.5;
    const double c = 0.5;
    const double exact = std::exp(2.0 * a + c * c);
    double worst = 0.0;
    for (int N : {50, 100, 200, 400}) {
        const double h = 1.0 / N;
        const double euler = std::pow(1.0 + (2.0 * a + c * c) * h + a * a * h * h, N);
        worst = std::max(worst, std::abs(euler - exact) / (h * std::max(1.0, exact)));
    }
    return 2.0 * worst;
}

double bias_budget(const TimeGrid& grid, double reference, double K)
{
    return K * grid.h() * std::max(1.0, std::abs(reference));
}

std::vector<Vec> stationarity_residual(const ProblemSpec& spec, const RiccatiSolution& ric,
                                       const AffineSolution& aff, const ChainPath& chain, const StatePath& path)
{
    const std::size_t nodes = spec.grid.nodes();
    const auto cols = static_cast<Index>(nodes);
    if (path.X.cols() != cols || path.u.cols() != cols || chain.regime.size() != nodes) {
        throw InvalidInput("stationarity_residual: path does not match the grid");
    }
    std::vector<Vec> out(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
        const std::size_t r = chain.regime[k];
        const auto& rc = spec.regimes[r];
        const Mat& P = ric.P[r][k].mat();
        const Vec x = path.X.col(static_cast<Index>(k));
        const Vec u = path.u.col(static_cast<Index>(k));
        const Mat& B = rc.B.at_node(k);
        const Mat& D = rc.D.at_node(k);
        const Vec Y = P * x + aff.eta[r][k];
        const Vec Z = P * (rc.C.at_node(k) * x + D * u + rc.sigma.at_node(k));
        out[k] = B.transpose() * Y + D.transpose() * Z + rc.S.at_node(k) * x + rc.R.at_node(k) * u +
                 rc.rho.at_node(k);
    }
    return out;
}

double max_norm(const std::vector<Vec>& values)
{
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, v.norm());
    return m;
}

ControlSource fixed_control(ControlPath u)
{
    return [u = std::move(u)](const ChainPath&, const std::vector<double>&) { return u; };
}

ControlSource closed_loop_outcome(const ProblemSpec& spec, FeedbackLaw law, Vec x0)
{
    return [&spec, law = std::move(law), x0 = std::move(x0)](const ChainPath& chain, const std::vector<double>& dW) {
        return simulate_feedback(spec, chain, law, x0, dW).u;
    };
}

double cost_differential(const ProblemSpec& spec, const ChainPath& chain, const StatePath& base,
                         const StatePath& direction)
{
    const std::size_t N = spec.grid.steps;
    double running = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const auto c = static_cast<Index>(k);
        const auto& rc = spec.regimes[chain.regime[k]];
        const auto u = base.u.col(c);
        const auto w = direction.u.col(c);
        running += running_differential(rc, k, base.X.col(c), u, direction.X.col(c), w) +
                   running_differential(rc, k + 1, base.X.col(c + 1), u, direction.X.col(c + 1), w);
    }
    const auto& rc = spec.regimes[chain.regime[N]];
    const Vec x = base.X.col(static_cast<Index>(N));
    const Vec y = direction.X.col(static_cast<Index>(N));
    return 0.5 * spec.grid.h() * running + 2.0 * y.dot(rc.G * x + rc.g);
}

FrechetResult frechet_gradient_check(const ProblemSpec& spec, std::size_t i0, const Vec& x0, const ControlSource& u,
                                     const ControlPath& v, const FrechetOptions& opts)
{
    require_valid(spec);
    if (v.rows() != spec.m || v.cols() != static_cast<Index>(spec.grid.nodes())) {
        throw InvalidInput("frechet_gradient_check: direction must be m x (steps + 1)");
    }

    FrechetResult res;
    res.epsilons = opts.epsilons;
    res.epsilons.push_back(0.0);
    std::sort(res.epsilons.begin(), res.epsilons.end());
    res.epsilons.erase(std::unique(res.epsilons.begin(), res.epsilons.end()), res.epsilons.end());
    const std::size_t E = res.epsilons.size();
    if (E < 3) throw InvalidInput("frechet_gradient_check: need at least three distinct epsilons");

    // Least-squares weights mapping J(eps) samples to quadratic coefficients.
    Mat V(static_cast<Index>(E), 3);
    for (std::size_t e = 0; e < E; ++e) {
        const double x = res.epsilons[e];
        V.row(static_cast<Index>(e)) << 1.0, x, x * x;
    }
    const Mat W = V.colPivHouseholderQr().solve(Mat::Identity(static_cast<Index>(E), static_cast<Index>(E)));

    const ProblemSpec hom = homogeneous(spec);
    const Vec zero = Vec::Zero(spec.n);
    const std::size_t P = opts.sim.paths;

    // Per path: J(eps) for every eps, then [c0, c1, c2, J0, tangent].
    struct PathResult {
        Vec J;
        Vec stats;
    };
    const auto per_path = map_paths<PathResult>(spec, opts.sim, [&](std::size_t p) {
        const auto d = draw(spec, i0, opts.sim.seed, p);
        const ControlPath base_u = u(d.chain, d.dW);
        PathResult out{Vec(static_cast<Index>(E)), Vec(5)};
        StatePath base;
        for (std::size_t e = 0; e < E; ++e) {
            auto path = simulate_state(spec, d.chain, base_u + res.epsilons[e] * v, x0, d.dW);
            out.J(static_cast<Index>(e)) = evaluate_cost(spec, d.chain, path);
            if (res.epsilons[e] == 0.0) base = std::move(path);
        }
        const auto dir = simulate_state(hom, d.chain, v, zero, d.dW);
        out.stats.head(3) = W * out.J;
        out.stats(3) = evaluate_cost(hom, d.chain, dir);
        out.stats(4) = cost_differential(spec, d.chain, base, dir);
        return out;
    });

    std::vector<double> c0(P), c1(P), c2(P), j0(P), gap(P), tangent(P);
    for (std::size_t p = 0; p < P; ++p) {
        const auto& st = per_path[p].stats;
        c0[p] = st(0);
        c1[p] = st(1);
        c2[p] = st(2);
        j0[p] = st(3);
        gap[p] = st(2) - st(3);
        tangent[p] = st(4);
    }

    const auto seed = opts.sim.seed;
    res.constant = summarize(c0, seed);
    res.linear = summarize(c1, seed);
    res.quadratic = summarize(c2, seed);
    res.j0_v = summarize(j0, seed);
    res.quadratic_gap = summarize(gap, seed);
    res.tangent = summarize(tangent, seed);

    res.mean_cost.assign(E, 0.0);
    std::vector<double> column(P);
    for (std::size_t e = 0; e < E; ++e) {
        for (std::size_t p = 0; p < P; ++p) column[p] = per_path[p].J(static_cast<Index>(e));
        res.mean_cost[e] = summarize(column, seed).mean;
    }
    for (std::size_t e = 0; e < E; ++e) {
        const double x = res.epsilons[e];
        const double fit = res.constant.mean + res.linear.mean * x + res.quadratic.mean * x * x;
        res.fit_residual = std::max(res.fit_residual, std::abs(res.mean_cost[e] - fit));
    }
    for (std::size_t a = 0; a < E; ++a) {
        const double x = res.epsilons[a];
        if (x <= 0.0) continue;
        for (std::size_t b = 0; b < E; ++b) {
            if (res.epsilons[b] != -x) continue;
            const double fd = (res.mean_cost[a] - res.mean_cost[b]) / (2.0 * x);
            res.fd_gap = std::max(res.fd_gap, std::abs(fd - res.linear.mean));
        }
    }
    return res;
}

ControlPath random_unit_control(const ProblemSpec& spec, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto N = static_cast<Index>(spec.grid.steps);
    ControlPath u(spec.m, N + 1);
    for (Index k = 0; k < N; ++k) {
        for (Index j = 0; j < spec.m; ++j) u(j, k) = normal(rng);
    }
    u.col(N) = u.col(N - 1);
    const double scale = std::sqrt(control_l2_squared(spec.grid, u));
    if (scale > 0.0) u /= scale;
    return u;
}

double control_l2_squared(const TimeGrid& grid, const ControlPath& u)
{
    if (u.cols() != static_cast<Index>(grid.nodes())) throw InvalidInput("control path needs one column per grid node");
    return grid.h() * u.leftCols(static_cast<Index>(grid.steps)).squaredNorm();
}

MCEstimate homogeneous_cost(const ProblemSpec& spec, std::size_t i0, const ControlPath& u, const SimOptions& opts)
{
    const ProblemSpec hom = homogeneous(spec);
    const Vec zero = Vec::Zero(spec.n);
    const auto costs = map_paths<double>(hom, opts, [&](std::size_t p) {
        const auto d = draw(hom, i0, opts.seed, p);
        return evaluate_cost(hom, d.chain, simulate_state(hom, d.chain, u, zero, d.dW));
    });
    return summarize(costs, opts.seed);
}

ConvexityResult convexity_probe(const ProblemSpec& spec, std::size_t i0, std::size_t n_controls,
                                const SimOptions& opts)
{
    require_valid(spec);
    if (n_controls == 0) throw InvalidInput("convexity_probe: need at least one control");
    ConvexityResult res;
    res.eps_hat = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_controls; ++c) {
        const auto u = random_unit_control(spec, stream_seed(opts.seed, c, kControlStream));
        const double l2 = control_l2_squared(spec.grid, u);
        auto est = homogeneous_cost(spec, i0, u, opts);
        est.mean /= l2;
        est.std_error /= l2;
        if (est.mean < res.eps_hat) {
            res.eps_hat = est.mean;
            res.argmin = c;
        }
        if (est.mean + 3.0 * est.std_error < 0.0) res.flagged = true;
        res.ratios.push_back(est);
    }
    return res;
}

FeedbackLaw perturbed_law(const FeedbackLaw& law, const Mat& dTheta, const Vec& dv)
{
    FeedbackLaw out = law;
    for (auto& row : out.Theta) {
        for (auto& th : row) th += dTheta;
    }
    for (auto& row : out.v) {
        for (auto& v : row) v += dv;
    }
    return out;
}

MCEstimate paired_cost_gap(const ProblemSpec& spec, const FeedbackLaw& base, const FeedbackLaw& other, std::size_t i0,
                           const Vec& x0, const SimOptions& opts)
{
    const auto gaps = map_paths<double>(spec, opts, [&](std::size_t p) {
        const auto d = draw(spec, i0, opts.seed, p);
        const double a = evaluate_cost(spec, d.chain, simulate_feedback(spec, d.chain, base, x0, d.dW));
        const double b = evaluate_cost(spec, d.chain, simulate_feedback(spec, d.chain, other, x0, d.dW));
        return b - a;
    });
    return summarize(gaps, opts.seed);
}

ValueConsistencyResult value_consistency(const ProblemSpec& spec, const RiccatiSolution& ric,
                                         const AffineSolution& aff, std::size_t i0, const Vec& x0,
                                         const SimOptions& opts, std::size_t n_perturbations, double K)
{
    ValueConsistencyResult res;
    const auto law = optimal_feedback(ric, aff);
    res.mc = summarize(feedback_costs(spec, law, i0, x0, opts), opts.seed);
    res.value = value_function(ric, aff, spec.grid.t0, i0, x0);
    res.tolerance = 3.0 * res.mc.std_error + bias_budget(spec.grid, res.value, K);
    res.pass = std::abs(res.mc.mean - res.value) <= res.tolerance;

    const double theta_scale = sup_frobenius(ric.Theta);
    const double v_scale = sup_norm(aff.v_star);
    for (std::size_t k = 0; k < n_perturbations; ++k) {
        std::mt19937_64 rng(stream_seed(opts.seed, k, kPerturbStream));
        std::uniform_real_distribution<double> uni(-0.5, 0.5);
        PerturbationResult pr;
        pr.dTheta = Mat(spec.m, spec.n);
        pr.dv = Vec(spec.m);
        for (Index r = 0; r < spec.m; ++r) {
            for (Index c = 0; c < spec.n; ++c) pr.dTheta(r, c) = uni(rng) * theta_scale;
        }
        for (Index r = 0; r < spec.m; ++r) pr.dv(r) = uni(rng) * v_scale;
        pr.gap = paired_cost_gap(spec, law, perturbed_law(law, pr.dTheta, pr.dv), i0, x0, opts);
        pr.pass = pr.gap.mean >= -3.0 * pr.gap.std_error;
        res.perturbations.push_back(std::move(pr));
    }
    return res;
}

CrossCheck m0_crosscheck(const ProblemSpec& spec, std::size_t i0, const SimOptions& opts, double K)
{
    const auto mc = feynman_kac_M0(spec, i0, opts);
    const auto ode = solve_lyapunov_uncontrolled(spec);
    return compare(mc.mean.mat(), mc.std_error, ode.P[i0][0].mat(), spec.grid, K);
}

CrossCheck eta_bsde_check(const ProblemSpec& spec, const RiccatiSolution& ric, const AffineSolution& aff,
                          std::size_t i0, const SimOptions& opts, double K)
{
    if (i0 >= spec.num_regimes()) throw OutOfRange("initial regime out of range");
    const std::size_t D = spec.num_regimes();
    const std::size_t nodes = spec.grid.nodes();
    const Index n = spec.n;

    // Uncoupled driver at nodes.
    VecTable F(D, std::vector<Vec>(nodes));
    for (std::size_t i = 0; i < D; ++i) {
        for (std::size_t k = 0; k < nodes; ++k) {
            const auto co = coeff_at_node(spec, k, i);
            const Mat& P = ric.P[i][k].mat();
            const Vec& eta = aff.eta[i][k];
            F[i][k] = co.A.transpose() * eta + co.C.transpose() * (P * co.sigma) + P * co.b + co.q -
                      ric.S_hat[i][k].transpose() * (ric.R_hat_pinv[i][k] * aff.rho_hat[i][k]);
        }
    }

    const double h = spec.grid.h();
    const std::size_t N = spec.grid.steps;
    const auto samples = map_paths<Vec>(spec, opts, [&](std::size_t p) {
        const auto s = path_seeds(opts.seed, p);
        const auto chain = simulate_chain(spec.gen, spec.grid, i0, s.chain);
        Vec acc = Vec::Zero(n);
        for (std::size_t k = 0; k < N; ++k) {
            const std::size_t r = chain.regime[k];
            acc += F[r][k] + F[r][k + 1];
        }
        return Vec(0.5 * h * acc + spec.regimes[chain.regime[N]].g);
    });

    Mat mean(n, 1), se(n, 1);
    std::vector<double> column(opts.paths);
    for (Index j = 0; j < n; ++j) {
        for (std::size_t p = 0; p < opts.paths; ++p) column[p] = samples[p](j);
        const auto est = summarize(column, opts.seed);
        mean(j, 0) = est.mean;
        se(j, 0) = est.std_error;
    }
    return compare(mean, se, Mat(aff.eta[i0][0]), spec.grid, K);
}

SquaresResult completion_of_squares(const ProblemSpec& spec, const RiccatiSolution& ric, const AffineSolution& aff,
                                    std::size_t i0, const Vec& x0, const ControlPath& u)
{
    if (!is_deterministic(spec)) throw InvalidInput("completion_of_squares: instance has noise or jumps");
    const auto chain = simulate_chain(spec.gen, spec.grid, i0, 0);
    const std::vector<double> dW(spec.grid.steps, 0.0);
    const auto law = optimal_feedback(ric, aff);
    const auto opt = simulate_feedback(spec, chain, law, x0, dW);
    const auto path = simulate_state(spec, chain, u, x0, dW);

    SquaresResult res;
    res.gap = evaluate_cost(spec, chain, path) - evaluate_cost(spec, chain, opt);
    double q = 0.0;
    for (std::size_t k = 0; k < spec.grid.steps; ++k) {
        const std::size_t r = chain.regime[k];
        const auto c = static_cast<Index>(k);
        const Vec dev = path.u.col(c) - ric.Theta[r][k] * path.X.col(c) - aff.v_star[r][k];
        q += dev.dot(ric.R_hat[r][k].mat() * dev);
    }
    res.quadrature = spec.grid.h() * q;
    return res;
}

VerificationReport run_verification(const ProblemSpec& spec, const VerifyOptions& opts)
{
    require_valid(spec);
    if (opts.i0 >= spec.num_regimes()) throw OutOfRange("initial regime out of range");
    const Vec x0 = opts.x0.size() == 0 ? Vec::Ones(spec.n) : opts.x0;
    if (x0.size() != spec.n) throw InvalidInput("initial state has wrong dimension");

    VerificationReport report;
    report.bias_constant = bias_constant();
    report.steps = spec.grid.steps;
    const double K = report.bias_constant;
    const auto& sim = opts.sim;
    const double h = spec.grid.h();

    const RiccatiSolution ric = opts.iterate ? iterate_strongly_regular(spec, opts.iteration, opts.regularity)
                                             : solve_riccati_direct(spec, opts.regularity);
    report.classification = ric.classification.name();
    report.add(check("riccati_regular", ric.classification.min_eig_R_hat, ">=", -opts.regularity.psd_tol, 0, 0));
    report.checks.back().pass = ric.classification.is_regular();

    if (ric.classification.is_regular()) {
        const auto aff = solve_eta(spec, ric);
        report.add(check("rho_hat_range", aff.closed_loop_valid ? 0.0 : 1.0, "<=", 0.0, 0, 0));

        if (aff.closed_loop_valid) {
            const auto law = optimal_feedback(ric, aff);
            const auto seeds = path_seeds(sim.seed, 0);
            const auto chain = simulate_chain(spec.gen, spec.grid, opts.i0, seeds.chain);
            const auto path = simulate_feedback(spec, chain, law, x0, brownian_increments(spec.grid, seeds.noise));
            report.add(check("stationarity_residual", max_norm(stationarity_residual(spec, ric, aff, chain, path)),
                             "<=", 1e-6 + 10.0 * h, 1, sim.seed));

            const auto vc = value_consistency(spec, ric, aff, opts.i0, x0, sim, opts.perturbations, K);
            report.add(check("value_consistency", std::abs(vc.mc.mean - vc.value), "<=", vc.tolerance, sim.paths,
                             sim.seed));
            for (std::size_t k = 0; k < vc.perturbations.size(); ++k) {
                const auto& g = vc.perturbations[k].gap;
                report.add(check("perturbation_gap_" + std::to_string(k), g.mean, ">=", -3.0 * g.std_error,
                                 sim.paths, sim.seed));
            }

            FrechetOptions fo;
            fo.sim = sim;
            const auto v = random_unit_control(spec, stream_seed(sim.seed, 0, kDirectionStream));
            const auto fr = frechet_gradient_check(spec, opts.i0, x0, closed_loop_outcome(spec, law, x0), v, fo);
            double scale = 1.0;
            for (double c : fr.mean_cost) scale = std::max(scale, std::abs(c));
            report.add(check("frechet_fit_residual", fr.fit_residual, "<=", 1e-10 * scale, sim.paths, sim.seed));
            report.add(check("frechet_quadratic_vs_J0", std::abs(fr.quadratic_gap.mean), "<=",
                             3.0 * fr.quadratic_gap.std_error + 1e-6 * std::max(1.0, std::abs(fr.j0_v.mean)),
                             sim.paths, sim.seed));
            report.add(check("frechet_tangent_vs_linear", std::abs(fr.tangent.mean - fr.linear.mean), "<=",
                             1e-8 * std::max(1.0, std::abs(fr.linear.mean)) + 1e-8 * scale, sim.paths, sim.seed));
            report.add(check("frechet_centered_difference", fr.fd_gap, "<=", 1e-8 * scale, sim.paths, sim.seed));
            report.add(check("frechet_linear_at_optimum", std::abs(fr.linear.mean), "<=",
                             3.0 * fr.linear.std_error + bias_budget(spec.grid, fr.constant.mean, K), sim.paths,
                             sim.seed));

            const auto eta = eta_bsde_check(spec, ric, aff, opts.i0, sim, K);
            report.add(check("eta_bsde", eta.max_abs_diff, "<=", eta.worst_allowance, sim.paths, sim.seed));
            report.checks.back().pass = eta.pass;
        }
    }

    const auto m0 = m0_crosscheck(spec, opts.i0, sim, K);
    report.add(check("m0_feynman_kac", m0.max_abs_diff, "<=", m0.worst_allowance, sim.paths, sim.seed));
    report.checks.back().pass = m0.pass;

    const auto cv = convexity_probe(spec, opts.i0, opts.convexity_controls, sim);
    const auto& worst = cv.ratios[cv.argmin];
    report.add(check("convexity_eps_hat", cv.eps_hat, ">=", -3.0 * worst.std_error, sim.paths, sim.seed));
    report.checks.back().pass = !cv.flagged;
    return report;
}

}  // namespace rslq
