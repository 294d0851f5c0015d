#include "rslq/sim.hpp"

#include "rslq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace rslq {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t kChainStream = 0;
constexpr std::uint64_t kNoiseStream = 1;

// Adds int_{s1}^{s2} lambda_{state,j}(s) ds for j != state; rates are linear
// in s on the cell, so the trapezoid rule is exact.
void accumulate_compensator(std::vector<double>& acc, const Mat& L0, const Mat& L1, double a, double h,
                            std::size_t state, double s1, double s2)
{
    if (s2 <= s1) return;
    const double w1 = (s1 - a) / h;
    const double w2 = (s2 - a) / h;
    const auto row = static_cast<Index>(state);
    for (Index j = 0; j < L0.cols(); ++j) {
        if (j == row) continue;
        const double l1 = (1.0 - w1) * L0(row, j) + w1 * L1(row, j);
        const double l2 = (1.0 - w2) * L0(row, j) + w2 * L1(row, j);
        acc[static_cast<std::size_t>(j)] += 0.5 * (s2 - s1) * (l1 + l2);
    }
}

void check_initial(const ProblemSpec& spec, std::size_t i0, const Vec& x0)
{
    if (i0 >= spec.num_regimes()) throw OutOfRange("initial regime out of range");
    if (x0.size() != spec.n) throw InvalidInput("initial state has wrong dimension");
    require_finite(x0, "initial state");
}

// Euler-Maruyama driver; control(k, x, regime, u) writes the control u_k.
template <class Control>
StatePath euler(const ProblemSpec& spec, const ChainPath& chain, const Vec& x0, std::vector<double> dW,
                Control&& control)
{
    const auto& grid = spec.grid;
    const std::size_t N = grid.steps;
    if (chain.regime.size() != grid.nodes()) throw InvalidInput("chain path does not match the grid");
    if (dW.size() != N) throw InvalidInput("Brownian increments do not match the grid");
    if (x0.size() != spec.n) throw InvalidInput("initial state has wrong dimension");

    const double h = grid.h();
    const auto cols = static_cast<Index>(N + 1);
    StatePath path;
    path.X.resize(spec.n, cols);
    path.u.resize(spec.m, cols);
    path.X.col(0) = x0;
    Vec drift(spec.n);
    Vec diffusion(spec.n);
    for (std::size_t k = 0; k < N; ++k) {
        const auto c = static_cast<Index>(k);
        const std::size_t r = chain.regime[k];
        const auto& rc = spec.regimes[r];
        control(k, path.X.col(c), r, path.u.col(c));
        const auto x = path.X.col(c);
        const auto u = path.u.col(c);

        drift.noalias() = rc.A.at_node(k).lazyProduct(x);
        drift.noalias() += rc.B.at_node(k).lazyProduct(u);
        drift += rc.b.at_node(k);
        diffusion.noalias() = rc.C.at_node(k).lazyProduct(x);
        diffusion.noalias() += rc.D.at_node(k).lazyProduct(u);
        diffusion += rc.sigma.at_node(k);

        path.X.col(c + 1) = x + h * drift + dW[k] * diffusion;
    }
    control(N, path.X.col(cols - 1), chain.regime[N], path.u.col(cols - 1));
    if (!path.X.allFinite()) throw DivergenceError(N, grid.T, "state path is not finite");
    path.dW = std::move(dW);
    return path;
}

struct CostWork {
    Vec tn;
    Vec tm;
};

// <Qx + 2q, x> + 2<Sx, u> + <Ru + 2rho, u> at node j.
template <class X, class U>
double running_cost(const RegimeCoeffs& rc, std::size_t j, const X& x, const U& u, CostWork& w)
{
    w.tn.noalias() = rc.Q.at_node(j).lazyProduct(x);
    double f = x.dot(w.tn) + 2.0 * x.dot(rc.q.at_node(j));
    w.tm.noalias() = rc.S.at_node(j).lazyProduct(x);
    f += 2.0 * u.dot(w.tm);
    w.tm.noalias() = rc.R.at_node(j).lazyProduct(u);
    return f + u.dot(w.tm) + 2.0 * u.dot(rc.rho.at_node(j));
}

}  // namespace

bool is_deterministic(const ProblemSpec& spec)
{
    auto zero = [](const auto& series) {
        for (const auto& v : series.samples()) {
            if (!v.isZero(0.0)) return false;
        }
        return true;
    };
    if (!zero(spec.gen.rates)) return false;
    for (const auto& rc : spec.regimes) {
        if (!zero(rc.C) || !zero(rc.D) || !zero(rc.sigma)) return false;
    }
    return true;
}

FeedbackLaw optimal_feedback(const RiccatiSolution& ric, const AffineSolution& aff)
{
    if (ric.regimes() != aff.regimes() || !(ric.grid == aff.grid)) {
        throw InvalidInput("optimal_feedback: Riccati and affine solutions do not match");
    }
    if (!aff.closed_loop_valid) throw InvalidInput("optimal_feedback: " + aff.range_violation);
    return FeedbackLaw{ric.Theta, aff.v_star};
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ path) ^ (stream + 0x632BE59BD9B4E019ULL));
}

PathSeeds path_seeds(std::uint64_t seed, std::size_t path)
{
    return PathSeeds{stream_seed(seed, path, kChainStream), stream_seed(seed, path, kNoiseStream)};
}

std::vector<double> brownian_increments(const TimeGrid& grid, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(grid.h()));
    std::vector<double> dW(grid.steps);
    for (auto& w : dW) w = normal(rng);
    return dW;
}

ChainPath simulate_chain(const Generator& gen, const TimeGrid& grid, std::size_t i0, std::uint64_t seed)
{
    const std::size_t D = gen.regimes();
    if (i0 >= D) throw OutOfRange("initial regime out of range");
    const std::size_t N = grid.steps;
    const double h = grid.h();

    ChainPath path;
    path.regime.resize(N + 1);
    path.jump_counts.assign(D, std::vector<int>(N + 1, 0));
    path.compensator.assign(D, std::vector<double>(N + 1, 0.0));
    path.regime[0] = i0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<int> counts(D, 0);
    std::vector<double> comp(D, 0.0);
    std::size_t state = i0;

    for (std::size_t k = 0; k < N; ++k) {
        const Mat& L0 = gen.at_node(k);
        const Mat& L1 = gen.at_node(k + 1);
        const double a = grid.node(k);
        const double b = grid.node(k + 1);
        double bound = 0.0;
        for (Index i = 0; i < L0.rows(); ++i) bound = std::max({bound, std::abs(L0(i, i)), std::abs(L1(i, i))});

        double seg = a;
        if (bound > 0.0) {
            std::exponential_distribution<double> wait(bound);
            double s = a;
            for (;;) {
                s += wait(rng);
                if (s >= b) break;
                const double w = (s - a) / h;
                const auto row = static_cast<Index>(state);
                const double out = -((1.0 - w) * L0(row, row) + w * L1(row, row));
                const double pick = uniform(rng) * bound;
                if (pick >= out) continue;  // rejected candidate
                double cum = 0.0;
                std::size_t target = state;
                for (Index j = 0; j < L0.cols(); ++j) {
                    if (j == row) continue;
                    cum += (1.0 - w) * L0(row, j) + w * L1(row, j);
                    target = static_cast<std::size_t>(j);
                    if (pick < cum) break;
                }
                accumulate_compensator(comp, L0, L1, a, h, state, seg, s);
                path.jumps.push_back(JumpRecord{s, state, target});
                ++counts[target];
                state = target;
                seg = s;
            }
        }
        accumulate_compensator(comp, L0, L1, a, h, state, seg, b);
        path.regime[k + 1] = state;
        for (std::size_t j = 0; j < D; ++j) {
            path.jump_counts[j][k + 1] = counts[j];
            path.compensator[j][k + 1] = comp[j];
        }
    }
    return path;
}

StatePath simulate_state(const ProblemSpec& spec, const ChainPath& chain, const ControlPath& u, const Vec& x0,
                         std::uint64_t seed)
{
    return simulate_state(spec, chain, u, x0, brownian_increments(spec.grid, seed));
}

StatePath simulate_state(const ProblemSpec& spec, const ChainPath& chain, const ControlPath& u, const Vec& x0,
                         std::vector<double> dW)
{
    if (u.rows() != spec.m || u.cols() != static_cast<Index>(spec.grid.nodes())) {
        throw InvalidInput("control path must be m x (steps + 1)");
    }
    return euler(spec, chain, x0, std::move(dW),
                 [&](std::size_t k, const auto&, std::size_t, auto out) { out = u.col(static_cast<Index>(k)); });
}

StatePath simulate_feedback(const ProblemSpec& spec, const ChainPath& chain, const FeedbackLaw& law, const Vec& x0,
                            std::vector<double> dW)
{
    if (law.Theta.size() != spec.num_regimes() || law.v.size() != spec.num_regimes()) {
        throw InvalidInput("feedback law does not match the number of regimes");
    }
    for (std::size_t i = 0; i < spec.num_regimes(); ++i) {
        if (law.Theta[i].size() != spec.grid.nodes() || law.v[i].size() != spec.grid.nodes()) {
            throw InvalidInput("feedback law does not match the grid");
        }
    }
    return euler(spec, chain, x0, std::move(dW), [&](std::size_t k, const auto& x, std::size_t r, auto out) {
        out.noalias() = law.Theta[r][k].lazyProduct(x);
        out += law.v[r][k];
    });
}

StatePath simulate_closed_loop(const ProblemSpec& spec, const RiccatiSolution& ric, const AffineSolution& aff,
                               std::size_t i0, const Vec& x0, std::uint64_t seed)
{
    check_initial(spec, i0, x0);
    const auto law = optimal_feedback(ric, aff);
    const auto seeds = path_seeds(seed, 0);
    const auto chain = simulate_chain(spec.gen, spec.grid, i0, seeds.chain);
    return simulate_feedback(spec, chain, law, x0, brownian_increments(spec.grid, seeds.noise));
}

double evaluate_cost(const ProblemSpec& spec, const ChainPath& chain, const StatePath& path)
{
    const std::size_t N = spec.grid.steps;
    const auto cols = static_cast<Index>(N + 1);
    if (path.X.cols() != cols || path.u.cols() != cols || chain.regime.size() != N + 1) {
        throw InvalidInput("evaluate_cost: path does not match the grid");
    }
    const double h = spec.grid.h();
    CostWork w{Vec(spec.n), Vec(spec.m)};
    double running = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const auto c = static_cast<Index>(k);
        const auto& rc = spec.regimes[chain.regime[k]];
        const auto u = path.u.col(c);
        running += running_cost(rc, k, path.X.col(c), u, w) + running_cost(rc, k + 1, path.X.col(c + 1), u, w);
    }
    const auto& rc = spec.regimes[chain.regime[N]];
    const auto x = path.X.col(cols - 1);
    w.tn.noalias() = rc.G * x;
    return 0.5 * h * running + x.dot(w.tn) + 2.0 * x.dot(rc.g);
}

MCEstimate summarize(const std::vector<double>& samples, std::uint64_t seed)
{
    MCEstimate est;
    est.paths = samples.size();
    est.seed = seed;
    if (samples.empty()) {
        est.mean = std::numeric_limits<double>::quiet_NaN();
        est.std_error = std::numeric_limits<double>::quiet_NaN();
        return est;
    }
    // Shift by the first sample so constant data give an exact mean and zero error.
    const double shift = samples.front();
    double sum = 0.0;
    for (double x : samples) sum += x - shift;
    const double n = static_cast<double>(samples.size());
    est.mean = shift + sum / n;
    if (samples.size() < 2) {
        est.std_error = 0.0;
        return est;
    }
    const double centered = sum / n;
    double ss = 0.0;
    for (double x : samples) {
        const double d = (x - shift) - centered;
        ss += d * d;
    }
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
    return est;
}

std::vector<double> feedback_costs(const ProblemSpec& spec, const FeedbackLaw& law, std::size_t i0, const Vec& x0,
                                   const SimOptions& opts)
{
    check_initial(spec, i0, x0);
    return map_paths<double>(spec, opts, [&](std::size_t p) {
        const auto seeds = path_seeds(opts.seed, p);
        const auto chain = simulate_chain(spec.gen, spec.grid, i0, seeds.chain);
        const auto path = simulate_feedback(spec, chain, law, x0, brownian_increments(spec.grid, seeds.noise));
        return evaluate_cost(spec, chain, path);
    });
}

MCEstimate mc_value(const ProblemSpec& spec, const RiccatiSolution& ric, const AffineSolution& aff, std::size_t i0,
                    const Vec& x0, const SimOptions& opts)
{
    return summarize(feedback_costs(spec, optimal_feedback(ric, aff), i0, x0, opts), opts.seed);
}

M0Estimate feynman_kac_M0(const ProblemSpec& spec, std::size_t i0, const SimOptions& opts)
{
    require_valid(spec);
    if (i0 >= spec.num_regimes()) throw OutOfRange("initial regime out of range");
    const auto& grid = spec.grid;
    const std::size_t N = grid.steps;
    const double h = grid.h();
    const Index n = spec.n;

    const auto samples = map_paths<Mat>(spec, opts, [&](std::size_t p) {
        const auto seeds = path_seeds(opts.seed, p);
        const auto chain = simulate_chain(spec.gen, grid, i0, seeds.chain);
        const auto dW = brownian_increments(grid, seeds.noise);
        Mat phi = Mat::Identity(n, n);
        Mat next(n, n);
        Mat acc = Mat::Zero(n, n);
        for (std::size_t k = 0; k < N; ++k) {
            const auto& rc = spec.regimes[chain.regime[k]];
            const Mat& A = rc.A.at_node(k);
            const Mat& C = rc.C.at_node(k);
            next.noalias() = phi + h * (A * phi) + dW[k] * (C * phi);
            acc.noalias() += phi.transpose() * rc.Q.at_node(k) * phi;
            acc.noalias() += next.transpose() * rc.Q.at_node(k + 1) * next;
            phi.swap(next);
        }
        Mat value = 0.5 * h * acc;
        value.noalias() += phi.transpose() * spec.regimes[chain.regime[N]].G * phi;
        return Mat(0.5 * (value + value.transpose()));
    });

    M0Estimate est;
    est.paths = opts.paths;
    est.seed = opts.seed;
    Mat mean = Mat::Zero(n, n);
    est.std_error = Mat::Zero(n, n);
    std::vector<double> entry(opts.paths);
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < n; ++c) {
            for (std::size_t p = 0; p < opts.paths; ++p) entry[p] = samples[p](r, c);
            const auto s = summarize(entry, opts.seed);
            mean(r, c) = s.mean;
            est.std_error(r, c) = s.std_error;
        }
    }
    est.mean = SymMat(mean);
    return est;
}

void write_path_csv(std::ostream& os, const ProblemSpec& spec, const ChainPath& chain, const StatePath& path)
{
    const auto& grid = spec.grid;
    if (path.X.cols() != static_cast<Index>(grid.nodes()) || chain.regime.size() != grid.nodes()) {
        throw InvalidInput("write_path_csv: path does not match the grid");
    }
    os << "t,regime";
    for (Index i = 0; i < spec.n; ++i) os << ",X_" << i;
    for (Index j = 0; j < spec.m; ++j) os << ",u_" << j;
    os << '\n';
    os << std::setprecision(17);
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        os << grid.node(k) << ',' << chain.regime[k];
        const auto c = static_cast<Index>(k);
        for (Index i = 0; i < spec.n; ++i) os << ',' << path.X(i, c);
        for (Index j = 0; j < spec.m; ++j) os << ',' << path.u(j, c);
        os << '\n';
    }
}

}  // namespace rslq
