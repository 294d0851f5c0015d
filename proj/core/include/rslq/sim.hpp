#pragma once

#include "rslq/affine.hpp"
#include "rslq/matcore.hpp"
#include "rslq/model.hpp"
#include "rslq/parallel.hpp"
#include "rslq/riccati.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace rslq {

struct JumpRecord {
    double time;
    std::size_t from;
    std::size_t to;
};

/// One realization of the regime chain on the grid.
///
/// regime[k] is alpha(t_k) (right-continuous). Jumps are sampled at their exact
/// times inside each cell, but the state integrator only sees the regime at
/// the left node of each cell. jump_counts[j][k] = N_j(t_k) counts jumps into
/// j; compensator[j][k] = int_{t0}^{t_k} lambda_{alpha(s-), j} 1{alpha(s-) != j} ds.
struct ChainPath {
    std::vector<std::size_t> regime;
    std::vector<JumpRecord> jumps;
    std::vector<std::vector<int>> jump_counts;
    std::vector<std::vector<double>> compensator;

    std::size_t total_jumps() const { return jumps.size(); }
};

/// Control samples, one column per node (m x (N+1)). Column k is held on the
/// cell [t_k, t_{k+1}); the last column is recorded but does not enter
/// dynamics or cost.
using ControlPath = Mat;

struct StatePath {
    Mat X;                   // n x (N+1), column k is X(t_k)
    ControlPath u;           // m x (N+1)
    std::vector<double> dW;  // Brownian increments, one per cell
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
};

/// Time-varying affine feedback u = Theta(t, i) x + v(t, i) on nodes.
struct FeedbackLaw {
    MatTable Theta;  // [regime][node], m x n
    VecTable v;      // [regime][node], m
};

FeedbackLaw optimal_feedback(const RiccatiSolution& ric, const AffineSolution& aff);

struct SimOptions {
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    std::size_t threads = 0;  // 0: hardware concurrency
};

/// No Brownian forcing (C = D = 0, sigma = 0) and a zero generator, so every
/// Monte-Carlo path is the same.
bool is_deterministic(const ProblemSpec& spec);

/// Independent, reproducible stream seed for (seed, path, stream).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream);

/// Seeds of the chain and Brownian streams of one Monte-Carlo path. Two runs
/// that share `seed` see identical draws path by path (common random numbers).
struct PathSeeds {
    std::uint64_t chain;
    std::uint64_t noise;
};
PathSeeds path_seeds(std::uint64_t seed, std::size_t path);

/// N(0, h) increments for every cell of the grid.
std::vector<double> brownian_increments(const TimeGrid& grid, std::uint64_t seed);

/// Thinning with a per-cell dominating rate max_i |lambda_ii| over the cell ends.
ChainPath simulate_chain(const Generator& gen, const TimeGrid& grid, std::size_t i0, std::uint64_t seed);

/// Euler-Maruyama of dX = (AX + Bu + b)ds + (CX + Du + sigma)dW.
StatePath simulate_state(const ProblemSpec& spec, const ChainPath& chain, const ControlPath& u, const Vec& x0,
                         std::uint64_t seed);
StatePath simulate_state(const ProblemSpec& spec, const ChainPath& chain, const ControlPath& u, const Vec& x0,
                         std::vector<double> dW);

/// Same integrator with u_k = Theta(t_k, alpha_k) X_k + v(t_k, alpha_k).
StatePath simulate_feedback(const ProblemSpec& spec, const ChainPath& chain, const FeedbackLaw& law, const Vec& x0,
                            std::vector<double> dW);

/// Closed-loop optimal path; chain and noise drawn from path_seeds(seed, 0).
StatePath simulate_closed_loop(const ProblemSpec& spec, const RiccatiSolution& ric, const AffineSolution& aff,
                               std::size_t i0, const Vec& x0, std::uint64_t seed);

/// Terminal term plus trapezoidal quadrature of the running cost, with the
/// regime and control held constant on each cell.
double evaluate_cost(const ProblemSpec& spec, const ChainPath& chain, const StatePath& path);

/// fn(p) for every path p; a deterministic problem evaluates path 0 only and
/// copies the result.
template <class T, class Fn>
std::vector<T> map_paths(const ProblemSpec& spec, const SimOptions& opts, Fn&& fn)
{
    if (opts.paths > 0 && is_deterministic(spec)) return std::vector<T>(opts.paths, fn(std::size_t{0}));
    std::vector<T> out(opts.paths);
    parallel_for(opts.paths, opts.threads, [&](std::size_t p) { out[p] = fn(p); });
    return out;
}

/// Sample mean and standard error; identical samples give an exact zero error.
MCEstimate summarize(const std::vector<double>& samples, std::uint64_t seed);

/// Per-path costs of a feedback law (path order, independent of thread count).
std::vector<double> feedback_costs(const ProblemSpec& spec, const FeedbackLaw& law, std::size_t i0, const Vec& x0,
                                   const SimOptions& opts);

/// Monte-Carlo cost of the closed-loop optimal law.
MCEstimate mc_value(const ProblemSpec& spec, const RiccatiSolution& ric, const AffineSolution& aff,
                    std::size_t i0, const Vec& x0, const SimOptions& opts);

struct M0Estimate {
    SymMat mean;
    Mat std_error;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
};

/// E[Phi(T)^T G Phi(T) + int Phi^T Q Phi ds] with dPhi = A Phi ds + C Phi dW,
/// Phi(t0) = I.
M0Estimate feynman_kac_M0(const ProblemSpec& spec, std::size_t i0, const SimOptions& opts);

/// CSV dump: t, regime, X components, u components.
void write_path_csv(std::ostream& os, const ProblemSpec& spec, const ChainPath& chain, const StatePath& path);

}  // namespace rslq
