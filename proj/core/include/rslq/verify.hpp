#pragma once

#include "rslq/affine.hpp"
#include "rslq/matcore.hpp"
#include "rslq/model.hpp"
#include "rslq/riccati.hpp"
#include "rslq/sim.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rslq {

struct CheckResult {
    std::string name;
    double statistic = 0.0;
    std::string relation = "<=";  // statistic <relation> tolerance is required
    double tolerance = 0.0;
    bool pass = false;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    double bias_constant = 0.0;
    std::size_t steps = 0;
    std::string classification;

    void add(CheckResult c) { checks.push_back(std::move(c)); }
    bool all_passed() const;

    /// Columns: check, statistic, relation, tolerance, pass, paths, seed.
    void write_csv(std::ostream& os) const;
    void write_text(std::ostream& os) const;
};

/// Discretization-bias constant K of the budget K * h * max(1, |reference|).
///
/// Calibrated on dX = a X ds + c X dW, cost X(T)^2 with a = c = 0.5 on [0, 1],
/// where both the exact value e^{(2a + c^2)T} and the exact Euler expectation
/// (1 + (2a + c^2)h + a^2 h^2)^N are known; the largest observed |bias| / h over
/// a few grids is doubled.
double bias_constant();
double bias_budget(const TimeGrid& grid, double reference, double K);

// ---- stationarity ----------------------------------------------------------

/// B^T Y + D^T Z + S X + R u + rho at every node of a path, with
/// Y = P X + eta and Z = P (C X + D u + sigma) evaluated in the node's regime.
std::vector<Vec> stationarity_residual(const ProblemSpec& spec, const RiccatiSolution& ric,
                                       const AffineSolution& aff, const ChainPath& chain, const StatePath& path);

double max_norm(const std::vector<Vec>& values);

// ---- Frechet expansion -------------------------------------------------------

/// Produces the open-loop control of one path from that path's random draws.
using ControlSource = std::function<ControlPath(const ChainPath&, const std::vector<double>&)>;

ControlSource fixed_control(ControlPath u);

/// The closed-loop outcome u*(t_k) = Theta X*(t_k) + v along the same draws.
ControlSource closed_loop_outcome(const ProblemSpec& spec, FeedbackLaw law, Vec x0);

/// Linear part of the cost when (X, u) is perturbed by (y, w): the bilinear
/// form of the quadratic weights plus the affine weights, with the same
/// quadrature as evaluate_cost.
double cost_differential(const ProblemSpec& spec, const ChainPath& chain, const StatePath& base,
                         const StatePath& direction);

struct FrechetOptions {
    std::vector<double> epsilons{-1.0, -0.5, -0.25, 0.25, 0.5, 1.0};
    SimOptions sim;
};

struct FrechetResult {
    std::vector<double> epsilons;   // sorted, includes 0
    std::vector<double> mean_cost;  // mean J(u + eps v)
    MCEstimate constant;            // fitted coefficients of c0 + c1 eps + c2 eps^2
    MCEstimate linear;
    MCEstimate quadratic;
    double fit_residual = 0.0;      // max |mean J(eps) - fit(eps)|
    MCEstimate j0_v;                // J^0(t, 0, i; v), homogeneous cost from 0
    MCEstimate quadratic_gap;       // paired c2 - J^0 per path
    MCEstimate tangent;             // cost_differential along (X^u, u) and (X^0_v, v)
    double fd_gap = 0.0;            // max |(J(e) - J(-e)) / 2e - c1| over symmetric pairs
};

FrechetResult frechet_gradient_check(const ProblemSpec& spec, std::size_t i0, const Vec& x0, const ControlSource& u,
                                     const ControlPath& v, const FrechetOptions& opts);

// ---- convexity -------------------------------------------------------------

/// Gaussian node samples rescaled to h * sum_{k<N} |u_k|^2 = 1.
ControlPath random_unit_control(const ProblemSpec& spec, std::uint64_t seed);
double control_l2_squared(const TimeGrid& grid, const ControlPath& u);

/// Monte-Carlo J^0(t, 0, i; u).
MCEstimate homogeneous_cost(const ProblemSpec& spec, std::size_t i0, const ControlPath& u, const SimOptions& opts);

struct ConvexityResult {
    std::vector<MCEstimate> ratios;  // J^0(u) / int |u|^2 per probe control
    double eps_hat = 0.0;
    std::size_t argmin = 0;
    bool flagged = false;  // some ratio negative beyond 3 SE
};

ConvexityResult convexity_probe(const ProblemSpec& spec, std::size_t i0, std::size_t n_controls,
                                const SimOptions& opts);

// ---- value consistency ---------------------------------------------------------

FeedbackLaw perturbed_law(const FeedbackLaw& law, const Mat& dTheta, const Vec& dv);

/// Paired per-path cost difference J(other) - J(base) under common draws.
MCEstimate paired_cost_gap(const ProblemSpec& spec, const FeedbackLaw& base, const FeedbackLaw& other, std::size_t i0,
                           const Vec& x0, const SimOptions& opts);

struct PerturbationResult {
    Mat dTheta;
    Vec dv;
    MCEstimate gap;
    bool pass = false;  // gap >= -3 SE
};

struct ValueConsistencyResult {
    MCEstimate mc;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<PerturbationResult> perturbations;
};

/// Perturbations are constant in time and regime, entrywise uniform on
/// [-0.5, 0.5] scaled by max ||Theta*||_F and max |v*| respectively.
ValueConsistencyResult value_consistency(const ProblemSpec& spec, const RiccatiSolution& ric,
                                         const AffineSolution& aff, std::size_t i0, const Vec& x0,
                                         const SimOptions& opts, std::size_t n_perturbations, double K);

// ---- Feynman-Kac and BSDE cross-checks -------------------------------------------

struct CrossCheck {
    Mat estimate;
    Mat std_error;
    Mat reference;
    Mat allowance;            // 3 SE + bias budget per entry
    double max_abs_diff = 0.0;
    double worst_allowance = 0.0;  // allowance of the entry with the largest excess
    bool pass = false;
};

CrossCheck m0_crosscheck(const ProblemSpec& spec, std::size_t i0, const SimOptions& opts, double K);

/// eta(t0, i0) against E[g(alpha(T)) + int F(s, alpha(s)) ds], where F is the
/// eta driver without the chain coupling term.
CrossCheck eta_bsde_check(const ProblemSpec& spec, const RiccatiSolution& ric, const AffineSolution& aff,
                          std::size_t i0, const SimOptions& opts, double K);

// ---- completion of squares ---------------------------------------------------------

struct SquaresResult {
    double gap = 0.0;         // J(u) - J(u*)
    double quadrature = 0.0;  // h sum <R_hat (u - Theta X - v), (u - Theta X - v)>
};

/// Deterministic instances only.
SquaresResult completion_of_squares(const ProblemSpec& spec, const RiccatiSolution& ric, const AffineSolution& aff,
                                    std::size_t i0, const Vec& x0, const ControlPath& u);

// ---- suite -------------------------------------------------------------------------

struct VerifyOptions {
    RegularityOptions regularity;
    bool iterate = false;
    IterationOptions iteration;
    SimOptions sim;
    std::size_t i0 = 0;
    Vec x0;  // empty: ones
    std::size_t perturbations = 5;
    std::size_t convexity_controls = 20;
};

/// Runs every applicable check. Solution-dependent checks are skipped when the
/// Riccati solution is not regular; the classification check then fails.
VerificationReport run_verification(const ProblemSpec& spec, const VerifyOptions& opts);

}  // namespace rslq
