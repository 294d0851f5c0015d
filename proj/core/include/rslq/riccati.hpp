#pragma once

#include "rslq/matcore.hpp"
#include "rslq/model.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rslq {

/// Entries beyond this magnitude abort backward integration.
inline constexpr double kBlowUpThreshold = 1e12;

/// Non-finite or exploding values during backward integration.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t node, double time, const std::string& what);
    std::size_t node() const { return node_; }
    double time() const { return time_; }

private:
    std::size_t node_;
    double time_;
};

/// The Lyapunov iteration met an R_hat that is not positive definite.
class NotStronglyRegularError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(std::size_t iterations, double last_delta);
    double last_delta() const { return last_delta_; }

private:
    double last_delta_;
};

struct RegularityOptions {
    double pinv_tol = kDefaultPinvTol;
    double strong_tol = 1e-8;  // lower bound required of min eig(R_hat)
    double psd_tol = 1e-8;     // R_hat >= -psd_tol accepted as semidefinite
    double range_tol = kDefaultRangeTol;
};

enum class Regularity { strongly_regular, regular, not_regular };

struct Classification {
    Regularity kind = Regularity::not_regular;
    double min_eig_R_hat = 0.0;  // over every node and regime
    std::string reason;          // first violated condition when not_regular
    std::size_t node = 0;
    std::size_t regime = 0;
    RegularityOptions tolerances;

    bool is_regular() const { return kind != Regularity::not_regular; }
    std::string name() const;
    std::string describe() const;
};

/// [regime][node] tables.
using SymTable = std::vector<std::vector<SymMat>>;
using MatTable = std::vector<std::vector<Mat>>;

/// Feedback gain Theta(t, regime), m x n.
using GainFn = std::function<Mat(double, std::size_t)>;

struct LyapunovSolution {
    TimeGrid grid;
    SymTable P;
    SymTable P_dot;  // time derivative at nodes

    std::size_t regimes() const { return P.size(); }
    /// Cubic Hermite interpolation from node values and derivatives.
    SymMat P_at(double t, std::size_t regime) const;
};

struct RiccatiSolution {
    TimeGrid grid;
    SymTable P;
    SymTable P_dot;
    MatTable S_hat;
    SymTable R_hat;
    MatTable R_hat_pinv;
    MatTable Theta;  // -R_hat^+ S_hat
    std::vector<std::vector<double>> min_eig_R_hat;
    Classification classification;

    // Filled by iterate_strongly_regular only.
    std::vector<double> iteration_trace;     // sup-norm |P_{n+1} - P_n| per iteration
    std::vector<double> monotonicity_trace;  // min eig(P_n - P_{n+1}) per iteration

    std::size_t regimes() const { return P.size(); }
    SymMat P_at(double t, std::size_t regime) const;
};

/// dP/dt of the Lyapunov equation for a frozen gain.
SymMat lyapunov_rhs(const CoeffAt& co, const std::vector<SymMat>& p_all, std::size_t regime,
                    const Vec& lambda_row, const Mat& theta);

/// dP/dt of the regime-switching Riccati equation; R_hat^+ via pinv.
SymMat riccati_rhs(const CoeffAt& co, const std::vector<SymMat>& p_all, std::size_t regime,
                   const Vec& lambda_row, double pinv_tol = kDefaultPinvTol);

/// Backward RK4 of the coupled Lyapunov system, P(T,i) = G(i).
LyapunovSolution solve_lyapunov(const ProblemSpec& spec, const GainFn& theta);

/// Gains sampled at nodes ([regime][node], m x n), piecewise-linear in between.
LyapunovSolution solve_lyapunov(const ProblemSpec& spec, const MatTable& theta);

/// Theta == 0: the Feynman-Kac moment equation of the uncontrolled state.
LyapunovSolution solve_lyapunov_uncontrolled(const ProblemSpec& spec);

/// Backward RK4 of the Riccati system with regularity classification.
RiccatiSolution solve_riccati_direct(const ProblemSpec& spec, const RegularityOptions& opts = {});

struct IterationOptions {
    std::size_t max_iter = 50;
    double conv_tol = 1e-10;
};

/// Successive Lyapunov solves with Theta_n = -R_hat_n^{-1} S_hat_n, starting from
/// the Theta = 0 solution. Requires R_hat_n positive definite throughout.
RiccatiSolution iterate_strongly_regular(const ProblemSpec& spec, const IterationOptions& iter = {},
                                         const RegularityOptions& opts = {});

/// sup over nodes and regimes of the Frobenius distance.
double sup_distance(const SymTable& a, const SymTable& b);

}  // namespace rslq
