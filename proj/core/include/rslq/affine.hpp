#pragma once

#include "rslq/matcore.hpp"
#include "rslq/model.hpp"
#include "rslq/riccati.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace rslq {

using VecTable = std::vector<std::vector<Vec>>;  // [regime][node]

/// Offset process eta, the derived rho_hat and v*, and the constant term of
/// the value function, all per regime and node.
///
/// With deterministic coefficients the Brownian integrand of the eta-BSDE is
/// zero and the jump integrands are eta(t,k) - eta(t,i); the BSDE becomes the
/// D-coupled linear ODE
///   -d/dt eta_i = A^T eta_i + C^T P sigma + P b + q - S_hat^T R_hat^+ rho_hat_i
///                 + sum_k lambda_ik eta_k,
///   rho_hat_i   = B^T eta_i + D^T P sigma + rho,      eta_i(T) = g_i,
/// and the constant term c_i(t) = E[ int_t^T f(s, alpha(s)) ds | alpha(t) = i ]
/// with f = <P sigma, sigma> + 2<eta, b> - <R_hat^+ rho_hat, rho_hat> obeys
///   -d/dt c_i = f_i + sum_k lambda_ik c_k,  c_i(T) = 0.
struct AffineSolution {
    TimeGrid grid;
    VecTable eta;
    VecTable rho_hat;
    VecTable v_star;
    std::vector<std::vector<double>> value_integral;

    /// rho_hat in range(R_hat) at every node; when false the closed-loop
    /// construction is not valid and range_violation names the first node.
    bool closed_loop_valid = true;
    std::string range_violation;

    std::size_t regimes() const { return eta.size(); }
};

/// Requires a regular or strongly regular Riccati solution.
AffineSolution solve_eta(const ProblemSpec& spec, const RiccatiSolution& ric);

/// Theta*(t,i) x + v*(t,i), node values interpolated linearly in t.
Vec feedback_at(const RiccatiSolution& ric, const AffineSolution& aff, double t, std::size_t regime, const Vec& x);

/// <P x, x> + 2 <eta, x> + value_integral at (t, regime).
double value_function(const RiccatiSolution& ric, const AffineSolution& aff, double t, std::size_t regime,
                      const Vec& x);

}  // namespace rslq
