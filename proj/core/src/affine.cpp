#include "rslq/affine.hpp"

#include "backward_rk4.hpp"

#include <algorithm>
#include <sstream>

namespace rslq {

namespace {

struct Driver {
    Vec eta_dot;
    double c_dot;
};

// Right-hand side for one regime; `state` stacks [eta; c] per regime.
Driver affine_rhs(const CoeffAt& co, const SymMat& p, const Vec& lambda_row, const std::vector<Vec>& state,
                  std::size_t regime, double pinv_tol)
{
    const Index n = co.A.rows();
    const Vec eta = state[regime].head(n);
    const auto hat = hat_terms(co, p);
    const Mat Rp = pinv(hat.R_hat.mat(), pinv_tol);
    const Vec p_sigma = p.mat() * co.sigma;
    const Vec rho_hat = co.B.transpose() * eta + co.D.transpose() * p_sigma + co.rho;
    const Vec Rp_rho = Rp * rho_hat;

    Vec drift = co.A.transpose() * eta + co.C.transpose() * p_sigma + p.mat() * co.b + co.q -
                hat.S_hat.transpose() * Rp_rho;
    double f = p_sigma.dot(co.sigma) + 2.0 * eta.dot(co.b) - Rp_rho.dot(rho_hat);

    for (std::size_t k = 0; k < state.size(); ++k) {
        const double lam = lambda_row(static_cast<Index>(k));
        if (lam == 0.0) continue;
        drift += lam * state[k].head(n);
        f += lam * state[k](n);
    }
    return Driver{-drift, -f};
}

Vec lerp(const std::vector<Vec>& v, const TimeGrid::Location& loc)
{
    if (loc.frac == 0.0) return v[loc.cell];
    if (loc.frac == 1.0) return v[loc.cell + 1];
    return (1.0 - loc.frac) * v[loc.cell] + loc.frac * v[loc.cell + 1];
}

}  // namespace

AffineSolution solve_eta(const ProblemSpec& spec, const RiccatiSolution& ric)
{
    require_valid(spec);
    if (!ric.classification.is_regular()) {
        throw InvalidInput("solve_eta: Riccati solution is not regular (" + ric.classification.reason + ")");
    }
    if (ric.regimes() != spec.num_regimes() || !(ric.grid == spec.grid)) {
        throw InvalidInput("solve_eta: Riccati solution does not match the problem grid");
    }

    const auto& grid = spec.grid;
    const std::size_t D = spec.num_regimes();
    const std::size_t nodes = grid.nodes();
    const Index n = spec.n;
    const double pinv_tol = ric.classification.tolerances.pinv_tol;

    std::vector<Vec> terminal(D, Vec::Zero(n + 1));
    for (std::size_t i = 0; i < D; ++i) terminal[i].head(n) = spec.regimes[i].g;

    auto rhs = [&](double t, const std::vector<Vec>& y) {
        const Mat lam = spec.gen.at(grid, t);
        std::vector<Vec> dy(D, Vec(n + 1));
        for (std::size_t i = 0; i < D; ++i) {
            const auto d = affine_rhs(coeff_at(spec, t, i), ric.P_at(t, i),
                                      lam.row(static_cast<Index>(i)).transpose(), y, i, pinv_tol);
            dy[i].head(n) = d.eta_dot;
            dy[i](n) = d.c_dot;
        }
        return dy;
    };

    AffineSolution sol;
    sol.grid = grid;
    sol.eta.assign(D, std::vector<Vec>(nodes));
    sol.rho_hat.assign(D, std::vector<Vec>(nodes));
    sol.v_star.assign(D, std::vector<Vec>(nodes));
    sol.value_integral.assign(D, std::vector<double>(nodes));

    detail::rk4_backward(grid, std::move(terminal), rhs, [&](std::size_t k, const std::vector<Vec>& y) {
        for (std::size_t i = 0; i < D; ++i) {
            sol.eta[i][k] = y[i].head(n);
            sol.value_integral[i][k] = y[i](n);
        }
    });

    const double range_tol = ric.classification.tolerances.range_tol;
    for (std::size_t k = 0; k < nodes; ++k) {
        for (std::size_t i = 0; i < D; ++i) {
            const auto co = coeff_at_node(spec, k, i);
            const Mat& P = ric.P[i][k].mat();
            Vec rho_hat = co.B.transpose() * sol.eta[i][k] + co.D.transpose() * (P * co.sigma) + co.rho;
            sol.v_star[i][k] = -ric.R_hat_pinv[i][k] * rho_hat;

            if (sol.closed_loop_valid) {
                const double defect = range_defect(rho_hat, ric.R_hat[i][k], pinv_tol);
                if (defect > range_tol * std::max(1.0, rho_hat.norm())) {
                    std::ostringstream os;
                    os << "rho_hat not in range(R_hat) at node " << k << ", regime " << i << " (defect " << defect
                       << ")";
                    sol.closed_loop_valid = false;
                    sol.range_violation = os.str();
                }
            }
            sol.rho_hat[i][k] = std::move(rho_hat);
        }
    }
    return sol;
}

Vec feedback_at(const RiccatiSolution& ric, const AffineSolution& aff, double t, std::size_t regime, const Vec& x)
{
    if (regime >= ric.regimes()) throw OutOfRange("regime out of range");
    const auto loc = ric.grid.locate(t);
    const auto& th = ric.Theta[regime];
    Mat theta;
    if (loc.frac == 0.0) {
        theta = th[loc.cell];
    } else if (loc.frac == 1.0) {
        theta = th[loc.cell + 1];
    } else {
        theta = (1.0 - loc.frac) * th[loc.cell] + loc.frac * th[loc.cell + 1];
    }
    if (x.size() != theta.cols()) throw InvalidInput("feedback_at: state dimension mismatch");
    return theta * x + lerp(aff.v_star[regime], loc);
}

double value_function(const RiccatiSolution& ric, const AffineSolution& aff, double t, std::size_t regime,
                      const Vec& x)
{
    if (regime >= ric.regimes()) throw OutOfRange("regime out of range");
    const auto loc = ric.grid.locate(t);
    const SymMat P = ric.P_at(t, regime);
    if (x.size() != P.dim()) throw InvalidInput("value_function: state dimension mismatch");
    const Vec eta = lerp(aff.eta[regime], loc);
    const auto& c = aff.value_integral[regime];
    double constant = c[loc.cell];
    if (loc.frac == 1.0) {
        constant = c[loc.cell + 1];
    } else if (loc.frac != 0.0) {
        constant = (1.0 - loc.frac) * c[loc.cell] + loc.frac * c[loc.cell + 1];
    }
    return x.dot(P.mat() * x) + 2.0 * eta.dot(x) + constant;
}

}  // namespace rslq
