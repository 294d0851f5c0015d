#include "rslq/riccati.hpp"

#include "backward_rk4.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rslq {

DivergenceError::DivergenceError(std::size_t node, double time, const std::string& what)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "divergence at node " << node << " (t = " << time << "): " << what;
          return os.str();
      }()),
      node_(node),
      time_(time)
{
}

NonConvergenceError::NonConvergenceError(std::size_t iterations, double last_delta)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "no convergence after " << iterations << " iterations; last delta " << last_delta;
          return os.str();
      }()),
      last_delta_(last_delta)
{
}

std::string Classification::name() const
{
    switch (kind) {
    case Regularity::strongly_regular: return "strongly_regular";
    case Regularity::regular: return "regular";
    case Regularity::not_regular: return "not_regular";
    }
    return "not_regular";
}

std::string Classification::describe() const
{
    std::ostringstream os;
    os.precision(17);
    os << name() << "\n";
    os << "min_eig_R_hat " << min_eig_R_hat << "\n";
    if (kind == Regularity::not_regular) {
        os << "reason " << reason << "\n";
        os << "node " << node << "\n";
        os << "regime " << regime << "\n";
    }
    os.precision(6);
    os << "strong_tol " << tolerances.strong_tol << "\n";
    os << "psd_tol " << tolerances.psd_tol << "\n";
    os << "range_tol " << tolerances.range_tol << "\n";
    os << "pinv_tol " << tolerances.pinv_tol << "\n";
    return os.str();
}

SymMat LyapunovSolution::P_at(double t, std::size_t regime) const
{
    return detail::hermite_at(grid, P, P_dot, t, regime);
}

SymMat RiccatiSolution::P_at(double t, std::size_t regime) const
{
    return detail::hermite_at(grid, P, P_dot, t, regime);
}

namespace {

// PA + A^T P + C^T P C + Q + sum_k lambda_ik P_k, unsymmetrized.
Mat common_terms(const CoeffAt& co, const std::vector<SymMat>& p_all, std::size_t regime, const Vec& lambda_row)
{
    const Mat& P = p_all.at(regime).mat();
    const Mat PA = P * co.A;
    Mat out = PA + PA.transpose() + co.C.transpose() * P * co.C + co.Q;
    for (std::size_t k = 0; k < p_all.size(); ++k) {
        const double lam = lambda_row(static_cast<Index>(k));
        if (lam != 0.0) out += lam * p_all[k].mat();
    }
    return out;
}

void check_lambda(const std::vector<SymMat>& p_all, const Vec& lambda_row)
{
    if (static_cast<std::size_t>(lambda_row.size()) != p_all.size()) {
        throw InvalidInput("generator row length does not match regime count");
    }
}

}  // namespace

SymMat lyapunov_rhs(const CoeffAt& co, const std::vector<SymMat>& p_all, std::size_t regime,
                    const Vec& lambda_row, const Mat& theta)
{
    check_lambda(p_all, lambda_row);
    const auto hat = hat_terms(co, p_all.at(regime));
    if (theta.rows() != hat.S_hat.rows() || theta.cols() != hat.S_hat.cols()) {
        throw InvalidInput("lyapunov_rhs: gain must be m x n");
    }
    const Mat st = hat.S_hat.transpose() * theta;
    Mat total = common_terms(co, p_all, regime, lambda_row) + st + st.transpose() +
                theta.transpose() * hat.R_hat.mat() * theta;
    return SymMat(Mat(-total));
}

SymMat riccati_rhs(const CoeffAt& co, const std::vector<SymMat>& p_all, std::size_t regime,
                   const Vec& lambda_row, double pinv_tol)
{
    check_lambda(p_all, lambda_row);
    const auto hat = hat_terms(co, p_all.at(regime));
    const Mat quad = hat.S_hat.transpose() * pinv(hat.R_hat.mat(), pinv_tol) * hat.S_hat;
    Mat total = common_terms(co, p_all, regime, lambda_row) - quad;
    return SymMat(Mat(-total));
}

namespace {

std::vector<SymMat> terminal_values(const ProblemSpec& spec)
{
    std::vector<SymMat> out;
    out.reserve(spec.num_regimes());
    for (const auto& r : spec.regimes) out.emplace_back(r.G);
    return out;
}

// Collects [node][regime] states from the integrator into [regime][node].
class NodeSink {
public:
    NodeSink(std::size_t regimes, std::size_t nodes) : table_(regimes, std::vector<SymMat>(nodes)) {}

    void operator()(std::size_t k, const std::vector<SymMat>& y)
    {
        for (std::size_t i = 0; i < y.size(); ++i) table_[i][k] = y[i];
    }

    SymTable take() { return std::move(table_); }

private:
    SymTable table_;
};

std::vector<SymMat> node_column(const SymTable& t, std::size_t k)
{
    std::vector<SymMat> col;
    col.reserve(t.size());
    for (const auto& row : t) col.push_back(row[k]);
    return col;
}

Vec lambda_row_of(const Mat& lam, std::size_t i) { return lam.row(static_cast<Index>(i)).transpose(); }

Classification classify(const ProblemSpec& spec, const RiccatiSolution& sol, const RegularityOptions& opts)
{
    Classification c;
    c.tolerances = opts;
    c.min_eig_R_hat = std::numeric_limits<double>::infinity();
    const std::size_t D = sol.regimes();
    const std::size_t nodes = spec.grid.nodes();

    for (std::size_t i = 0; i < D; ++i) {
        for (std::size_t k = 0; k < nodes; ++k) {
            c.min_eig_R_hat = std::min(c.min_eig_R_hat, sol.min_eig_R_hat[i][k]);
        }
    }

    auto fail = [&](std::string reason, std::size_t k, std::size_t i) {
        c.kind = Regularity::not_regular;
        c.reason = std::move(reason);
        c.node = k;
        c.regime = i;
        return c;
    };

    // First violation in time order.
    for (std::size_t k = 0; k < nodes; ++k) {
        for (std::size_t i = 0; i < D; ++i) {
            if (!sol.Theta[i][k].allFinite()) return fail("R_hat^+ S_hat not finite", k, i);
        }
    }
    if (c.min_eig_R_hat >= opts.strong_tol && opts.strong_tol > 0.0) {
        c.kind = Regularity::strongly_regular;
        return c;
    }
    for (std::size_t k = 0; k < nodes; ++k) {
        for (std::size_t i = 0; i < D; ++i) {
            if (sol.min_eig_R_hat[i][k] < -opts.psd_tol) {
                return fail("R_hat not positive semidefinite", k, i);
            }
            const Mat& S = sol.S_hat[i][k];
            if (range_defect(S, sol.R_hat[i][k], opts.pinv_tol) > opts.range_tol * std::max(1.0, S.norm())) {
                return fail("range(S_hat) not contained in range(R_hat)", k, i);
            }
        }
    }
    c.kind = Regularity::regular;
    return c;
}

// Derived quantities at every node plus classification.
RiccatiSolution finalize(const ProblemSpec& spec, SymTable P, const RegularityOptions& opts)
{
    const std::size_t D = spec.num_regimes();
    const std::size_t nodes = spec.grid.nodes();

    RiccatiSolution sol;
    sol.grid = spec.grid;
    sol.P = std::move(P);
    sol.P_dot.assign(D, std::vector<SymMat>(nodes));
    sol.S_hat.assign(D, std::vector<Mat>(nodes));
    sol.R_hat.assign(D, std::vector<SymMat>(nodes));
    sol.R_hat_pinv.assign(D, std::vector<Mat>(nodes));
    sol.Theta.assign(D, std::vector<Mat>(nodes));
    sol.min_eig_R_hat.assign(D, std::vector<double>(nodes));

    for (std::size_t k = 0; k < nodes; ++k) {
        const auto col = node_column(sol.P, k);
        const Mat& lam = spec.gen.at_node(k);
        for (std::size_t i = 0; i < D; ++i) {
            const auto co = coeff_at_node(spec, k, i);
            sol.P_dot[i][k] = riccati_rhs(co, col, i, lambda_row_of(lam, i), opts.pinv_tol);
            auto hat = hat_terms(co, col[i]);
            sol.R_hat_pinv[i][k] = pinv(hat.R_hat.mat(), opts.pinv_tol);
            sol.Theta[i][k] = -sol.R_hat_pinv[i][k] * hat.S_hat;
            sol.min_eig_R_hat[i][k] = min_eig_sym(hat.R_hat);
            sol.S_hat[i][k] = std::move(hat.S_hat);
            sol.R_hat[i][k] = std::move(hat.R_hat);
        }
    }
    sol.classification = classify(spec, sol, opts);
    return sol;
}

}  // namespace

LyapunovSolution solve_lyapunov(const ProblemSpec& spec, const GainFn& theta)
{
    require_valid(spec);
    const std::size_t D = spec.num_regimes();
    const auto& grid = spec.grid;

    auto rhs = [&](double t, const std::vector<SymMat>& y) {
        const Mat lam = spec.gen.at(grid, t);
        std::vector<SymMat> dy;
        dy.reserve(D);
        for (std::size_t i = 0; i < D; ++i) {
            dy.push_back(lyapunov_rhs(coeff_at(spec, t, i), y, i, lambda_row_of(lam, i), theta(t, i)));
        }
        return dy;
    };

    NodeSink sink(D, grid.nodes());
    detail::rk4_backward(grid, terminal_values(spec), rhs, std::ref(sink));

    LyapunovSolution sol;
    sol.grid = grid;
    sol.P = sink.take();
    sol.P_dot.assign(D, std::vector<SymMat>(grid.nodes()));
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const auto col = node_column(sol.P, k);
        const double t = grid.node(k);
        const Mat& lam = spec.gen.at_node(k);
        for (std::size_t i = 0; i < D; ++i) {
            sol.P_dot[i][k] = lyapunov_rhs(coeff_at_node(spec, k, i), col, i, lambda_row_of(lam, i), theta(t, i));
        }
    }
    return sol;
}

LyapunovSolution solve_lyapunov(const ProblemSpec& spec, const MatTable& theta)
{
    const std::size_t nodes = spec.grid.nodes();
    if (theta.size() != spec.num_regimes()) {
        throw InvalidInput("solve_lyapunov: gain table needs one row per regime");
    }
    for (const auto& row : theta) {
        if (row.size() != nodes) throw InvalidInput("solve_lyapunov: gain table needs one entry per node");
        for (const auto& g : row) {
            if (g.rows() != spec.m || g.cols() != spec.n) throw InvalidInput("solve_lyapunov: gain must be m x n");
        }
    }
    const auto& grid = spec.grid;
    GainFn fn = [&](double t, std::size_t i) -> Mat {
        const auto loc = grid.locate(t);
        if (loc.frac == 0.0) return theta[i][loc.cell];
        if (loc.frac == 1.0) return theta[i][loc.cell + 1];
        return (1.0 - loc.frac) * theta[i][loc.cell] + loc.frac * theta[i][loc.cell + 1];
    };
    return solve_lyapunov(spec, fn);
}

LyapunovSolution solve_lyapunov_uncontrolled(const ProblemSpec& spec)
{
    const Mat zero = Mat::Zero(spec.m, spec.n);
    return solve_lyapunov(spec, [&](double, std::size_t) { return zero; });
}

RiccatiSolution solve_riccati_direct(const ProblemSpec& spec, const RegularityOptions& opts)
{
    require_valid(spec);
    const std::size_t D = spec.num_regimes();
    const auto& grid = spec.grid;

    auto rhs = [&](double t, const std::vector<SymMat>& y) {
        const Mat lam = spec.gen.at(grid, t);
        std::vector<SymMat> dy;
        dy.reserve(D);
        for (std::size_t i = 0; i < D; ++i) {
            dy.push_back(riccati_rhs(coeff_at(spec, t, i), y, i, lambda_row_of(lam, i), opts.pinv_tol));
        }
        return dy;
    };

    NodeSink sink(D, grid.nodes());
    detail::rk4_backward(grid, terminal_values(spec), rhs, std::ref(sink));
    return finalize(spec, sink.take(), opts);
}

double sup_distance(const SymTable& a, const SymTable& b)
{
    if (a.size() != b.size()) throw InvalidInput("sup_distance: regime count mismatch");
    double sup = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) throw InvalidInput("sup_distance: node count mismatch");
        for (std::size_t k = 0; k < a[i].size(); ++k) {
            sup = std::max(sup, frob_dist(a[i][k].mat(), b[i][k].mat()));
        }
    }
    return sup;
}

RiccatiSolution iterate_strongly_regular(const ProblemSpec& spec, const IterationOptions& iter,
                                         const RegularityOptions& opts)
{
    require_valid(spec);
    const auto& grid = spec.grid;
    const std::size_t D = spec.num_regimes();

    LyapunovSolution current = solve_lyapunov_uncontrolled(spec);
    std::vector<double> trace;
    std::vector<double> mono;

    for (std::size_t n = 0; n < iter.max_iter; ++n) {
        // Theta_n from P_n, evaluated off-node through the Hermite interpolant.
        GainFn gain = [&](double t, std::size_t i) -> Mat {
            const SymMat P = current.P_at(t, i);
            const auto hat = hat_terms(coeff_at(spec, t, i), P);
            const double lam = min_eig_sym(hat.R_hat);
            if (!(lam > 0.0)) {
                std::ostringstream os;
                os << "R_hat not positive definite at t = " << t << ", regime " << i << " (iteration " << n
                   << ", min eig " << lam << ")";
                throw NotStronglyRegularError(os.str());
            }
            return -pinv(hat.R_hat.mat(), opts.pinv_tol) * hat.S_hat;
        };
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            for (std::size_t i = 0; i < D; ++i) (void)gain(grid.node(k), i);
        }

        LyapunovSolution next = solve_lyapunov(spec, gain);

        const double delta = sup_distance(next.P, current.P);
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < D; ++i) {
            for (std::size_t k = 0; k < grid.nodes(); ++k) {
                min_gap = std::min(min_gap, min_eig_sym(current.P[i][k] - next.P[i][k]));
            }
        }
        trace.push_back(delta);
        mono.push_back(min_gap);
        current = std::move(next);

        if (delta < iter.conv_tol) {
            RiccatiSolution sol = finalize(spec, std::move(current.P), opts);
            sol.iteration_trace = std::move(trace);
            sol.monotonicity_trace = std::move(mono);
            return sol;
        }
    }
    throw NonConvergenceError(iter.max_iter, trace.empty() ? 0.0 : trace.back());
}

}  // namespace rslq
