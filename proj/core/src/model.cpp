#include "rslq/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rslq {

TimeGrid TimeGrid::make(double t0, double T, std::size_t steps)
{
    if (!std::isfinite(t0) || !std::isfinite(T) || !(t0 < T)) {
        throw InvalidInput("TimeGrid: require finite t0 < T");
    }
    if (steps < 2) {
        throw InvalidInput("TimeGrid: require at least 2 steps");
    }
    return TimeGrid{t0, T, steps};
}

double TimeGrid::node(std::size_t k) const
{
    if (k >= steps) return T;
    return t0 + (T - t0) * static_cast<double>(k) / static_cast<double>(steps);
}

TimeGrid::Location TimeGrid::locate(double t) const
{
    if (!(t >= t0 && t <= T)) {
        std::ostringstream os;
        os << "time " << t << " outside [" << t0 << ", " << T << "]";
        throw OutOfRange(os.str());
    }
    const double pos = (t - t0) / h();
    const auto nearest = static_cast<std::size_t>(std::llround(pos));
    if (nearest <= steps && node(nearest) == t) {
        if (nearest == steps) return {steps - 1, 1.0};
        return {nearest, 0.0};
    }
    auto cell = static_cast<std::size_t>(std::floor(pos));
    cell = std::min(cell, steps - 1);
    const double frac = std::clamp((t - node(cell)) / h(), 0.0, 1.0);
    return {cell, frac};
}

RegimeCoeffs RegimeCoeffs::zero(Index n, Index m)
{
    RegimeCoeffs r;
    r.A = Mat(Mat::Zero(n, n));
    r.B = Mat(Mat::Zero(n, m));
    r.C = Mat(Mat::Zero(n, n));
    r.D = Mat(Mat::Zero(n, m));
    r.b = Vec(Vec::Zero(n));
    r.sigma = Vec(Vec::Zero(n));
    r.Q = Mat(Mat::Zero(n, n));
    r.S = Mat(Mat::Zero(m, n));
    r.R = Mat(Mat::Zero(m, m));
    r.q = Vec(Vec::Zero(n));
    r.rho = Vec(Vec::Zero(m));
    r.G = Mat::Zero(n, n);
    r.g = Vec::Zero(n);
    return r;
}

bool RegimeCoeffs::operator==(const RegimeCoeffs& o) const
{
    const bool terminal = G.rows() == o.G.rows() && G.cols() == o.G.cols() && G == o.G &&
                          g.size() == o.g.size() && g == o.g;
    return terminal && A == o.A && B == o.B && C == o.C && D == o.D && b == o.b && sigma == o.sigma &&
           Q == o.Q && S == o.S && R == o.R && q == o.q && rho == o.rho;
}

bool ProblemSpec::operator==(const ProblemSpec& o) const
{
    return n == o.n && m == o.m && grid == o.grid && gen == o.gen && regimes == o.regimes;
}

namespace {

class Checker {
public:
    explicit Checker(ValidationReport& rep) : rep_(rep) {}

    void fail(const std::string& msg) { rep_.violations.push_back(msg); }

    template <class V>
    bool series(const Series<V>& s, std::size_t nodes, Index rows, Index cols, const std::string& name,
                std::size_t regime)
    {
        if (s.size() != 1 && s.size() != nodes) {
            std::ostringstream os;
            os << "shape mismatch: " << name << "(regime " << regime << ") has " << s.size()
               << " samples, expected 1 or " << nodes;
            fail(os.str());
            return false;
        }
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& v = s.samples()[k];
            if (v.rows() != rows || v.cols() != cols) {
                std::ostringstream os;
                os << "shape mismatch: " << name << "(regime " << regime << ") sample " << k << " is "
                   << v.rows() << "x" << v.cols() << ", expected " << rows << "x" << cols;
                fail(os.str());
                return false;
            }
            if (!v.allFinite()) {
                std::ostringstream os;
                os << "non-finite entry: " << name << "(regime " << regime << ") sample " << k;
                fail(os.str());
                return false;
            }
        }
        return true;
    }

    void symmetric(const Mat& v, const std::string& name, std::size_t regime, std::size_t k)
    {
        const double tol = 1e-12 * std::max(1.0, v.norm());
        if ((v - v.transpose()).norm() > tol) {
            std::ostringstream os;
            os << name << " not symmetric (regime " << regime << ", sample " << k << ")";
            fail(os.str());
        }
    }

private:
    ValidationReport& rep_;
};

}  // namespace

ValidationReport validate(const ProblemSpec& spec)
{
    ValidationReport rep;
    Checker check(rep);

    if (spec.n < 1 || spec.m < 1) {
        check.fail("shape mismatch: state and control dimensions must be positive");
        return rep;
    }
    const auto& g = spec.grid;
    if (!std::isfinite(g.t0) || !std::isfinite(g.T) || !(g.t0 < g.T) || g.steps < 2) {
        check.fail("invalid grid: require finite t0 < T and at least 2 steps");
        return rep;
    }
    const std::size_t D = spec.num_regimes();
    if (D == 0) {
        check.fail("shape mismatch: no regimes");
        return rep;
    }
    const std::size_t nodes = g.nodes();
    const Index n = spec.n;
    const Index m = spec.m;
    const auto Di = static_cast<Index>(D);

    if (check.series(spec.gen.rates, nodes, Di, Di, "generator", 0)) {
        const auto& samples = spec.gen.rates.samples();
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const Mat& lam = samples[k];
            for (Index i = 0; i < Di; ++i) {
                double row = 0.0;
                double scale = 0.0;
                for (Index j = 0; j < Di; ++j) {
                    row += lam(i, j);
                    scale += std::abs(lam(i, j));
                    if (i != j && lam(i, j) < 0.0) {
                        std::ostringstream os;
                        os << "generator negative off-diagonal: sample " << k << " entry (" << i << "," << j
                           << ") = " << lam(i, j);
                        check.fail(os.str());
                    }
                }
                if (std::abs(row) > 1e-12 * std::max(1.0, scale)) {
                    std::ostringstream os;
                    os << "generator row sum: sample " << k << " row " << i << " sums to " << row;
                    check.fail(os.str());
                }
            }
        }
    }

    for (std::size_t i = 0; i < D; ++i) {
        const auto& r = spec.regimes[i];
        check.series(r.A, nodes, n, n, "A", i);
        check.series(r.B, nodes, n, m, "B", i);
        check.series(r.C, nodes, n, n, "C", i);
        check.series(r.D, nodes, n, m, "D", i);
        check.series(r.b, nodes, n, 1, "b", i);
        check.series(r.sigma, nodes, n, 1, "sigma", i);
        if (check.series(r.Q, nodes, n, n, "Q", i)) {
            for (std::size_t k = 0; k < r.Q.size(); ++k) check.symmetric(r.Q.samples()[k], "Q", i, k);
        }
        check.series(r.S, nodes, m, n, "S", i);
        if (check.series(r.R, nodes, m, m, "R", i)) {
            for (std::size_t k = 0; k < r.R.size(); ++k) check.symmetric(r.R.samples()[k], "R", i, k);
        }
        check.series(r.q, nodes, n, 1, "q", i);
        check.series(r.rho, nodes, m, 1, "rho", i);

        if (r.G.rows() != n || r.G.cols() != n) {
            check.fail("shape mismatch: G(regime " + std::to_string(i) + ")");
        } else if (!r.G.allFinite()) {
            check.fail("non-finite entry: G(regime " + std::to_string(i) + ")");
        } else {
            check.symmetric(r.G, "G", i, 0);
        }
        if (r.g.size() != n) {
            check.fail("shape mismatch: g(regime " + std::to_string(i) + ")");
        } else if (!r.g.allFinite()) {
            check.fail("non-finite entry: g(regime " + std::to_string(i) + ")");
        }
    }
    return rep;
}

void require_valid(const ProblemSpec& spec)
{
    const auto rep = validate(spec);
    if (!rep.ok()) {
        throw InvalidInput("invalid problem: " + rep.violations.front());
    }
}

namespace {

void check_regime(const ProblemSpec& spec, std::size_t regime)
{
    if (regime >= spec.num_regimes()) {
        throw OutOfRange("regime " + std::to_string(regime) + " out of range");
    }
}

}  // namespace

CoeffAt coeff_at(const ProblemSpec& spec, double t, std::size_t regime)
{
    check_regime(spec, regime);
    const auto& r = spec.regimes[regime];
    const auto& g = spec.grid;
    return CoeffAt{r.A.at(g, t),     r.B.at(g, t), r.C.at(g, t), r.D.at(g, t), r.b.at(g, t),   r.sigma.at(g, t),
                   r.Q.at(g, t),     r.S.at(g, t), r.R.at(g, t), r.q.at(g, t), r.rho.at(g, t)};
}

CoeffAt coeff_at_node(const ProblemSpec& spec, std::size_t k, std::size_t regime)
{
    check_regime(spec, regime);
    if (k >= spec.grid.nodes()) {
        throw OutOfRange("node " + std::to_string(k) + " out of range");
    }
    const auto& r = spec.regimes[regime];
    return CoeffAt{r.A.at_node(k), r.B.at_node(k), r.C.at_node(k), r.D.at_node(k),
                   r.b.at_node(k), r.sigma.at_node(k), r.Q.at_node(k), r.S.at_node(k),
                   r.R.at_node(k), r.q.at_node(k), r.rho.at_node(k)};
}

HatTerms hat_terms(const CoeffAt& co, const SymMat& p)
{
    const Index n = co.A.rows();
    if (p.dim() != n || co.B.rows() != n || co.D.rows() != n || co.S.cols() != n ||
        co.R.rows() != co.B.cols() || co.D.cols() != co.B.cols() || co.S.rows() != co.B.cols()) {
        throw InvalidInput("hat_terms: shape mismatch");
    }
    const Mat& P = p.mat();
    const Mat PD = P * co.D;
    Mat s_hat = co.B.transpose() * P + PD.transpose() * co.C + co.S;
    SymMat r_hat(Mat(co.R + co.D.transpose() * PD));
    return HatTerms{std::move(s_hat), std::move(r_hat)};
}

ProblemSpec homogeneous(const ProblemSpec& spec)
{
    ProblemSpec out = spec;
    for (auto& r : out.regimes) {
        r.b = Vec(Vec::Zero(spec.n));
        r.sigma = Vec(Vec::Zero(spec.n));
        r.q = Vec(Vec::Zero(spec.n));
        r.rho = Vec(Vec::Zero(spec.m));
        r.g = Vec::Zero(spec.n);
    }
    return out;
}

ProblemSpec with_steps(const ProblemSpec& spec, std::size_t steps)
{
    if (steps == spec.grid.steps) return spec;
    auto all_constant = [](const ProblemSpec& s) {
        if (!s.gen.rates.is_constant()) return false;
        for (const auto& r : s.regimes) {
            if (!(r.A.is_constant() && r.B.is_constant() && r.C.is_constant() && r.D.is_constant() &&
                  r.b.is_constant() && r.sigma.is_constant() && r.Q.is_constant() && r.S.is_constant() &&
                  r.R.is_constant() && r.q.is_constant() && r.rho.is_constant())) {
                return false;
            }
        }
        return true;
    };
    if (!all_constant(spec)) {
        throw InvalidInput("cannot change grid steps: problem has per-node coefficient samples");
    }
    ProblemSpec out = spec;
    out.grid = TimeGrid::make(spec.grid.t0, spec.grid.T, steps);
    return out;
}

}  // namespace rslq
