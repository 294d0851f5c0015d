#pragma once

#include "rslq/matcore.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rslq {

class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Uniform grid t0 = s_0 < s_1 < ... < s_N = T.
struct TimeGrid {
    double t0 = 0.0;
    double T = 1.0;
    std::size_t steps = 2;

    /// Validating constructor: t0 < T, steps >= 2, both ends finite.
    static TimeGrid make(double t0, double T, std::size_t steps);

    double h() const { return (T - t0) / static_cast<double>(steps); }
    std::size_t nodes() const { return steps + 1; }
    double node(std::size_t k) const;

    /// Cell index and fractional offset of t. Grid nodes map to frac == 0
    /// (the last node maps to cell steps-1, frac == 1).
    struct Location {
        std::size_t cell;
        double frac;
    };
    Location locate(double t) const;

    bool operator==(const TimeGrid&) const = default;
};

/// A coefficient sampled either once (constant in time) or at every grid node.
/// Values between nodes are piecewise-linear.
template <class V>
class Series {
public:
    Series() = default;
    Series(V constant) : samples_{std::move(constant)} {}  // NOLINT: implicit on purpose
    template <class E>
    Series(const Eigen::MatrixBase<E>& constant) : samples_{V(constant)} {}  // NOLINT

    static Series per_node(std::vector<V> samples)
    {
        Series s;
        s.samples_ = std::move(samples);
        return s;
    }

    bool is_constant() const { return samples_.size() == 1; }
    std::size_t size() const { return samples_.size(); }
    const std::vector<V>& samples() const { return samples_; }

    const V& at_node(std::size_t k) const { return is_constant() ? samples_[0] : samples_.at(k); }

    V at(const TimeGrid& grid, double t) const
    {
        const auto loc = grid.locate(t);
        if (is_constant()) return samples_[0];
        if (loc.frac == 0.0) return samples_[loc.cell];
        if (loc.frac == 1.0) return samples_[loc.cell + 1];
        return V((1.0 - loc.frac) * samples_[loc.cell] + loc.frac * samples_[loc.cell + 1]);
    }

    bool operator==(const Series& o) const
    {
        if (samples_.size() != o.samples_.size()) return false;
        for (std::size_t k = 0; k < samples_.size(); ++k) {
            if (samples_[k].rows() != o.samples_[k].rows() || samples_[k].cols() != o.samples_[k].cols() ||
                samples_[k] != o.samples_[k]) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<V> samples_;
};

using MatSeries = Series<Mat>;
using VecSeries = Series<Vec>;

/// Transition intensities lambda_ij(t) of the regime chain.
struct Generator {
    MatSeries rates;

    std::size_t regimes() const { return rates.size() == 0 ? 0 : static_cast<std::size_t>(rates.at_node(0).rows()); }
    const Mat& at_node(std::size_t k) const { return rates.at_node(k); }
    Mat at(const TimeGrid& grid, double t) const { return rates.at(grid, t); }

    bool operator==(const Generator&) const = default;
};

/// Coefficients of one regime: state equation (A, B, C, D, b, sigma),
/// running weights (Q, S, R, q, rho) and terminal weights (G, g).
struct RegimeCoeffs {
    MatSeries A, B, C, D;
    VecSeries b, sigma;
    MatSeries Q, S, R;
    VecSeries q, rho;
    Mat G;
    Vec g;

    /// All-zero constant coefficients for state dim n and control dim m.
    static RegimeCoeffs zero(Index n, Index m);

    bool operator==(const RegimeCoeffs& o) const;
};

struct ProblemSpec {
    Index n = 1;
    Index m = 1;
    TimeGrid grid;
    Generator gen;
    std::vector<RegimeCoeffs> regimes;

    std::size_t num_regimes() const { return regimes.size(); }

    bool operator==(const ProblemSpec& o) const;
};

/// All coefficient values at one (t, regime) pair.
struct CoeffAt {
    Mat A, B, C, D;
    Vec b, sigma;
    Mat Q, S, R;
    Vec q, rho;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks shapes, finiteness, symmetry of Q/R/G and the generator rows.
/// Never throws; an empty report means the spec is admissible.
ValidationReport validate(const ProblemSpec& spec);

/// Throws InvalidInput carrying the first violation when validate() fails.
void require_valid(const ProblemSpec& spec);

/// Piecewise-linear evaluation of every coefficient; exact at grid nodes.
/// Throws OutOfRange for t outside [t0, T] or an unknown regime.
CoeffAt coeff_at(const ProblemSpec& spec, double t, std::size_t regime);

/// Node-exact evaluation without interpolation arithmetic.
CoeffAt coeff_at_node(const ProblemSpec& spec, std::size_t k, std::size_t regime);

struct HatTerms {
    Mat S_hat;     // m x n:  B^T P + D^T P C + S
    SymMat R_hat;  // m x m:  R + D^T P D
};

HatTerms hat_terms(const CoeffAt& co, const SymMat& p);

/// Same problem with b, sigma, q, rho, g set to zero.
ProblemSpec homogeneous(const ProblemSpec& spec);

/// Replaces the grid, keeping constant coefficients. Throws InvalidInput if
/// any coefficient is sampled per node on the old grid.
ProblemSpec with_steps(const ProblemSpec& spec, std::size_t steps);

}  // namespace rslq
