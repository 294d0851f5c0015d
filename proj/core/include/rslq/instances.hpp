#pragma once

#include "rslq/model.hpp"
#include "rslq/problem_io.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

// Reference problems with known structure, shared by tests, benchmarks and the
// example generator. All horizons are [0, 1].
namespace rslq::instances {

/// n = m = 1, A = C = S = Q = 0, B = R = G = 1, one regime: P(t) = 1 / (1 + T - t).
ProblemSpec scalar_analytic(std::size_t steps = 1000);

/// n = m = 1, A = a, G = 1, R = 1, everything else zero: P(t) = e^{2a(T - t)}.
ProblemSpec scalar_exponential(double a, std::size_t steps = 1000);

/// dX = 0.5 X ds + 0.5 X dW with cost X(T)^2: value e^{1.25} from x = 1.
ProblemSpec calibration_scalar(std::size_t steps = 200);

/// n = 2, m = 1, two coupled regimes with G >= 0, Q >= 0, S = 0, R >= delta I
/// and nonzero A, C, D.
ProblemSpec standard_two_regime(std::size_t steps = 200);

/// standard_two_regime with b, sigma, q, rho, g and a cross weight S nonzero.
ProblemSpec inhomogeneous_two_regime(std::size_t steps = 200);

/// Three regimes with different data and a zero generator.
ProblemSpec decoupled_three_regime(std::size_t steps = 200);

/// n = m = 1, R = -1, everything else zero: J^0(u) = -int |u|^2.
ProblemSpec negative_weight(std::size_t steps = 200);

/// n = 1, m = 2 with R = [[1, 1], [1, 1]] singular and B = [1, 1]: regular but
/// not strongly regular, with P(t) = 1 / (1 + T - t).
ProblemSpec redundant_control(std::size_t steps = 1000);

/// Scalar indefinite problem dP/dt = -P^2, P(T) = 2 (B = 1, R = -1): the solution
/// 2 / (1 - 2(T - t)) escapes at T - t = 0.5.
ProblemSpec blowup(std::size_t steps = 200);

/// Two coupled regimes with every coefficient zero.
ProblemSpec zero_problem(std::size_t steps = 100);

/// n = 2, m = 1, one regime, no noise; affine terms b, q, rho, g nonzero.
ProblemSpec noise_free(std::size_t steps = 200);

/// Two regimes with per-node A, R and a time-dependent generator.
ProblemSpec time_varying(std::size_t steps = 200);

struct Entry {
    std::string name;
    std::string summary;
    std::function<ProblemSpec(std::size_t)> make;
    std::size_t steps;
    Vec x0;
    std::size_t regime = 0;
    std::size_t paths = 10000;

    ProblemFile file() const;
};

/// Every bundled problem, in a stable order.
const std::vector<Entry>& catalog();

/// Throws OutOfRange for an unknown name.
const Entry& find(const std::string& name);

}  // namespace rslq::instances
