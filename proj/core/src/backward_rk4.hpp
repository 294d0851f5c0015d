#pragma once

// Fixed-step classic RK4 from the terminal node back to t0.

#include "rslq/matcore.hpp"
#include "rslq/model.hpp"
#include "rslq/riccati.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace rslq::detail {

template <class T>
std::vector<T> axpy(const std::vector<T>& y, double a, const std::vector<T>& k)
{
    std::vector<T> out = y;
    for (std::size_t i = 0; i < y.size(); ++i) out[i] += a * k[i];
    return out;
}

template <class Derived>
bool exploded(const Eigen::MatrixBase<Derived>& m)
{
    if (!m.allFinite()) return true;
    return m.size() > 0 && m.cwiseAbs().maxCoeff() > kBlowUpThreshold;
}
inline bool exploded(const SymMat& m) { return exploded(m.mat()); }

/// `rhs(t, y)` returns dy/dt. `on_node(k, y)` receives the state at node k,
/// starting with the terminal node N.
template <class T, class Rhs, class OnNode>
void rk4_backward(const TimeGrid& grid, std::vector<T> y, Rhs&& rhs, OnNode&& on_node)
{
    const std::size_t N = grid.steps;
    const double h = grid.h();
    on_node(N, y);
    for (std::size_t k = N; k-- > 0;) {
        const double t1 = grid.node(k + 1);
        const double t0 = grid.node(k);
        const double tm = 0.5 * (t0 + t1);
        try {
            const auto k1 = rhs(t1, y);
            const auto k2 = rhs(tm, axpy(y, -0.5 * h, k1));
            const auto k3 = rhs(tm, axpy(y, -0.5 * h, k2));
            const auto k4 = rhs(t0, axpy(y, -h, k3));
            for (std::size_t i = 0; i < y.size(); ++i) {
                y[i] += (-h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        } catch (const InvalidInput& e) {
            throw DivergenceError(k, t0, e.what());
        }
        for (const auto& v : y) {
            if (exploded(v)) throw DivergenceError(k, t0, "solution exceeded blow-up threshold");
        }
        on_node(k, y);
    }
}

/// Cubic Hermite interpolation on cell [s_k, s_{k+1}].
inline Mat hermite(const Mat& y0, const Mat& d0, const Mat& y1, const Mat& d1, double h, double s)
{
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y0 + (h10 * h) * d0 + h01 * y1 + (h11 * h) * d1;
}

inline SymMat hermite_at(const TimeGrid& grid, const SymTable& values, const SymTable& rates, double t,
                         std::size_t regime)
{
    if (regime >= values.size()) throw OutOfRange("regime out of range");
    const auto loc = grid.locate(t);
    const auto& v = values[regime];
    const auto& d = rates[regime];
    if (loc.frac == 0.0) return v[loc.cell];
    if (loc.frac == 1.0) return v[loc.cell + 1];
    return SymMat(hermite(v[loc.cell].mat(), d[loc.cell].mat(), v[loc.cell + 1].mat(), d[loc.cell + 1].mat(),
                          grid.h(), loc.frac));
}

}  // namespace rslq::detail
