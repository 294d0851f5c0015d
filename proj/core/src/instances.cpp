#include "rslq/instances.hpp"

#include <cmath>
#include <initializer_list>
#include <numbers>

namespace rslq::instances {

namespace {

Mat mat(std::initializer_list<std::initializer_list<double>> rows)
{
    Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index r = 0;
    for (const auto& row : rows) {
        Index c = 0;
        for (double x : row) m(r, c++) = x;
        ++r;
    }
    return m;
}

Vec vec(std::initializer_list<double> xs)
{
    Vec v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

ProblemSpec base(Index n, Index m, std::size_t regimes, std::size_t steps)
{
    ProblemSpec spec;
    spec.n = n;
    spec.m = m;
    spec.grid = TimeGrid::make(0.0, 1.0, steps);
    spec.gen.rates = MatSeries(Mat::Zero(static_cast<Index>(regimes), static_cast<Index>(regimes)));
    spec.regimes.assign(regimes, RegimeCoeffs::zero(n, m));
    return spec;
}

}  // namespace

ProblemSpec scalar_analytic(std::size_t steps)
{
    auto spec = base(1, 1, 1, steps);
    auto& r = spec.regimes[0];
    r.B = mat({{1}});
    r.R = mat({{1}});
    r.G = mat({{1}});
    return spec;
}

ProblemSpec scalar_exponential(double a, std::size_t steps)
{
    auto spec = base(1, 1, 1, steps);
    auto& r = spec.regimes[0];
    r.A = mat({{a}});
    r.R = mat({{1}});
    r.G = mat({{1}});
    return spec;
}

ProblemSpec calibration_scalar(std::size_t steps)
{
    auto spec = base(1, 1, 1, steps);
    auto& r = spec.regimes[0];
    r.A = mat({{0.5}});
    r.C = mat({{0.5}});
    r.R = mat({{1}});
    r.G = mat({{1}});
    return spec;
}

ProblemSpec standard_two_regime(std::size_t steps)
{
    auto spec = base(2, 1, 2, steps);
    spec.gen.rates = MatSeries(mat({{-1.0, 1.0}, {2.0, -2.0}}));

    auto& r0 = spec.regimes[0];
    r0.A = mat({{0.2, 0.5}, {-0.3, -0.1}});
    r0.B = mat({{1.0}, {0.5}});
    r0.C = mat({{0.3, 0.0}, {0.1, 0.2}});
    r0.D = mat({{0.2}, {0.1}});
    r0.Q = mat({{1.0, 0.2}, {0.2, 0.5}});
    r0.R = mat({{1.0}});
    r0.G = mat({{1.0, 0.0}, {0.0, 0.5}});

    auto& r1 = spec.regimes[1];
    r1.A = mat({{-0.4, 0.2}, {0.1, 0.3}});
    r1.B = mat({{0.5}, {1.0}});
    r1.C = mat({{0.1, 0.2}, {0.0, 0.3}});
    r1.D = mat({{0.0}, {0.3}});
    r1.Q = mat({{0.5, 0.0}, {0.0, 1.0}});
    r1.R = mat({{2.0}});
    r1.G = mat({{0.5, 0.1}, {0.1, 1.0}});
    return spec;
}

ProblemSpec inhomogeneous_two_regime(std::size_t steps)
{
    auto spec = standard_two_regime(steps);
    auto& r0 = spec.regimes[0];
    r0.b = vec({0.1, -0.2});
    r0.sigma = vec({0.2, 0.1});
    r0.q = vec({0.3, -0.1});
    r0.rho = vec({0.2});
    r0.g = vec({0.5, -0.3});

    auto& r1 = spec.regimes[1];
    r1.b = vec({-0.1, 0.3});
    r1.sigma = vec({0.1, 0.3});
    r1.S = mat({{0.1, 0.2}});
    r1.q = vec({-0.2, 0.1});
    r1.rho = vec({-0.1});
    r1.g = vec({0.2, 0.4});
    return spec;
}

ProblemSpec decoupled_three_regime(std::size_t steps)
{
    auto spec = base(2, 1, 3, steps);
    auto& r0 = spec.regimes[0];
    r0.A = mat({{0.1, 0.4}, {-0.2, 0.0}});
    r0.B = mat({{1.0}, {0.0}});
    r0.C = mat({{0.2, 0.0}, {0.0, 0.1}});
    r0.Q = mat({{1.0, 0.0}, {0.0, 1.0}});
    r0.R = mat({{1.0}});
    r0.G = mat({{1.0, 0.0}, {0.0, 1.0}});

    auto& r1 = spec.regimes[1];
    r1.A = mat({{-0.5, 0.1}, {0.3, 0.2}});
    r1.B = mat({{0.3}, {1.0}});
    r1.D = mat({{0.2}, {0.0}});
    r1.Q = mat({{0.2, 0.1}, {0.1, 0.4}});
    r1.R = mat({{0.5}});
    r1.G = mat({{2.0, 0.5}, {0.5, 1.0}});

    auto& r2 = spec.regimes[2];
    r2.A = mat({{0.0, 1.0}, {-1.0, 0.0}});
    r2.B = mat({{0.5}, {0.5}});
    r2.C = mat({{0.1, 0.1}, {0.0, 0.1}});
    r2.D = mat({{0.1}, {0.1}});
    r2.S = mat({{0.1, 0.0}});
    r2.Q = mat({{0.3, 0.0}, {0.0, 0.3}});
    r2.R = mat({{1.5}});
    r2.G = mat({{0.0, 0.0}, {0.0, 0.0}});
    return spec;
}

ProblemSpec negative_weight(std::size_t steps)
{
    auto spec = base(1, 1, 1, steps);
    spec.regimes[0].R = mat({{-1}});
    return spec;
}

ProblemSpec redundant_control(std::size_t steps)
{
    auto spec = base(1, 2, 1, steps);
    auto& r = spec.regimes[0];
    r.B = mat({{1.0, 1.0}});
    r.R = mat({{1.0, 1.0}, {1.0, 1.0}});
    r.G = mat({{1.0}});
    return spec;
}

ProblemSpec blowup(std::size_t steps)
{
    auto spec = base(1, 1, 1, steps);
    auto& r = spec.regimes[0];
    r.B = mat({{1}});
    r.R = mat({{-1}});
    r.G = mat({{2}});
    return spec;
}

ProblemSpec zero_problem(std::size_t steps)
{
    auto spec = base(1, 1, 2, steps);
    spec.gen.rates = MatSeries(mat({{-1.0, 1.0}, {1.0, -1.0}}));
    return spec;
}

ProblemSpec noise_free(std::size_t steps)
{
    auto spec = base(2, 1, 1, steps);
    auto& r = spec.regimes[0];
    r.A = mat({{0.0, 1.0}, {-0.5, -0.2}});
    r.B = mat({{0.0}, {1.0}});
    r.b = vec({0.1, 0.0});
    r.Q = mat({{1.0, 0.0}, {0.0, 0.2}});
    r.S = mat({{0.1, 0.0}});
    r.R = mat({{0.5}});
    r.q = vec({0.2, -0.1});
    r.rho = vec({0.05});
    r.G = mat({{1.0, 0.2}, {0.2, 0.5}});
    r.g = vec({-0.3, 0.1});
    return spec;
}

ProblemSpec time_varying(std::size_t steps)
{
    auto spec = base(1, 1, 2, steps);
    std::vector<Mat> gen, A0, A1, R0, R1;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = spec.grid.node(k);
        const double up = 1.0 + t;
        const double down = 2.0 - t;
        gen.push_back(mat({{-up, up}, {down, -down}}));
        A0.push_back(mat({{0.3 * std::sin(2.0 * std::numbers::pi * t)}}));
        A1.push_back(mat({{-0.2 + 0.4 * t}}));
        R0.push_back(mat({{1.0 + 0.5 * t}}));
        R1.push_back(mat({{2.0 - t}}));
    }
    spec.gen.rates = MatSeries::per_node(std::move(gen));

    auto& r0 = spec.regimes[0];
    r0.A = MatSeries::per_node(std::move(A0));
    r0.B = mat({{1.0}});
    r0.C = mat({{0.2}});
    r0.Q = mat({{1.0}});
    r0.R = MatSeries::per_node(std::move(R0));
    r0.G = mat({{1.0}});
    r0.sigma = vec({0.1});

    auto& r1 = spec.regimes[1];
    r1.A = MatSeries::per_node(std::move(A1));
    r1.B = mat({{0.5}});
    r1.D = mat({{0.1}});
    r1.Q = mat({{0.5}});
    r1.R = MatSeries::per_node(std::move(R1));
    r1.G = mat({{2.0}});
    r1.q = vec({0.1});
    return spec;
}

ProblemFile Entry::file() const
{
    ProblemFile f;
    f.spec = make(steps);
    f.regime = regime;
    f.x0 = x0;
    f.paths = paths;
    f.seed = 1;
    return f;
}

const std::vector<Entry>& catalog()
{
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> e;
        auto add = [&](std::string name, std::string summary, std::function<ProblemSpec(std::size_t)> make,
                       std::size_t steps, Vec x0) {
            e.push_back(Entry{std::move(name), std::move(summary), std::move(make), steps, std::move(x0), 0, 10000});
        };
        add("scalar_analytic", "P(t) = 1/(1 + T - t), strongly regular",
            [](std::size_t s) { return scalar_analytic(s); }, 1000, vec({1.0}));
        add("calibration_scalar", "geometric Brownian state, cost X(T)^2",
            [](std::size_t s) { return calibration_scalar(s); }, 200, vec({1.0}));
        add("standard_two_regime", "two coupled regimes under the standard conditions",
            [](std::size_t s) { return standard_two_regime(s); }, 200, vec({1.0, -0.5}));
        add("inhomogeneous_two_regime", "standard_two_regime with affine terms",
            [](std::size_t s) { return inhomogeneous_two_regime(s); }, 200, vec({1.0, -0.5}));
        add("decoupled_three_regime", "three regimes, zero generator",
            [](std::size_t s) { return decoupled_three_regime(s); }, 200, vec({0.5, 0.5}));
        add("negative_weight", "R = -1, not convex", [](std::size_t s) { return negative_weight(s); }, 200,
            vec({1.0}));
        add("redundant_control", "singular R, regular but not strongly regular",
            [](std::size_t s) { return redundant_control(s); }, 1000, vec({1.0}));
        add("blowup", "indefinite Riccati escaping at T - t = 0.5", [](std::size_t s) { return blowup(s); }, 200,
            vec({1.0}));
        add("zero_problem", "all coefficients zero", [](std::size_t s) { return zero_problem(s); }, 100,
            vec({1.0}));
        add("noise_free", "deterministic two-dimensional problem with affine terms",
            [](std::size_t s) { return noise_free(s); }, 200, vec({1.0, 0.0}));
        add("time_varying", "time-dependent coefficients and generator",
            [](std::size_t s) { return time_varying(s); }, 200, vec({1.0}));
        return e;
    }();
    return entries;
}

const Entry& find(const std::string& name)
{
    for (const auto& e : catalog()) {
        if (e.name == name) return e;
    }
    throw OutOfRange("unknown instance '" + name + "'");
}

}  // namespace rslq::instances
