#pragma once

#include "rslq/matcore.hpp"
#include "rslq/model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace rslq {

/// Malformed or inadmissible problem file. line() and column() are 1-based;
/// 0 means the position is unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& message);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A problem together with its initial condition and default simulation settings.
struct ProblemFile {
    ProblemSpec spec;
    std::size_t regime = 0;  // initial regime, 0-based
    Vec x0;
    std::size_t paths = 10000;
    std::uint64_t seed = 1;

    bool operator==(const ProblemFile& o) const;
};

/// YAML problem file:
///
///   dimensions: {n: 1, m: 1, regimes: 2}
///   grid: {t0: 0, T: 1, steps: 1000}
///   generator: [[-1, 1], [1, -1]]          # or {nodes: [<matrix>, ...]}
///   regimes:
///     - {A: [[0]], B: [[1]], R: [[1]], G: [[1]]}
///     - ...
///   initial: {regime: 0, x0: [1]}
///   simulation: {paths: 10000, seed: 1}
///
/// Regime keys are A, B, C, D, b, sigma, Q, S, R, q, rho, G, g. Missing keys
/// are zero. Matrices are lists of rows, vectors are lists; a bare number is
/// accepted for a 1x1 matrix or a length-1 vector. Any time-dependent
/// coefficient may be given as {nodes: [...]} with steps + 1 samples.
/// Regimes are numbered from 0.
ProblemFile parse_problem(const std::string& text, const std::string& source = "<input>");
ProblemFile load_problem(const std::filesystem::path& path);

/// Writes the canonical form; numbers use the shortest decimal that round-trips, so
/// parse_problem(emit_problem(f)) == f.
std::string emit_problem(const ProblemFile& file);
void save_problem(const std::filesystem::path& path, const ProblemFile& file);

}  // namespace rslq
