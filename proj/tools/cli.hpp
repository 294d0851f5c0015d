#pragma once

#include "rslq/problem_io.hpp"
#include "rslq/riccati.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rslq::cli {

enum ExitCode : int {
    kSuccess = 0,
    kParseError = 1,
    kNotRegular = 2,
    kDivergence = 3,
    kVerificationFailure = 4,
};

struct RunConfig {
    std::string command;
    std::filesystem::path problem;
    std::filesystem::path out = ".";
    std::optional<std::size_t> steps;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;  // 0: hardware concurrency
    RegularityOptions regularity;
    IterationOptions iteration;
    std::size_t dump_paths = 0;
};

/// Problem file with the command-line overrides applied.
ProblemFile load(const RunConfig& cfg);

/// "# rslq <command> key=value ..." metadata line (without newline).
std::string metadata_line(const RunConfig& cfg, const ProblemFile& file);

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_iterate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses arguments (argv[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rslq::cli
