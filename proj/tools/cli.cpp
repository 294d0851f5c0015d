#include "cli.hpp"

#include "CLI11.hpp"
#include "rslq/affine.hpp"
#include "rslq/parallel.hpp"
#include "rslq/sim.hpp"
#include "rslq/verify.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace rslq::cli {

namespace fs = std::filesystem;

namespace {

std::string timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name)
{
    fs::create_directories(cfg.out);
    std::ofstream os(cfg.out / name);
    if (!os) throw InvalidInput("cannot write " + (cfg.out / name).string());
    os << std::setprecision(17);
    return os;
}

SimOptions sim_options(const RunConfig& cfg, const ProblemFile& file)
{
    SimOptions o;
    o.paths = file.paths;
    o.seed = file.seed;
    o.threads = resolve_threads(cfg.threads);
    return o;
}

void write_riccati(const RunConfig& cfg, const ProblemFile& file, const RiccatiSolution& ric)
{
    auto os = open_output(cfg, "riccati.csv");
    const Index n = file.spec.n;
    os << metadata_line(cfg, file) << '\n' << "t,regime";
    for (Index r = 0; r < n; ++r) {
        for (Index c = r; c < n; ++c) os << ",P_" << r << '_' << c;
    }
    os << ",min_eig_R_hat\n";
    for (std::size_t k = 0; k < ric.grid.nodes(); ++k) {
        for (std::size_t i = 0; i < ric.regimes(); ++i) {
            os << ric.grid.node(k) << ',' << i;
            for (Index r = 0; r < n; ++r) {
                for (Index c = r; c < n; ++c) os << ',' << ric.P[i][k](r, c);
            }
            os << ',' << ric.min_eig_R_hat[i][k] << '\n';
        }
    }
}

void write_affine(const RunConfig& cfg, const ProblemFile& file, const AffineSolution& aff)
{
    auto os = open_output(cfg, "affine.csv");
    os << metadata_line(cfg, file) << '\n' << "t,regime";
    for (Index j = 0; j < file.spec.n; ++j) os << ",eta_" << j;
    for (Index j = 0; j < file.spec.m; ++j) os << ",v_" << j;
    os << ",value_integral\n";
    for (std::size_t k = 0; k < aff.grid.nodes(); ++k) {
        for (std::size_t i = 0; i < aff.regimes(); ++i) {
            os << aff.grid.node(k) << ',' << i;
            for (Index j = 0; j < file.spec.n; ++j) os << ',' << aff.eta[i][k](j);
            for (Index j = 0; j < file.spec.m; ++j) os << ',' << aff.v_star[i][k](j);
            os << ',' << aff.value_integral[i][k] << '\n';
        }
    }
}

void write_classification(const RunConfig& cfg, const std::string& body)
{
    fs::create_directories(cfg.out);
    std::ofstream os(cfg.out / "classification.txt");
    os << body;
}

// Maps library errors to exit codes.
template <class Fn>
int guarded(const RunConfig& cfg, std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        std::ostringstream os;
        os << "diverged\nfirst bad node: " << e.node() << "\nt: " << e.time() << '\n' << e.what() << '\n';
        write_classification(cfg, os.str());
        return kDivergence;
    } catch (const NonConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kDivergence;
    } catch (const NotStronglyRegularError& e) {
        err << "error: " << e.what() << '\n';
        write_classification(cfg, std::string("not_strongly_regular\n") + e.what() + '\n');
        return kNotRegular;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const OutOfRange& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    }
}

int solve_common(const RunConfig& cfg, bool iterate, std::ostream& out)
{
    const auto file = load(cfg);
    const auto ric = iterate ? iterate_strongly_regular(file.spec, cfg.iteration, cfg.regularity)
                             : solve_riccati_direct(file.spec, cfg.regularity);
    write_riccati(cfg, file, ric);

    std::ostringstream text;
    text << ric.classification.describe();
    if (iterate) {
        text << "iterations: " << ric.iteration_trace.size() << '\n';
        auto os = open_output(cfg, "iteration.csv");
        os << metadata_line(cfg, file) << '\n' << "iteration,sup_delta,min_eig_P_n_minus_P_next\n";
        for (std::size_t k = 0; k < ric.iteration_trace.size(); ++k) {
            os << k + 1 << ',' << ric.iteration_trace[k] << ',' << ric.monotonicity_trace[k] << '\n';
        }
    }
    int code = kSuccess;
    if (ric.classification.is_regular()) {
        const auto aff = solve_eta(file.spec, ric);
        write_affine(cfg, file, aff);
        if (!aff.closed_loop_valid) text << "closed loop not valid: " << aff.range_violation << '\n';
    } else {
        code = kNotRegular;
    }
    write_classification(cfg, text.str());
    out << text.str();
    return code;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::ptrdiff_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
        }
        return -1;
    }
};

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::optional<Table> read_csv(const fs::path& path)
{
    std::ifstream is(path);
    if (!is) return std::nullopt;
    Table t;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) {
            t.header = split(line);
        } else {
            t.rows.push_back(split(line));
        }
    }
    return t;
}

}  // namespace

ProblemFile load(const RunConfig& cfg)
{
    auto file = load_problem(cfg.problem);
    if (cfg.steps) {
        try {
            file.spec = with_steps(file.spec, *cfg.steps);
        } catch (const InvalidInput& e) {
            throw ParseError(cfg.problem.string(), 0, 0, std::string("--steps: ") + e.what());
        }
    }
    if (cfg.paths) file.paths = *cfg.paths;
    if (cfg.seed) file.seed = *cfg.seed;
    return file;
}

std::string metadata_line(const RunConfig& cfg, const ProblemFile& file)
{
    const auto& r = cfg.regularity;
    std::ostringstream os;
    os << "# rslq " << cfg.command << " problem=" << cfg.problem.filename().string() << " seed=" << file.seed
       << " steps=" << file.spec.grid.steps << " paths=" << file.paths << " threads=" << resolve_threads(cfg.threads)
       << " pinv_tol=" << r.pinv_tol << " strong_tol=" << r.strong_tol << " psd_tol=" << r.psd_tol
       << " range_tol=" << r.range_tol << " conv_tol=" << cfg.iteration.conv_tol
       << " max_iter=" << cfg.iteration.max_iter << " timestamp=" << timestamp();
    return os.str();
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(cfg, err, [&] { return solve_common(cfg, false, out); });
}

int cmd_iterate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(cfg, err, [&] { return solve_common(cfg, true, out); });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(cfg, err, [&] {
        const auto file = load(cfg);
        const auto& spec = file.spec;
        const auto ric = solve_riccati_direct(spec, cfg.regularity);
        if (!ric.classification.is_regular()) {
            err << "error: Riccati solution is " << ric.classification.name() << ": " << ric.classification.reason
                << '\n';
            return static_cast<int>(kNotRegular);
        }
        const auto aff = solve_eta(spec, ric);
        if (!aff.closed_loop_valid) {
            err << "error: " << aff.range_violation << '\n';
            return static_cast<int>(kNotRegular);
        }
        const auto opts = sim_options(cfg, file);
        const auto est = mc_value(spec, ric, aff, file.regime, file.x0, opts);
        const double value = value_function(ric, aff, spec.grid.t0, file.regime, file.x0);

        auto os = open_output(cfg, "value_mc.csv");
        os << metadata_line(cfg, file) << '\n'
           << "mean,std_error,paths,seed,value_function\n"
           << est.mean << ',' << est.std_error << ',' << est.paths << ',' << est.seed << ',' << value << '\n';

        if (cfg.dump_paths > 0) {
            const auto law = optimal_feedback(ric, aff);
            fs::create_directories(cfg.out / "paths");
            for (std::size_t p = 0; p < std::min(cfg.dump_paths, opts.paths); ++p) {
                const auto seeds = path_seeds(opts.seed, p);
                const auto chain = simulate_chain(spec.gen, spec.grid, file.regime, seeds.chain);
                const auto path =
                    simulate_feedback(spec, chain, law, file.x0, brownian_increments(spec.grid, seeds.noise));
                std::ofstream ps(cfg.out / "paths" / ("path_" + std::to_string(p) + ".csv"));
                ps << metadata_line(cfg, file) << '\n';
                write_path_csv(ps, spec, chain, path);
            }
        }
        out << std::setprecision(10) << "mc mean " << est.mean << " (SE " << est.std_error << ", " << est.paths
            << " paths, seed " << est.seed << ")\nvalue function " << value << '\n';
        return static_cast<int>(kSuccess);
    });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(cfg, err, [&] {
        const auto file = load(cfg);
        VerifyOptions vo;
        vo.regularity = cfg.regularity;
        vo.iteration = cfg.iteration;
        vo.sim = sim_options(cfg, file);
        vo.i0 = file.regime;
        vo.x0 = file.x0;
        const auto report = run_verification(file.spec, vo);

        auto os = open_output(cfg, "verify.csv");
        os << metadata_line(cfg, file) << '\n';
        report.write_csv(os);
        std::ofstream txt(cfg.out / "verify.txt");
        report.write_text(txt);
        report.write_text(out);
        return static_cast<int>(report.all_passed() ? kSuccess : kVerificationFailure);
    });
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    std::ostringstream s;
    bool any = false;

    std::ifstream cls(cfg.out / "classification.txt");
    if (cls) {
        std::string first;
        std::getline(cls, first);
        s << "classification: " << first << '\n';
        any = true;
    }
    if (const auto t = read_csv(cfg.out / "riccati.csv")) {
        std::set<std::string> regimes;
        std::set<std::string> times;
        double min_eig = std::numeric_limits<double>::infinity();
        const auto col = t->column("min_eig_R_hat");
        for (const auto& row : t->rows) {
            if (row.size() < 2) continue;
            times.insert(row[0]);
            regimes.insert(row[1]);
            if (col >= 0 && static_cast<std::size_t>(col) < row.size()) {
                min_eig = std::min(min_eig, std::stod(row[static_cast<std::size_t>(col)]));
            }
        }
        s << "riccati: " << times.size() << " nodes, " << regimes.size() << " regimes, min eig R_hat "
          << std::setprecision(10) << min_eig << '\n';
        any = true;
    }
    if (const auto t = read_csv(cfg.out / "affine.csv")) {
        s << "affine: " << t->rows.size() << " rows\n";
        any = true;
    }
    if (const auto t = read_csv(cfg.out / "value_mc.csv"); t && !t->rows.empty()) {
        const auto& row = t->rows.front();
        s << "value_mc:";
        for (std::size_t i = 0; i < t->header.size() && i < row.size(); ++i) {
            s << ' ' << t->header[i] << '=' << row[i];
        }
        s << '\n';
        any = true;
    }
    if (const auto t = read_csv(cfg.out / "verify.csv")) {
        const auto pass_col = t->column("pass");
        std::size_t passed = 0;
        std::vector<std::string> failed;
        for (const auto& row : t->rows) {
            if (pass_col >= 0 && static_cast<std::size_t>(pass_col) < row.size() &&
                row[static_cast<std::size_t>(pass_col)] == "pass") {
                ++passed;
            } else if (!row.empty()) {
                failed.push_back(row[0]);
            }
        }
        s << "verify: " << passed << '/' << t->rows.size() << " checks passed";
        for (const auto& f : failed) s << "; failed " << f;
        s << '\n';
        any = true;
    }
    if (!any) {
        err << "error: no results found in " << cfg.out.string() << '\n';
        return kParseError;
    }
    std::ofstream(cfg.out / "summary.txt") << s.str();
    out << s.str();
    return kSuccess;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Regime-switching stochastic LQ solver and verifier"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string problem;
    std::string outdir = ".";
    std::size_t steps = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* sub, bool needs_problem) {
        auto* p = sub->add_option("--problem", problem, "Problem file (YAML)");
        if (needs_problem) p->required()->check(CLI::ExistingFile);
        sub->add_option("--out", outdir, "Output directory")->capture_default_str();
        sub->add_option("--steps", steps, "Override grid steps")->check(CLI::Range(std::size_t{2}, SIZE_MAX));
        sub->add_option("--paths", paths, "Monte-Carlo paths")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");
        sub->add_option("--pinv-tol", cfg.regularity.pinv_tol, "Pseudo-inverse relative tolerance")
            ->check(CLI::Range(0.0, 1.0));
        sub->add_option("--strong-tol", cfg.regularity.strong_tol, "Strong regularity threshold");
        sub->add_option("--conv-tol", cfg.iteration.conv_tol, "Iteration convergence tolerance");
        sub->add_option("--max-iter", cfg.iteration.max_iter, "Iteration limit");
    };
    common(app.add_subcommand("solve", "Solve the Riccati and offset equations"), true);
    common(app.add_subcommand("iterate", "Solve by successive Lyapunov equations"), true);
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo value under the optimal feedback");
    common(simulate, true);
    simulate->add_option("--dump-paths", cfg.dump_paths, "Write the first N closed-loop paths as CSV");
    common(app.add_subcommand("verify", "Run the verification suite"), true);
    common(app.add_subcommand("report", "Summarize results in --out"), false);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kParseError;
    }

    const auto* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    cfg.problem = problem;
    cfg.out = outdir;
    if (sub->count("--steps")) cfg.steps = steps;
    if (sub->count("--paths")) cfg.paths = paths;
    if (sub->count("--seed")) cfg.seed = seed;

    if (cfg.command == "solve") return cmd_solve(cfg, out, err);
    if (cfg.command == "iterate") return cmd_iterate(cfg, out, err);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    return cmd_report(cfg, out, err);
}

}  // namespace rslq::cli
