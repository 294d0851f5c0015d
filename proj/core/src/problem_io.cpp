#include "rslq/problem_io.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace rslq {

namespace {

std::string located(const std::string& source, std::size_t line, std::size_t column, const std::string& message)
{
    std::ostringstream os;
    os << source;
    if (line > 0) os << ':' << line << ':' << column;
    os << ": " << message;
    return os.str();
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const
    {
        const auto m = node.Mark();
        if (m.is_null()) throw ParseError(source_, 0, 0, message);
        throw ParseError(source_, static_cast<std::size_t>(m.line) + 1, static_cast<std::size_t>(m.column) + 1,
                         message);
    }

    void expect_map(const YAML::Node& node, const std::string& what) const
    {
        if (!node.IsMap()) fail(node, what + ": expected a mapping");
    }

    void only_keys(const YAML::Node& node, std::initializer_list<const char*> allowed, const std::string& what) const
    {
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) fail(kv.first, what + ": unknown key '" + key + "'");
        }
    }

    YAML::Node require(const YAML::Node& node, const char* key, const std::string& what) const
    {
        const auto child = node[key];
        if (!child) fail(node, what + ": missing key '" + key + "'");
        return child;
    }

    double real(const YAML::Node& node, const std::string& what) const
    {
        if (!node.IsScalar()) fail(node, what + ": expected a number");
        double v = 0.0;
        try {
            v = node.as<double>();
        } catch (const YAML::Exception&) {
            fail(node, what + ": '" + node.Scalar() + "' is not a number");
        }
        if (!std::isfinite(v)) fail(node, what + ": non-finite value");
        return v;
    }

    long long integer(const YAML::Node& node, const std::string& what) const
    {
        if (!node.IsScalar()) fail(node, what + ": expected an integer");
        try {
            return node.as<long long>();
        } catch (const YAML::Exception&) {
            fail(node, what + ": '" + node.Scalar() + "' is not an integer");
        }
    }

    std::size_t count(const YAML::Node& node, const std::string& what, long long min) const
    {
        const auto v = integer(node, what);
        if (v < min) fail(node, what + ": must be at least " + std::to_string(min));
        return static_cast<std::size_t>(v);
    }

    Mat matrix(const YAML::Node& node, Index rows, Index cols, const std::string& what) const
    {
        if (node.IsScalar()) {
            if (rows != 1 || cols != 1) fail(node, what + ": expected a " + shape(rows, cols) + " matrix");
            return Mat::Constant(1, 1, real(node, what));
        }
        if (!node.IsSequence() || static_cast<Index>(node.size()) != rows) {
            fail(node, what + ": expected " + std::to_string(rows) + " rows (" + shape(rows, cols) + ")");
        }
        Mat m(rows, cols);
        for (Index r = 0; r < rows; ++r) {
            const auto row = node[static_cast<std::size_t>(r)];
            if (!row.IsSequence() || static_cast<Index>(row.size()) != cols) {
                fail(row, what + ": row " + std::to_string(r) + " needs " + std::to_string(cols) + " entries");
            }
            for (Index c = 0; c < cols; ++c) m(r, c) = real(row[static_cast<std::size_t>(c)], what);
        }
        return m;
    }

    Vec vector(const YAML::Node& node, Index len, const std::string& what) const
    {
        if (node.IsScalar()) {
            if (len != 1) fail(node, what + ": expected a list of " + std::to_string(len) + " numbers");
            return Vec::Constant(1, real(node, what));
        }
        if (!node.IsSequence() || static_cast<Index>(node.size()) != len) {
            fail(node, what + ": expected a list of " + std::to_string(len) + " numbers");
        }
        Vec v(len);
        for (Index i = 0; i < len; ++i) v(i) = real(node[static_cast<std::size_t>(i)], what);
        return v;
    }

    // Constant value or {nodes: [...]} with one sample per grid node.
    template <class V, class One>
    Series<V> series(const YAML::Node& node, std::size_t nodes, const std::string& what, One&& one) const
    {
        if (!node.IsMap()) return Series<V>(one(node, what));
        only_keys(node, {"nodes"}, what);
        const auto list = require(node, "nodes", what);
        if (!list.IsSequence() || list.size() != nodes) {
            fail(list, what + ": expected " + std::to_string(nodes) + " node samples (steps + 1)");
        }
        std::vector<V> samples;
        samples.reserve(nodes);
        for (std::size_t k = 0; k < nodes; ++k) {
            samples.push_back(one(list[k], what + " (sample " + std::to_string(k) + ")"));
        }
        return Series<V>::per_node(std::move(samples));
    }

    MatSeries mat_series(const YAML::Node& node, Index rows, Index cols, std::size_t nodes,
                         const std::string& what) const
    {
        return series<Mat>(node, nodes, what,
                           [&](const YAML::Node& n, const std::string& w) { return matrix(n, rows, cols, w); });
    }

    VecSeries vec_series(const YAML::Node& node, Index len, std::size_t nodes, const std::string& what) const
    {
        return series<Vec>(node, nodes, what, [&](const YAML::Node& n, const std::string& w) { return vector(n, len, w); });
    }

    const std::string& source() const { return source_; }

private:
    static std::string shape(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

    std::string source_;
};

ProblemFile read(const YAML::Node& root, const Reader& in)
{
    if (!root || root.IsNull()) throw ParseError(in.source(), 0, 0, "empty problem file");
    in.expect_map(root, "problem");
    in.only_keys(root, {"dimensions", "grid", "generator", "regimes", "initial", "simulation"}, "problem");

    ProblemFile file;
    auto& spec = file.spec;

    const auto dims = in.require(root, "dimensions", "problem");
    in.expect_map(dims, "dimensions");
    in.only_keys(dims, {"n", "m", "regimes"}, "dimensions");
    spec.n = static_cast<Index>(in.count(in.require(dims, "n", "dimensions"), "dimensions.n", 1));
    spec.m = static_cast<Index>(in.count(in.require(dims, "m", "dimensions"), "dimensions.m", 1));
    const std::size_t D = in.count(in.require(dims, "regimes", "dimensions"), "dimensions.regimes", 1);

    const auto grid = in.require(root, "grid", "problem");
    in.expect_map(grid, "grid");
    in.only_keys(grid, {"t0", "T", "steps"}, "grid");
    const double t0 = grid["t0"] ? in.real(grid["t0"], "grid.t0") : 0.0;
    const double T = in.real(in.require(grid, "T", "grid"), "grid.T");
    const std::size_t steps = in.count(in.require(grid, "steps", "grid"), "grid.steps", 2);
    if (!(t0 < T)) in.fail(grid, "grid: t0 must be smaller than T");
    spec.grid = TimeGrid::make(t0, T, steps);
    const std::size_t nodes = spec.grid.nodes();
    const auto d = static_cast<Index>(D);

    if (const auto gen = root["generator"]) {
        spec.gen.rates = in.mat_series(gen, d, d, nodes, "generator");
    } else if (D == 1) {
        spec.gen.rates = MatSeries(Mat::Zero(1, 1));
    } else {
        in.fail(root, "problem: missing key 'generator'");
    }

    const auto regimes = in.require(root, "regimes", "problem");
    if (!regimes.IsSequence() || regimes.size() != D) {
        in.fail(regimes, "regimes: expected a list of " + std::to_string(D) + " entries");
    }
    const Index n = spec.n;
    const Index m = spec.m;
    for (std::size_t i = 0; i < D; ++i) {
        const auto node = regimes[i];
        const std::string what = "regime " + std::to_string(i);
        auto rc = RegimeCoeffs::zero(n, m);
        if (!node.IsNull()) {
            in.expect_map(node, what);
            in.only_keys(node, {"A", "B", "C", "D", "b", "sigma", "Q", "S", "R", "q", "rho", "G", "g"}, what);
            auto mat = [&](const char* key, MatSeries& dst, Index r, Index c) {
                if (node[key]) dst = in.mat_series(node[key], r, c, nodes, what + " " + key);
            };
            auto vec = [&](const char* key, VecSeries& dst, Index len) {
                if (node[key]) dst = in.vec_series(node[key], len, nodes, what + " " + key);
            };
            mat("A", rc.A, n, n);
            mat("B", rc.B, n, m);
            mat("C", rc.C, n, n);
            mat("D", rc.D, n, m);
            vec("b", rc.b, n);
            vec("sigma", rc.sigma, n);
            mat("Q", rc.Q, n, n);
            mat("S", rc.S, m, n);
            mat("R", rc.R, m, m);
            vec("q", rc.q, n);
            vec("rho", rc.rho, m);
            if (node["G"]) rc.G = in.matrix(node["G"], n, n, what + " G");
            if (node["g"]) rc.g = in.vector(node["g"], n, what + " g");
        }
        spec.regimes.push_back(std::move(rc));
    }

    const auto report = validate(spec);
    if (!report.ok()) {
        const auto& first = report.violations.front();
        in.fail(first.rfind("generator", 0) == 0 && root["generator"] ? root["generator"] : regimes, first);
    }

    file.x0 = Vec::Zero(n);
    if (const auto init = root["initial"]) {
        in.expect_map(init, "initial");
        in.only_keys(init, {"regime", "x0"}, "initial");
        if (init["regime"]) {
            file.regime = in.count(init["regime"], "initial.regime", 0);
            if (file.regime >= D) in.fail(init["regime"], "initial.regime: out of range");
        }
        if (init["x0"]) file.x0 = in.vector(init["x0"], n, "initial.x0");
    }
    if (const auto sim = root["simulation"]) {
        in.expect_map(sim, "simulation");
        in.only_keys(sim, {"paths", "seed"}, "simulation");
        if (sim["paths"]) file.paths = in.count(sim["paths"], "simulation.paths", 1);
        if (sim["seed"]) {
            try {
                file.seed = sim["seed"].as<std::uint64_t>();
            } catch (const YAML::Exception&) {
                in.fail(sim["seed"], "simulation.seed: expected an unsigned integer");
            }
        }
    }
    return file;
}

/// Shortest decimal form that parses back to the same double.
std::string number(double x)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void emit_matrix(YAML::Emitter& out, const Mat& m)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (Index r = 0; r < m.rows(); ++r) {
        out << YAML::Flow << YAML::BeginSeq;
        for (Index c = 0; c < m.cols(); ++c) out << number(m(r, c));
        out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
}

void emit_vector(YAML::Emitter& out, const Vec& v)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (Index i = 0; i < v.size(); ++i) out << number(v(i));
    out << YAML::EndSeq;
}

template <class V, class Fn>
void emit_series(YAML::Emitter& out, const Series<V>& s, Fn&& one)
{
    if (s.is_constant()) {
        one(out, s.at_node(0));
        return;
    }
    out << YAML::BeginMap << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
    for (const auto& v : s.samples()) one(out, v);
    out << YAML::EndSeq << YAML::EndMap;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(located(source, line, column, message)), line_(line), column_(column)
{
}

bool ProblemFile::operator==(const ProblemFile& o) const
{
    return spec == o.spec && regime == o.regime && x0.size() == o.x0.size() && x0 == o.x0 && paths == o.paths &&
           seed == o.seed;
}

ProblemFile parse_problem(const std::string& text, const std::string& source)
{
    Reader in(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(source, static_cast<std::size_t>(e.mark.line) + 1,
                         static_cast<std::size_t>(e.mark.column) + 1, e.msg);
    }
    try {
        return read(root, in);
    } catch (const InvalidInput& e) {
        throw ParseError(source, 0, 0, e.what());
    }
}

ProblemFile load_problem(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw ParseError(path.string(), 0, 0, "cannot open file");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_problem(ss.str(), path.string());
}

std::string emit_problem(const ProblemFile& file)
{
    const auto& spec = file.spec;
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "dimensions" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "n"
        << YAML::Value << spec.n << YAML::Key << "m" << YAML::Value << spec.m << YAML::Key << "regimes"
        << YAML::Value << spec.num_regimes() << YAML::EndMap;
    out << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "t0" << YAML::Value
        << number(spec.grid.t0) << YAML::Key << "T" << YAML::Value << number(spec.grid.T) << YAML::Key << "steps"
        << YAML::Value << spec.grid.steps << YAML::EndMap;

    auto mat = [](YAML::Emitter& o, const Mat& m) { emit_matrix(o, m); };
    auto vec = [](YAML::Emitter& o, const Vec& v) { emit_vector(o, v); };
    out << YAML::Key << "generator" << YAML::Value;
    emit_series(out, spec.gen.rates, mat);

    out << YAML::Key << "regimes" << YAML::Value << YAML::BeginSeq;
    for (const auto& rc : spec.regimes) {
        out << YAML::BeginMap;
        const std::pair<const char*, const MatSeries*> mats[] = {
            {"A", &rc.A}, {"B", &rc.B}, {"C", &rc.C}, {"D", &rc.D}, {"Q", &rc.Q}, {"S", &rc.S}, {"R", &rc.R}};
        const std::pair<const char*, const VecSeries*> vecs[] = {
            {"b", &rc.b}, {"sigma", &rc.sigma}, {"q", &rc.q}, {"rho", &rc.rho}};
        for (const auto& [key, s] : mats) {
            out << YAML::Key << key << YAML::Value;
            emit_series(out, *s, mat);
        }
        for (const auto& [key, s] : vecs) {
            out << YAML::Key << key << YAML::Value;
            emit_series(out, *s, vec);
        }
        out << YAML::Key << "G" << YAML::Value;
        emit_matrix(out, rc.G);
        out << YAML::Key << "g" << YAML::Value;
        emit_vector(out, rc.g);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "initial" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "regime"
        << YAML::Value << file.regime << YAML::Key << "x0" << YAML::Value;
    emit_vector(out, file.x0);
    out << YAML::EndMap;
    out << YAML::Key << "simulation" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "paths"
        << YAML::Value << file.paths << YAML::Key << "seed" << YAML::Value << file.seed << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void save_problem(const std::filesystem::path& path, const ProblemFile& file)
{
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot write " + path.string());
    os << emit_problem(file);
    if (!os) throw InvalidInput("failed writing " + path.string());
}

}  // namespace rslq
