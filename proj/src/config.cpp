#include "nq/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <span>
#include <fstream>
#include <sstream>

#include "nq/errors.hpp"

namespace nq {
namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

double to_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        fail(ErrorKind::ConfigError, what + ": not a number: '" + t + "'");
    return v;
}

long to_integer(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        fail(ErrorKind::ConfigError, what + ": not an integer: '" + t + "'");
    return v;
}

std::vector<double> number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) out.push_back(to_double(token, what));
        token.clear();
    };
    for (char c : text) {
        if (c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            token += c;
    }
    flush();
    return out;
}

class Section {
public:
    Section(std::string name, const std::map<std::string, std::string>* keys) : name_(std::move(name)), keys_(keys) {}

    bool has(const std::string& k) const { return keys_ && keys_->count(k); }
    std::string text(const std::string& k) const {
        if (!has(k)) fail(ErrorKind::ConfigError, "[" + name_ + "] missing key '" + k + "'");
        return keys_->at(k);
    }
    double number(const std::string& k) const { return to_double(text(k), "[" + name_ + "] " + k); }
    double number_or(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }
    long integer(const std::string& k) const { return to_integer(text(k), "[" + name_ + "] " + k); }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    const std::map<std::string, std::string>* keys_;
};

Section section(const IniSections& ini, const std::string& name) {
    const auto it = ini.find(name);
    return Section(name, it == ini.end() ? nullptr : &it->second);
}

DiscreteField weight_field(const Section& s, const GridDomain& g) {
    const std::string kind = s.has("kind") ? trim(s.text("kind")) : "constant";
    std::vector<double> v(g.n());
    if (kind == "constant") {
        std::fill(v.begin(), v.end(), s.number("value"));
    } else if (kind == "affine") {
        const double c0 = s.number_or("intercept", 0.0), c1 = s.number("slope");
        for (int i = 0; i < g.n(); ++i) v[i] = c0 + c1 * g.node(i);
    } else if (kind == "step") {
        const double at = s.number("at"), left = s.number("left"), right = s.number("right");
        for (int i = 0; i < g.n(); ++i) v[i] = g.node(i) < at ? left : right;
    } else if (kind == "values") {
        v = number_list(s.text("values"), "[" + s.name() + "] values");
        if (static_cast<int>(v.size()) != g.n())
            fail(ErrorKind::ConfigError, "[" + s.name() + "] values has " + std::to_string(v.size()) +
                                             " entries, grid has " + std::to_string(g.n()) + " nodes");
    } else {
        fail(ErrorKind::ConfigError, "[" + s.name() + "] unknown weight kind '" + kind + "'");
    }
    return DiscreteField(g, std::move(v));
}

GridDomain grid_of(const IniSections& ini) {
    const Section g = section(ini, "grid");
    const long n = g.integer("n");
    if (n < 2 || n > 100000000) fail(ErrorKind::ConfigError, "[grid] n out of range");
    return build_grid(g.number("a"), g.number("b"), static_cast<int>(n));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string joined(std::span<const double> v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

void write_grid(std::ostringstream& o, const GridDomain& g) {
    o << "\n[grid]\na = " << fmt(g.a()) << "\nb = " << fmt(g.b()) << "\nn = " << g.n() << '\n';
}

void write_weight(std::ostringstream& o, const std::string& header, const DiscreteField& f) {
    o << "\n[" << header << "]\nkind = values\nvalues = " << joined(f.values()) << '\n';
}

}  // namespace

IniSections parse_ini(const std::string& text) {
    IniSections out;
    std::string current;
    out[current];
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // '#' comments anywhere, ';' only at the start of a line.
        std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty() || body[0] == ';') continue;
        if (body.front() == '[') {
            if (body.back() != ']') fail(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": bad header");
            current = trim(body.substr(1, body.size() - 2));
            if (out.count(current) && !out[current].empty())
                fail(ErrorKind::ConfigError, "duplicate section [" + current + "]");
            out[current];
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) fail(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": empty key");
        if (out[current].count(key))
            fail(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[current][key] = trim(body.substr(eq + 1));
    }
    return out;
}

SymmetricMatrix parse_matrix_csv(const std::string& text) {
    std::vector<double> entries;
    int rows = 0;
    std::size_t cols = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto row = number_list(line, "matrix csv");
        if (rows == 0) cols = row.size();
        if (row.size() != cols) fail(ErrorKind::ConfigError, "matrix csv: ragged rows");
        entries.insert(entries.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0 || static_cast<std::size_t>(rows) != cols) fail(ErrorKind::ConfigError, "matrix csv must be square");
    return SymmetricMatrix(rows, std::move(entries));
}

ProblemSpec parse_spec(const std::string& text, const std::filesystem::path& base_dir) {
    const IniSections ini = parse_ini(text);
    const Section prob = section(ini, "problem");
    const std::string model = trim(prob.text("model"));
    const double reg = prob.number_or("regularization", 0.0);

    if (model == "linear_matrix") {
        const Section m = section(ini, "matrix");
        if (m.has("csv")) return ProblemSpec(LinearMatrix{parse_matrix_csv(read_text_file(base_dir / m.text("csv")))});
        const long dim = m.integer("dim");
        if (dim < 1 || dim > 100000) fail(ErrorKind::ConfigError, "[matrix] dim out of range");
        auto entries = number_list(m.text("entries"), "[matrix] entries");
        if (entries.size() != static_cast<std::size_t>(dim * dim))
            fail(ErrorKind::ConfigError, "[matrix] entries needs dim*dim values");
        return ProblemSpec(LinearMatrix{SymmetricMatrix(static_cast<int>(dim), std::move(entries))});
    }

    const GridDomain g = grid_of(ini);
    if (model == "general_convex_concave") {
        std::vector<WeightedPower> terms;
        for (int k = 1;; ++k) {
            const std::string name = "term." + std::to_string(k);
            if (!ini.count(name)) break;
            const Section t = section(ini, name);
            terms.push_back({t.number("gamma"), weight_field(t, g)});
        }
        for (const auto& [name, keys] : ini)
            if (name.rfind("term.", 0) == 0 && !keys.empty()) {
                const std::string idx = name.substr(5);
                const long k = to_integer(idx, "section [" + name + "]");
                if (k < 1 || k > static_cast<long>(terms.size()))
                    fail(ErrorKind::ConfigError, "term sections must be numbered 1, 2, ... without gaps");
            }
        if (terms.empty()) fail(ErrorKind::ConfigError, "general_convex_concave needs at least one [term.N]");
        return ProblemSpec(GeneralConvexConcave{prob.number("p"), prob.number("q"), std::move(terms)}, reg);
    }
    const DiscreteField f = weight_field(section(ini, "weight"), g);
    if (model == "indefinite_scalar") return ProblemSpec(IndefiniteScalar{prob.number("p"), prob.number("gamma"), f}, reg);
    if (model == "convex_concave_scalar")
        return ProblemSpec(ConvexConcaveScalar{prob.number("p"), prob.number("q"), prob.number("gamma"), f}, reg);
    if (model == "convex_concave_system")
        return ProblemSpec(
            ConvexConcaveSystem{prob.number("p"), prob.number("q"), prob.number("alpha"), prob.number("beta"), f}, reg);
    if (model == "indefinite_system")
        return ProblemSpec(
            IndefiniteSystem{prob.number("p"), prob.number("q"), prob.number("alpha"), prob.number("beta"), f}, reg);
    fail(ErrorKind::ConfigError, "unknown model '" + model + "'");
}

std::string format_spec(const ProblemSpec& spec) {
    std::ostringstream o;
    o << "[problem]\nmodel = " << spec.tag() << '\n';
    if (spec.regularization() != 0) o << "regularization = " << fmt(spec.regularization()) << '\n';
    auto kv = [&](const char* k, double v) { o << k << " = " << fmt(v) << '\n'; };
    if (const auto* m = spec.as<LinearMatrix>()) {
        const int d = m->A.dim();
        std::vector<double> e;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) e.push_back(m->A(i, j));
        o << "\n[matrix]\ndim = " << d << "\nentries = " << joined(e) << '\n';
    } else if (const auto* m = spec.as<IndefiniteScalar>()) {
        kv("p", m->p), kv("gamma", m->gamma);
        write_grid(o, m->f.domain()), write_weight(o, "weight", m->f);
    } else if (const auto* m = spec.as<ConvexConcaveScalar>()) {
        kv("p", m->p), kv("q", m->q), kv("gamma", m->gamma);
        write_grid(o, m->f.domain()), write_weight(o, "weight", m->f);
    } else if (const auto* m = spec.as<ConvexConcaveSystem>()) {
        kv("p", m->p), kv("q", m->q), kv("alpha", m->alpha), kv("beta", m->beta);
        write_grid(o, m->f.domain()), write_weight(o, "weight", m->f);
    } else if (const auto* m = spec.as<IndefiniteSystem>()) {
        kv("p", m->p), kv("q", m->q), kv("alpha", m->alpha), kv("beta", m->beta);
        write_grid(o, m->f.domain()), write_weight(o, "weight", m->f);
    } else if (const auto* m = spec.as<GeneralConvexConcave>()) {
        kv("p", m->p), kv("q", m->q);
        write_grid(o, spec.grid());
        for (std::size_t k = 0; k < m->terms.size(); ++k) {
            write_weight(o, "term." + std::to_string(k + 1), m->terms[k].f);
            o << "gamma = " << fmt(m->terms[k].gamma) << '\n';
        }
    }
    return o.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ConfigError, "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ProblemSpec load_spec(const std::filesystem::path& path) { return parse_spec(read_text_file(path), path.parent_path()); }

void Tolerances::set(const std::string& key, const std::string& value) {
    const std::string what = "--tol " + key;
    auto positive = [&](double v) {
        if (!(v > 0) || !std::isfinite(v)) fail(ErrorKind::ConfigError, what + " must be positive");
        return v;
    };
    auto count = [&] {
        const long v = to_integer(value, what);
        if (v < 1 || v > 1000000) fail(ErrorKind::ConfigError, what + " must be a positive integer");
        return static_cast<int>(v);
    };
    if (key == "restarts") restarts = count();
    else if (key == "max_iter") max_iter = count();
    else if (key == "stationarity") stationarity = positive(to_double(value, what));
    else if (key == "converged") converged = positive(to_double(value, what));
    else if (key == "infinity") infinity = positive(to_double(value, what));
    else if (key == "residual") residual = positive(to_double(value, what));
    else if (key == "descent") descent = positive(to_double(value, what));
    else if (key == "membership") membership = positive(to_double(value, what));
    else fail(ErrorKind::ConfigError, "unknown tolerance '" + key + "'");
}

std::map<std::string, double> Tolerances::as_map() const {
    return {{"restarts", restarts},   {"max_iter", max_iter}, {"stationarity", stationarity},
            {"converged", converged}, {"infinity", infinity}, {"residual", residual},
            {"descent", descent},     {"membership", membership}};
}

Command parse_command(const std::string& name) {
    for (Command c : {Command::Fiber, Command::Extremal, Command::Solve, Command::Sweep, Command::Anchor,
                      Command::Verify})
        if (name == to_string(c)) return c;
    fail(ErrorKind::ConfigError, "unknown command '" + name + "'");
}

const char* to_string(Command c) {
    switch (c) {
        case Command::Fiber: return "fiber";
        case Command::Extremal: return "extremal";
        case Command::Solve: return "solve";
        case Command::Sweep: return "sweep";
        case Command::Anchor: return "anchor";
        case Command::Verify: return "verify";
    }
    return "?";
}

std::vector<double> parse_lambda_list(const std::string& text) {
    std::string cleaned;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) cleaned += line.substr(0, line.find('#')) + "\n";
    auto v = number_list(cleaned, "lambda list");
    if (v.empty()) fail(ErrorKind::ConfigError, "lambda list is empty");
    return v;
}

}  // namespace nq
